#pragma once

// Scenario jobs for the decision service. A job is identified by the SHA-256
// of its normalized request, so identical requests share one computation and
// one result directory under <data_dir>/jobs/<id>/. Results are immutable once
// written; the in-memory state only tracks queued and running jobs and a
// cache of risk curves for what-if procurement.

#include <adequacy/runner.hpp>

#include <json.hpp>

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

namespace adequacy {

struct FieldError {
    std::string field;
    std::string message;
};

/// 400-class error carrying one message per offending field.
class RequestError : public ValidationError {
public:
    explicit RequestError(std::vector<FieldError> errors)
        : ValidationError(summarize(errors)), errors_(std::move(errors)) {}
    RequestError(std::string field, std::string message)
        : RequestError(std::vector<FieldError>{{std::move(field), std::move(message)}}) {}

    const std::vector<FieldError>& errors() const noexcept { return errors_; }

private:
    static std::string summarize(const std::vector<FieldError>& errors) {
        std::string s;
        for (const auto& e : errors) s += (s.empty() ? "" : "; ") + e.field + ": " + e.message;
        return s;
    }
    std::vector<FieldError> errors_;
};

class NotFound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class JobStatus { queued, running, done, failed };

inline const char* status_name(JobStatus s) {
    switch (s) {
        case JobStatus::queued: return "queued";
        case JobStatus::running: return "running";
        case JobStatus::done: return "done";
        case JobStatus::failed: return "failed";
    }
    return "unknown";
}

class NotReady : public std::runtime_error {
public:
    explicit NotReady(JobStatus s) : std::runtime_error(std::string("job is ") + status_name(s)), status_(s) {}
    JobStatus status() const noexcept { return status_; }

private:
    JobStatus status_;
};

struct ScenarioRequest {
    double wind_gw = 0.0;
    double target_eeu_mwh = 3000.0;
    double cone_per_mw_year = 60000.0;
    double voll_per_mwh = 20000.0;
    std::vector<double> alphas;
    std::size_t replications = 1000;
    std::uint64_t seed = 1;
    std::vector<std::string> excluded_years;
};

/// Parses and validates a request body. Missing optional fields take the
/// base config's values. Alphas and excluded years are sorted and
/// de-duplicated.
inline ScenarioRequest parse_scenario_request(const nlohmann::json& body, const RunConfig& base,
                                              const std::vector<std::string>& known_years) {
    std::vector<FieldError> errs;
    if (!body.is_object()) throw RequestError("body", "must be a JSON object");
    static const char* fields[] = {"wind_gw",      "target_eeu_mwh", "cone_per_mw_year", "voll_per_mwh",
                                   "alphas",       "replications",   "seed",             "excluded_years"};
    for (const auto& [k, _] : body.items()) {
        bool known = false;
        for (const char* f : fields) known = known || k == f;
        if (!known) errs.push_back({k, "unknown field"});
    }

    ScenarioRequest r;
    r.wind_gw = base.scenario.wind_gw.front();
    r.target_eeu_mwh = base.analysis.target_eeu_mwh;
    r.cone_per_mw_year = base.analysis.cone_per_mw_year;
    r.voll_per_mwh = base.analysis.voll_per_mwh;
    r.alphas = base.analysis.alphas;
    r.replications = base.analysis.replications;
    r.seed = base.analysis.seed;
    r.excluded_years = base.analysis.excluded_years;

    const auto number = [&](const char* key, double& out, bool strictly_positive) {
        if (!body.contains(key)) return;
        const auto& v = body[key];
        if (!v.is_number()) return errs.push_back({key, "must be a number"});
        const double x = v.get<double>();
        if (!std::isfinite(x) || (strictly_positive ? !(x > 0.0) : !(x >= 0.0)))
            return errs.push_back({key, strictly_positive ? "must be > 0" : "must be >= 0"});
        out = x;
    };
    number("wind_gw", r.wind_gw, false);
    number("target_eeu_mwh", r.target_eeu_mwh, true);
    number("cone_per_mw_year", r.cone_per_mw_year, true);
    number("voll_per_mwh", r.voll_per_mwh, true);

    if (body.contains("alphas")) {
        const auto& v = body["alphas"];
        if (!v.is_array() || v.empty()) {
            errs.push_back({"alphas", "must be a non-empty array of numbers"});
        } else {
            r.alphas.clear();
            for (const auto& a : v) {
                if (!a.is_number()) {
                    errs.push_back({"alphas", "must contain only numbers"});
                    break;
                }
                const double x = a.get<double>();
                if (!(x >= 0.0 && x < 1.0)) {
                    errs.push_back({"alphas", "each alpha must be in [0, 1), got " + text::format(x)});
                    break;
                }
                r.alphas.push_back(x);
            }
        }
    }
    if (body.contains("replications")) {
        const auto& v = body["replications"];
        if (!v.is_number_integer() || v.get<std::int64_t>() < 1)
            errs.push_back({"replications", "must be an integer >= 1"});
        else
            r.replications = v.get<std::size_t>();
    }
    if (body.contains("seed")) {
        const auto& v = body["seed"];
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
            errs.push_back({"seed", "must be a non-negative integer"});
        else
            r.seed = v.get<std::uint64_t>();
    }
    if (body.contains("excluded_years")) {
        const auto& v = body["excluded_years"];
        if (!v.is_array()) {
            errs.push_back({"excluded_years", "must be an array of year labels"});
        } else {
            r.excluded_years.clear();
            for (const auto& y : v) {
                if (!y.is_string()) {
                    errs.push_back({"excluded_years", "labels must be strings"});
                    break;
                }
                r.excluded_years.push_back(y.get<std::string>());
            }
        }
    }

    std::sort(r.alphas.begin(), r.alphas.end());
    r.alphas.erase(std::unique(r.alphas.begin(), r.alphas.end()), r.alphas.end());
    std::sort(r.excluded_years.begin(), r.excluded_years.end());
    r.excluded_years.erase(std::unique(r.excluded_years.begin(), r.excluded_years.end()), r.excluded_years.end());
    for (const auto& y : r.excluded_years)
        if (std::find(known_years.begin(), known_years.end(), y) == known_years.end())
            errs.push_back({"excluded_years", "unknown year '" + y + "'"});
    if (r.excluded_years.size() >= known_years.size() && !known_years.empty())
        errs.push_back({"excluded_years", "at least one year must remain"});
    if (!errs.empty()) throw RequestError(std::move(errs));
    return r;
}

inline nlohmann::json to_json(const ScenarioRequest& r) {
    return {{"wind_gw", r.wind_gw},
            {"target_eeu_mwh", r.target_eeu_mwh},
            {"cone_per_mw_year", r.cone_per_mw_year},
            {"voll_per_mwh", r.voll_per_mwh},
            {"alphas", r.alphas},
            {"replications", r.replications},
            {"seed", r.seed},
            {"excluded_years", r.excluded_years}};
}

/// Content address of a normalized request (nlohmann::json keeps object keys
/// sorted, so dump() is canonical).
inline std::string scenario_id(const ScenarioRequest& r) { return sha256_hex(to_json(r).dump()).substr(0, 32); }

inline nlohmann::json to_json(const ProcurementSolution& s) {
    return {{"cone_per_mw_year", s.cone_per_mw_year}, {"voll_per_mwh", s.voll_per_mwh},
            {"target_lole_hours", s.target_lole_hours}, {"r_star_mw", s.r_star_mw},
            {"lole_at_r_star_hours", s.lole_at_r_star}, {"eeu_at_r_star_mwh", s.eeu_at_r_star},
            {"total_cost", s.total_cost}};
}

struct ServiceOptions {
    std::filesystem::path data_dir = "service-data";
    unsigned workers = 2;
};

class ScenarioService {
public:
    struct Created {
        std::string id;
        JobStatus status;
        bool existing = false;
    };

    /// Loads the base fleet and dataset once; every job derives from them.
    ScenarioService(RunConfig base, ServiceOptions opt)
        : base_(std::move(base)), opt_(std::move(opt)), inputs_(load_inputs_all(base_)) {
        if (opt_.workers < 1) throw ValidationError("service workers must be >= 1");
        std::filesystem::create_directories(opt_.data_dir / "jobs");
        for (unsigned i = 0; i < opt_.workers; ++i) workers_.emplace_back([this] { work(); });
    }

    ScenarioService(const ScenarioService&) = delete;
    ScenarioService& operator=(const ScenarioService&) = delete;

    ~ScenarioService() {
        {
            std::lock_guard lock(mu_);
            stopping_ = true;
        }
        cv_.notify_all();
        for (auto& t : workers_) t.join();
    }

    const RunConfig& base_config() const noexcept { return base_; }
    const std::filesystem::path& data_dir() const noexcept { return opt_.data_dir; }
    std::vector<std::string> year_labels() const { return inputs_.dataset.labels(); }

    Created create(const nlohmann::json& body) {
        const auto req = parse_scenario_request(body, base_, inputs_.dataset.labels());
        const auto id = scenario_id(req);
        std::lock_guard lock(mu_);
        if (auto it = jobs_.find(id); it != jobs_.end()) return {id, it->second.status, true};
        if (auto s = status_on_disk(id)) {
            jobs_[id] = Job{req, *s, error_on_disk(id)};
            return {id, *s, true};
        }
        jobs_[id] = Job{req, JobStatus::queued, {}};
        queue_.push_back(id);
        cv_.notify_one();
        return {id, JobStatus::queued, false};
    }

    /// {id, status, request[, error]}.
    nlohmann::json describe(const std::string& id) {
        const auto job = lookup(id);
        nlohmann::json j{{"id", id}, {"status", status_name(job.status)}, {"request", to_json(job.request)}};
        if (job.status == JobStatus::failed) j["error"] = job.error;
        return j;
    }

    nlohmann::json metrics(const std::string& id) { return read_result(id, "metrics.json"); }

    nlohmann::json distribution(const std::string& id, const std::string& metric) {
        const auto m = parse_metric(metric);
        return read_result(id, std::string("distribution_") + metric_name(m) + ".json");
    }

    /// Re-solves the procurement problem on the job's cached risk curve; r is
    /// relative to the calibrated system.
    nlohmann::json whatif(const std::string& id, const nlohmann::json& body) {
        const auto job = lookup(id);
        if (job.status != JobStatus::done) throw NotReady(job.status);
        std::vector<FieldError> errs;
        ProcurementProblem p{job.request.cone_per_mw_year, job.request.voll_per_mwh};
        if (!body.is_object()) throw RequestError("body", "must be a JSON object");
        for (const auto& [k, _] : body.items())
            if (k != "cone_per_mw_year" && k != "voll_per_mwh") errs.push_back({k, "unknown field"});
        const auto number = [&](const char* key, double& out) {
            if (!body.contains(key)) return;
            if (!body[key].is_number() || !(body[key].get<double>() > 0.0) ||
                !std::isfinite(body[key].get<double>()))
                return errs.push_back({key, "must be a finite number > 0"});
            out = body[key].get<double>();
        };
        number("cone_per_mw_year", p.cone_per_mw_year);
        number("voll_per_mwh", p.voll_per_mwh);
        if (!errs.empty()) throw RequestError(std::move(errs));
        return to_json(optimize_procurement(*curve_for(id, job), p));
    }

    nlohmann::json health() {
        std::lock_guard lock(mu_);
        std::size_t pending = 0;
        for (const auto& [_, j] : jobs_) pending += j.status == JobStatus::queued || j.status == JobStatus::running;
        return {{"status", "ok"}, {"workers", opt_.workers}, {"pending_jobs", pending}, {"years", inputs_.dataset.labels()}};
    }

    /// Blocks until the job leaves queued/running. For tests and the CLI.
    JobStatus wait(const std::string& id) {
        std::unique_lock lock(mu_);
        done_cv_.wait(lock, [&] {
            const auto it = jobs_.find(id);
            return it == jobs_.end() || (it->second.status != JobStatus::queued && it->second.status != JobStatus::running);
        });
        const auto it = jobs_.find(id);
        if (it == jobs_.end()) throw NotFound("unknown scenario id " + id);
        return it->second.status;
    }

private:
    struct Job {
        ScenarioRequest request;
        JobStatus status = JobStatus::queued;
        std::string error;
    };

    static RunInputs load_inputs_all(const RunConfig& c) {
        auto all = c;
        all.analysis.excluded_years.clear();
        return load_inputs(all);
    }

    std::filesystem::path job_dir(const std::string& id) const { return opt_.data_dir / "jobs" / id; }

    static bool valid_id(const std::string& id) {
        return id.size() == 32 && std::all_of(id.begin(), id.end(), [](char ch) {
                   return (ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'f');
               });
    }

    std::optional<JobStatus> status_on_disk(const std::string& id) const {
        std::ifstream in(job_dir(id) / "status.json");
        if (!in) return std::nullopt;
        const auto j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded() || !j.contains("status")) return std::nullopt;
        const auto s = j["status"].get<std::string>();
        if (s == "done") return JobStatus::done;
        if (s == "failed") return JobStatus::failed;
        return std::nullopt;
    }

    std::string error_on_disk(const std::string& id) const {
        std::ifstream in(job_dir(id) / "status.json");
        const auto j = nlohmann::json::parse(in, nullptr, false);
        return !j.is_discarded() && j.contains("error") ? j["error"].get<std::string>() : std::string();
    }

    Job lookup(const std::string& id) {
        if (!valid_id(id)) throw NotFound("unknown scenario id " + id);
        std::lock_guard lock(mu_);
        if (auto it = jobs_.find(id); it != jobs_.end()) return it->second;
        const auto s = status_on_disk(id);
        if (!s) throw NotFound("unknown scenario id " + id);
        std::ifstream in(job_dir(id) / "request.json");
        const auto req = parse_scenario_request(nlohmann::json::parse(in), base_, inputs_.dataset.labels());
        jobs_[id] = Job{req, *s, error_on_disk(id)};
        return jobs_[id];
    }

    nlohmann::json read_result(const std::string& id, const std::string& file) {
        const auto job = lookup(id);
        if (job.status != JobStatus::done) throw NotReady(job.status);
        std::ifstream in(job_dir(id) / file);
        if (!in) throw ComputationError("result file missing: " + file);
        return nlohmann::json::parse(in);
    }

    RunConfig job_config(const ScenarioRequest& r) const {
        auto c = base_;
        c.scenario.wind_gw = {r.wind_gw};
        c.analysis.target_eeu_mwh = r.target_eeu_mwh;
        c.analysis.cone_per_mw_year = r.cone_per_mw_year;
        c.analysis.voll_per_mwh = r.voll_per_mwh;
        c.analysis.alphas = r.alphas;
        c.analysis.replications = r.replications;
        c.analysis.seed = r.seed;
        c.analysis.excluded_years = r.excluded_years;
        c.analysis.threads = 1;
        c.out_dir = job_dir(scenario_id(r));
        return c;
    }

    ExperimentSetup job_setup(const RunConfig& c) const {
        RunInputs in{inputs_.fleet, apply_exclusions(inputs_.dataset, c.analysis.excluded_years)};
        return experiment_setup(c, std::move(in));
    }

    std::shared_ptr<const RiskCurve> curve_for(const std::string& id, const Job& job) {
        {
            std::lock_guard lock(mu_);
            if (auto it = curves_.find(id); it != curves_.end()) return it->second;
        }
        const auto c = job_config(job.request);
        const auto setup = job_setup(c);
        const auto m = read_result(id, "metrics.json");
        auto scenario = with_wind(setup.scenario, job.request.wind_gw);
        scenario.demand_shift_mw += m.at("shift_mw").get<double>();
        auto curve = std::make_shared<const RiskCurve>(setup.fleet, setup.dataset, scenario, setup.resolution_mw);
        std::lock_guard lock(mu_);
        return curves_.emplace(id, std::move(curve)).first->second;
    }

    void compute(const std::string& id, const ScenarioRequest& req) {
        const auto c = job_config(req);
        const auto setup = job_setup(c);
        const auto level = calibrate_level(setup, setup.dataset, req.wind_gw);
        const auto outcome = simulate_level(setup, setup.dataset, level);
        const auto eu = eu_distribution(outcome);
        const auto lold = lold_distribution(outcome);

        std::filesystem::remove_all(c.out_dir);
        ArtifactWriter w(c.out_dir);
        w.write_json("request.json", to_json(req));
        nlohmann::json m;
        m["id"] = id;
        m["wind_gw"] = req.wind_gw;
        m["target_eeu_mwh"] = req.target_eeu_mwh;
        m["shift_mw"] = level.calibration.shift_mw;
        m["replications"] = outcome.n_replications();
        // Monte Carlo means; the analytic indices follow
        m["lole_hours"] = lold.mean();
        m["eeu_mwh"] = eu.mean();
        m["lole_analytic_hours"] = level.indices.lole_hours;
        m["eeu_analytic_mwh"] = level.indices.eeu_mwh;
        m["cvar_curve"] = nlohmann::json::array();
        for (const auto& p : cvar_curve(eu, req.alphas))
            m["cvar_curve"].push_back({{"alpha", p.alpha}, {"cvar_eu_mwh", p.cvar}});
        const auto frac = year_contributions(level.indices);
        m["per_year_contributions"] = nlohmann::json::array();
        for (const auto& y : level.indices.per_year)
            m["per_year_contributions"].push_back(
                {{"year", y.year}, {"eeu_mwh", y.eeu_mwh}, {"lole_hours", y.lole_hours}, {"fraction", frac.at(y.year)}});
        w.write_json("metrics.json", m);

        for (auto metric : all_metrics) {
            const std::string unit = metric_unit(metric);
            const auto h = metric_histogram(outcome, metric);
            nlohmann::json d{{"metric", metric_name(metric)}, {"unit", unit}};
            d["bin_edges_" + unit] = h.bin_edges;
            d["counts"] = h.counts;
            d["samples"] = h.total();
            if (!h.counts.empty()) {
                const auto s = summary(outcome_distribution(outcome, metric));
                d["quantiles_" + unit] = {{"min", s.min}, {"q50", s.q50}, {"q90", s.q90}, {"q95", s.q95},
                                          {"q99", s.q99}, {"max", s.max}};
                d["mean_" + unit] = s.mean;
            } else {
                d["quantiles_" + unit] = nlohmann::json::object();
                d["mean_" + unit] = nullptr;
            }
            w.write_json(std::string("distribution_") + metric_name(metric) + ".json", d);
        }
        w.write("replications.csv", [&](std::ostream& out) { write_replications_csv(out, outcome); });
        w.write("shortfall_days.csv", [&](std::ostream& out) { write_shortfall_days_csv(out, outcome); });
        w.finish("serve", c);
        write_file_atomic(c.out_dir / "status.json", nlohmann::json{{"status", "done"}}.dump() + "\n");
    }

    void work() {
        for (;;) {
            std::string id;
            ScenarioRequest req;
            {
                std::unique_lock lock(mu_);
                cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
                if (stopping_) return;
                id = queue_.front();
                queue_.pop_front();
                jobs_[id].status = JobStatus::running;
                req = jobs_[id].request;
            }
            JobStatus result = JobStatus::done;
            std::string error;
            try {
                compute(id, req);
            } catch (const std::exception& e) {
                result = JobStatus::failed;
                error = e.what();
                try {
                    write_file_atomic(job_dir(id) / "request.json", to_json(req).dump(2) + "\n");
                    write_file_atomic(job_dir(id) / "status.json",
                                      nlohmann::json{{"status", "failed"}, {"error", error}}.dump() + "\n");
                } catch (...) {
                }
            }
            {
                std::lock_guard lock(mu_);
                jobs_[id].status = result;
                jobs_[id].error = error;
            }
            done_cv_.notify_all();
        }
    }

    RunConfig base_;
    ServiceOptions opt_;
    RunInputs inputs_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::condition_variable done_cv_;
    std::deque<std::string> queue_;
    std::unordered_map<std::string, Job> jobs_;
    std::unordered_map<std::string, std::shared_ptr<const RiskCurve>> curves_;
    bool stopping_ = false;
    std::vector<std::thread> workers_;
};

}  // namespace adequacy
