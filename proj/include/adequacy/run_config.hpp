#pragma once

// Run configuration shared by the CLI and the decision service. A config is
// one JSON document; relative data paths resolve against the directory of
// the config file. docs/config.md describes every key.

#include <adequacy/errors.hpp>
#include <adequacy/experiments.hpp>
#include <adequacy/synthetic.hpp>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace adequacy {

struct DataPaths {
    std::filesystem::path fleet;
    std::filesystem::path demand;
    std::filesystem::path wind;
};

struct ScenarioSection {
    double target_acs_peak_mw = 50000.0;
    std::vector<double> wind_gw{5.0, 15.0, 30.0};
    double onshore_fraction = 0.35;
    std::size_t season_hours = 3624;
    double demand_shift_mw = 0.0;
};

struct AnalysisSection {
    double target_eeu_mwh = 3000.0;
    std::vector<double> alphas{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99};
    std::size_t replications = 2000;
    std::uint64_t seed = 1;
    double cone_per_mw_year = 60000.0;
    double voll_per_mwh = 20000.0;
    std::vector<double> voll_sweep_per_mwh{10000.0, 20000.0, 40000.0, 60000.0};
    std::vector<std::string> excluded_years;
    std::optional<std::string> leave_out_year;
    double resolution_mw = 1.0;
    double calibration_tolerance = 1e-3;
    unsigned threads = 1;
};

struct GeneratorSection {
    std::uint64_t seed = 1;
    std::size_t n_years = 12;
    std::size_t hours_per_year = 3624;
    bool outlier_year = true;
    int first_year = 2005;
    double nominal_acs_mw = 50000.0;
    std::uint64_t fleet_seed = 1;
};

struct ServiceSection {
    std::string listen = "127.0.0.1:8080";
    std::filesystem::path data_dir = "service-data";
    unsigned workers = 2;
};

struct RunConfig {
    std::filesystem::path out_dir = "out";
    DataPaths data;
    ScenarioSection scenario;
    AnalysisSection analysis;
    GeneratorSection generator;
    ServiceSection service;
};

namespace detail::cfg {

using nlohmann::json;

inline std::string where(const std::string& section, const std::string& key) { return section + "." + key; }

template <typename T>
void read(const json& obj, const std::string& section, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError("config: " + where(section, key) + " has the wrong type");
    }
}

inline void reject_unknown(const json& obj, const std::string& section, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) throw ValidationError("config: " + section + " must be an object");
    for (const auto& [k, _] : obj.items()) {
        bool known = false;
        for (const char* key : keys) known = known || k == key;
        if (!known) throw ValidationError("config: unknown key " + where(section, k));
    }
}

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

inline void require_alpha(double a, const std::string& field) {
    if (!(a >= 0.0 && a < 1.0)) throw ValidationError(field + ": alpha must be in [0, 1), got " + text::format(a));
}

}  // namespace detail::cfg

/// Range checks that do not touch the file system.
inline void validate(const RunConfig& c) {
    const auto& s = c.scenario;
    const auto& a = c.analysis;
    if (!(s.target_acs_peak_mw > 0.0)) throw ValidationError("scenario.target_acs_peak_mw must be > 0");
    if (s.wind_gw.empty()) throw ValidationError("scenario.wind_gw must list at least one wind level");
    for (double w : s.wind_gw)
        if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("scenario.wind_gw values must be finite and >= 0");
    if (!(s.onshore_fraction >= 0.0 && s.onshore_fraction <= 1.0))
        throw ValidationError("scenario.onshore_fraction must be in [0, 1]");
    if (s.season_hours < 1) throw ValidationError("scenario.season_hours must be >= 1");
    if (!std::isfinite(s.demand_shift_mw)) throw ValidationError("scenario.demand_shift_mw must be finite");
    if (!(a.target_eeu_mwh > 0.0) || !std::isfinite(a.target_eeu_mwh))
        throw ValidationError("analysis.target_eeu_mwh must be > 0");
    for (double alpha : a.alphas) detail::cfg::require_alpha(alpha, "analysis.alphas");
    if (a.replications < 1) throw ValidationError("analysis.replications must be >= 1");
    if (!(a.cone_per_mw_year > 0.0)) throw ValidationError("analysis.cone_per_mw_year must be > 0");
    if (!(a.voll_per_mwh > 0.0)) throw ValidationError("analysis.voll_per_mwh must be > 0");
    for (double v : a.voll_sweep_per_mwh)
        if (!(v > 0.0)) throw ValidationError("analysis.voll_sweep_per_mwh values must be > 0");
    if (!(a.resolution_mw > 0.0)) throw ValidationError("analysis.resolution_mw must be > 0");
    if (!(a.calibration_tolerance > 0.0)) throw ValidationError("analysis.calibration_tolerance must be > 0");
    if (a.threads < 1) throw ValidationError("analysis.threads must be >= 1");
    std::set<std::string> seen;
    for (const auto& y : a.excluded_years)
        if (!seen.insert(y).second) throw ValidationError("analysis.excluded_years lists '" + y + "' twice");
    const auto& g = c.generator;
    if (g.n_years < 1) throw ValidationError("generator.n_years must be >= 1");
    if (g.hours_per_year < 1) throw ValidationError("generator.hours_per_year must be >= 1");
    if (!(g.nominal_acs_mw > 0.0)) throw ValidationError("generator.nominal_acs_mw must be > 0");
    if (c.service.workers < 1) throw ValidationError("service.workers must be >= 1");
    if (c.service.listen.rfind(':') == std::string::npos)
        throw ValidationError("service.listen must be HOST:PORT, got '" + c.service.listen + "'");
}

/// Parses a config document. `base_dir` anchors relative data paths.
inline RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    using namespace detail::cfg;
    RunConfig c;
    reject_unknown(j, "config", {"out_dir", "data", "scenario", "analysis", "generator", "service"});
    if (j.contains("out_dir")) {
        std::string out;
        read(j, "config", "out_dir", out);
        c.out_dir = resolve(base_dir, out);
    }
    if (j.contains("data")) {
        const auto& d = j["data"];
        reject_unknown(d, "data", {"fleet", "demand", "wind"});
        std::string fleet, demand, wind;
        read(d, "data", "fleet", fleet);
        read(d, "data", "demand", demand);
        read(d, "data", "wind", wind);
        if (!fleet.empty()) c.data.fleet = resolve(base_dir, fleet);
        if (!demand.empty()) c.data.demand = resolve(base_dir, demand);
        if (!wind.empty()) c.data.wind = resolve(base_dir, wind);
    }
    if (j.contains("scenario")) {
        const auto& s = j["scenario"];
        reject_unknown(s, "scenario",
                       {"target_acs_peak_mw", "wind_gw", "onshore_fraction", "season_hours", "demand_shift_mw"});
        read(s, "scenario", "target_acs_peak_mw", c.scenario.target_acs_peak_mw);
        read(s, "scenario", "wind_gw", c.scenario.wind_gw);
        read(s, "scenario", "onshore_fraction", c.scenario.onshore_fraction);
        read(s, "scenario", "season_hours", c.scenario.season_hours);
        read(s, "scenario", "demand_shift_mw", c.scenario.demand_shift_mw);
    }
    if (j.contains("analysis")) {
        const auto& a = j["analysis"];
        reject_unknown(a, "analysis",
                       {"target_eeu_mwh", "alphas", "replications", "seed", "cone_per_mw_year", "voll_per_mwh",
                        "voll_sweep_per_mwh", "excluded_years", "leave_out_year", "resolution_mw",
                        "calibration_tolerance", "threads"});
        auto& o = c.analysis;
        read(a, "analysis", "target_eeu_mwh", o.target_eeu_mwh);
        read(a, "analysis", "alphas", o.alphas);
        read(a, "analysis", "replications", o.replications);
        read(a, "analysis", "seed", o.seed);
        read(a, "analysis", "cone_per_mw_year", o.cone_per_mw_year);
        read(a, "analysis", "voll_per_mwh", o.voll_per_mwh);
        read(a, "analysis", "voll_sweep_per_mwh", o.voll_sweep_per_mwh);
        read(a, "analysis", "excluded_years", o.excluded_years);
        if (a.contains("leave_out_year") && !a["leave_out_year"].is_null()) {
            std::string y;
            read(a, "analysis", "leave_out_year", y);
            o.leave_out_year = y;
        }
        read(a, "analysis", "resolution_mw", o.resolution_mw);
        read(a, "analysis", "calibration_tolerance", o.calibration_tolerance);
        read(a, "analysis", "threads", o.threads);
    }
    if (j.contains("generator")) {
        const auto& g = j["generator"];
        reject_unknown(g, "generator",
                       {"seed", "n_years", "hours_per_year", "outlier_year", "first_year", "nominal_acs_mw",
                        "fleet_seed"});
        read(g, "generator", "seed", c.generator.seed);
        read(g, "generator", "n_years", c.generator.n_years);
        read(g, "generator", "hours_per_year", c.generator.hours_per_year);
        read(g, "generator", "outlier_year", c.generator.outlier_year);
        read(g, "generator", "first_year", c.generator.first_year);
        read(g, "generator", "nominal_acs_mw", c.generator.nominal_acs_mw);
        read(g, "generator", "fleet_seed", c.generator.fleet_seed);
    }
    if (j.contains("service")) {
        const auto& v = j["service"];
        reject_unknown(v, "service", {"listen", "data_dir", "workers"});
        read(v, "service", "listen", c.service.listen);
        std::string dir;
        read(v, "service", "data_dir", dir);
        if (!dir.empty()) c.service.data_dir = resolve(base_dir, dir);
        read(v, "service", "workers", c.service.workers);
    }
    validate(c);
    return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return parse_run_config(j, path.parent_path());
}

/// The effective config, with data paths as given (absolute after loading).
inline nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    j["out_dir"] = c.out_dir.string();
    j["data"] = {{"fleet", c.data.fleet.string()}, {"demand", c.data.demand.string()}, {"wind", c.data.wind.string()}};
    j["scenario"] = {{"target_acs_peak_mw", c.scenario.target_acs_peak_mw},
                     {"wind_gw", c.scenario.wind_gw},
                     {"onshore_fraction", c.scenario.onshore_fraction},
                     {"season_hours", c.scenario.season_hours},
                     {"demand_shift_mw", c.scenario.demand_shift_mw}};
    const auto& a = c.analysis;
    j["analysis"] = {{"target_eeu_mwh", a.target_eeu_mwh},
                     {"alphas", a.alphas},
                     {"replications", a.replications},
                     {"seed", a.seed},
                     {"cone_per_mw_year", a.cone_per_mw_year},
                     {"voll_per_mwh", a.voll_per_mwh},
                     {"voll_sweep_per_mwh", a.voll_sweep_per_mwh},
                     {"excluded_years", a.excluded_years},
                     {"leave_out_year", a.leave_out_year ? nlohmann::json(*a.leave_out_year) : nlohmann::json()},
                     {"resolution_mw", a.resolution_mw},
                     {"calibration_tolerance", a.calibration_tolerance},
                     {"threads", a.threads}};
    const auto& g = c.generator;
    j["generator"] = {{"seed", g.seed},           {"n_years", g.n_years},
                      {"hours_per_year", g.hours_per_year}, {"outlier_year", g.outlier_year},
                      {"first_year", g.first_year}, {"nominal_acs_mw", g.nominal_acs_mw},
                      {"fleet_seed", g.fleet_seed}};
    j["service"] = {{"listen", c.service.listen},
                    {"data_dir", c.service.data_dir.string()},
                    {"workers", c.service.workers}};
    return j;
}

inline ScenarioConfig base_scenario(const RunConfig& c) {
    ScenarioConfig s;
    s.target_acs_peak_mw = c.scenario.target_acs_peak_mw;
    s.wind_total_gw = c.scenario.wind_gw.front();
    s.onshore_fraction = c.scenario.onshore_fraction;
    s.demand_shift_mw = c.scenario.demand_shift_mw;
    s.season_hours = c.scenario.season_hours;
    return s;
}

inline SyntheticOptions synthetic_options(const RunConfig& c) {
    SyntheticOptions o;
    o.seed = c.generator.seed;
    o.n_years = c.generator.n_years;
    o.hours_per_year = c.generator.hours_per_year;
    o.outlier_year = c.generator.outlier_year;
    o.first_year = c.generator.first_year;
    o.nominal_acs_mw = c.generator.nominal_acs_mw;
    return o;
}

/// Drops the configured excluded years, in order.
inline WeatherDataset apply_exclusions(WeatherDataset ds, const std::vector<std::string>& excluded) {
    for (const auto& label : excluded) ds = without_year(ds, label);
    return ds;
}

inline void require_file(const std::filesystem::path& p, const char* key) {
    if (p.empty()) throw ValidationError(std::string("config: ") + key + " is not set");
    if (!std::filesystem::exists(p)) throw ValidationError(std::string(key) + ": file not found: " + p.string());
}

/// Loaded inputs for one run.
struct RunInputs {
    Fleet fleet;
    WeatherDataset dataset;  ///< with exclusions applied
};

inline RunInputs load_inputs(const RunConfig& c) {
    require_file(c.data.fleet, "data.fleet");
    require_file(c.data.demand, "data.demand");
    require_file(c.data.wind, "data.wind");
    RunInputs in;
    in.fleet = load_fleet(c.data.fleet.string());
    in.dataset = apply_exclusions(load_dataset(c.data.demand.string(), c.data.wind.string()), c.analysis.excluded_years);
    validate(base_scenario(c), in.dataset);
    return in;
}

inline ExperimentSetup experiment_setup(const RunConfig& c, RunInputs inputs) {
    ExperimentSetup s;
    s.fleet = std::move(inputs.fleet);
    s.dataset = std::move(inputs.dataset);
    s.scenario = base_scenario(c);
    s.wind_gw = c.scenario.wind_gw;
    s.target_eeu_mwh = c.analysis.target_eeu_mwh;
    s.replications = c.analysis.replications;
    s.seed = c.analysis.seed;
    s.threads = c.analysis.threads;
    s.resolution_mw = c.analysis.resolution_mw;
    s.calibration.tolerance = c.analysis.calibration_tolerance;
    return s;
}

}  // namespace adequacy
