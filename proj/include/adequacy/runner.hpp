#pragma once

// Batch subcommands. Each writes its artifacts into the output directory
// through an ArtifactWriter (temp file then rename) and finishes with
// config.json (the effective config) and manifest.json (SHA-256 per file).

#include <adequacy/experiments.hpp>
#include <adequacy/run_config.hpp>

#include <openssl/evp.h>

#include <array>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace adequacy {

inline std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw ComputationError("SHA-256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xF];
    }
    return out;
}

/// Writes `content` to `path` via a sibling temp file and rename.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw ValidationError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    const std::filesystem::path& dir() const { return dir_; }

    void write(const std::string& name, const std::string& content) {
        write_file_atomic(dir_ / name, content);
        files_[name] = {sha256_hex(content), content.size()};
    }

    void write(const std::string& name, const std::function<void(std::ostream&)>& fill) {
        std::ostringstream s;
        fill(s);
        write(name, s.str());
    }

    void write_json(const std::string& name, const nlohmann::json& j) { write(name, j.dump(2) + "\n"); }

    /// Echoes the config and writes the manifest. Call once, last.
    void finish(const std::string& subcommand, const RunConfig& config) {
        write_json("config.json", to_json(config));
        nlohmann::json m;
        m["subcommand"] = subcommand;
        m["artifacts"] = nlohmann::json::array();
        for (const auto& [name, info] : files_)
            m["artifacts"].push_back({{"file", name}, {"sha256", info.sha256}, {"bytes", info.bytes}});
        write_file_atomic(dir_ / "manifest.json", m.dump(2) + "\n");
    }

    std::vector<std::string> files() const {
        std::vector<std::string> out;
        for (const auto& [name, _] : files_) out.push_back(name);
        return out;
    }

private:
    struct Info {
        std::string sha256;
        std::size_t bytes = 0;
    };
    std::filesystem::path dir_;
    std::map<std::string, Info> files_;
};

/// "15" -> "wind15gw", "2.5" -> "wind2.5gw".
inline std::string wind_tag(double wind_gw) { return "wind" + text::format(wind_gw) + "gw"; }

namespace detail::run {

inline void write_calibration(ArtifactWriter& w, const std::string& name, const std::vector<CalibratedLevel>& levels,
                              double target) {
    w.write(name, [&](std::ostream& out) {
        out << "wind_gw,target_eeu_mwh,shift_mw,achieved_eeu_mwh,lole_hours,iterations\n";
        for (const auto& l : levels)
            out << text::format(l.wind_gw) << ',' << text::format(target) << ','
                << text::format(l.calibration.shift_mw) << ',' << text::format(l.calibration.achieved_eeu_mwh) << ','
                << text::format(l.calibration.lole_hours) << ',' << l.calibration.iterations << '\n';
    });
}

inline void write_histograms(ArtifactWriter& w, const std::string& prefix, const DistributionLevel& l) {
    for (auto m : all_metrics) {
        const auto h = metric_histogram(l.outcome, m);
        w.write(prefix + "_" + metric_name(m) + "_" + wind_tag(l.level.wind_gw) + ".csv",
                [&](std::ostream& out) { write_histogram_csv(out, h, metric_unit(m)); });
    }
}

inline void write_outcomes(ArtifactWriter& w, const std::string& prefix, double wind_gw, const SimulationOutcome& o) {
    w.write(prefix + "replications_" + wind_tag(wind_gw) + ".csv",
            [&](std::ostream& out) { write_replications_csv(out, o); });
    w.write(prefix + "shortfall_days_" + wind_tag(wind_gw) + ".csv",
            [&](std::ostream& out) { write_shortfall_days_csv(out, o); });
}

/// Configured scenario at each wind level, without calibration.
inline std::vector<CalibratedLevel> configured_levels(const ExperimentSetup& s) {
    validate(s);
    std::vector<CalibratedLevel> out;
    for (double w : s.wind_gw) {
        CalibratedLevel l;
        l.wind_gw = w;
        l.scenario = with_wind(s.scenario, w);
        l.indices = risk_indices(s.fleet, s.dataset, l.scenario, s.resolution_mw);
        out.push_back(std::move(l));
    }
    return out;
}

inline const std::string& leave_out_label(const RunConfig& c) {
    if (!c.analysis.leave_out_year)
        throw ValidationError("analysis.leave_out_year (--leave-out-year) is required for this subcommand");
    return *c.analysis.leave_out_year;
}

}  // namespace detail::run

struct SubcommandInfo {
    const char* name;
    const char* description;
};

inline const std::vector<SubcommandInfo>& subcommands() {
    static const std::vector<SubcommandInfo> list = {
        {"gen-data", "write a synthetic fleet, demand and wind data set"},
        {"copt", "capacity outage probability table of the fleet"},
        {"indices", "LOLE and EEU, aggregate and per year, for each wind level"},
        {"simulate", "sequential Monte Carlo outcomes per replication and shortfall day"},
        {"cvar-curve", "CVaR of energy unserved over the alpha grid"},
        {"distributions", "histograms of LOLD, EU, shortfall days and EU within a day"},
        {"contributions", "share of EEU from each weather year"},
        {"leave-one-out", "indices with analysis.leave_out_year removed"},
        {"calibrate", "shift each wind level to the target EEU"},
        {"optimize", "optimal procurement for CONE and VOLL"},
        {"sweep", "optimal procurement over the VOLL sweep"},
        {"experiment-fig1", "calibrated CVaR curves across wind levels"},
        {"experiment-fig2", "calibrated outcome histograms across wind levels"},
        {"experiment-fig3", "calibrated per-year EEU contributions across wind levels"},
        {"experiment-fig4", "calibrated EU histograms with and without one year"},
        {"serve", "run the decision service"},
    };
    return list;
}

/// Runs one batch subcommand (everything except `serve`) and returns the
/// artifact names written.
inline std::vector<std::string> run_subcommand(const std::string& name, const RunConfig& config) {
    using namespace detail::run;
    validate(config);
    ArtifactWriter w(config.out_dir);

    if (name == "gen-data") {
        const auto ds = generate_synthetic_dataset(synthetic_options(config));
        const auto fleet = generate_demo_fleet(config.generator.fleet_seed);
        w.write("fleet.csv", [&](std::ostream& out) { write_fleet(out, fleet); });
        w.write("demand.csv", [&](std::ostream& out) { write_demand(out, ds); });
        w.write("wind.csv", [&](std::ostream& out) { write_wind(out, ds); });
        w.finish(name, config);
        return w.files();
    }

    if (name == "copt") {
        require_file(config.data.fleet, "data.fleet");
        const auto d = build_capacity_distribution(load_fleet(config.data.fleet.string()), config.analysis.resolution_mw);
        w.write("copt.csv", [&](std::ostream& out) {
            out << "capacity_mw,probability\n";
            for (std::size_t k = 0; k < d.levels(); ++k)
                if (d.probabilities()[k] > 0.0)
                    out << text::format(d.capacity_at(k)) << ',' << text::format(d.probabilities()[k]) << '\n';
        });
        w.finish(name, config);
        return w.files();
    }

    const auto setup = experiment_setup(config, load_inputs(config));
    const auto& a = config.analysis;

    if (name == "indices") {
        for (const auto& l : configured_levels(setup)) {
            auto j = to_json(l.indices);
            j["wind_gw"] = l.wind_gw;
            j["demand_shift_mw"] = l.scenario.demand_shift_mw;
            w.write_json("indices_" + wind_tag(l.wind_gw) + ".json", j);
        }
    } else if (name == "simulate") {
        for (const auto& l : configured_levels(setup))
            write_outcomes(w, "", l.wind_gw, simulate_level(setup, setup.dataset, l));
    } else if (name == "cvar-curve") {
        std::vector<CvarLevel> levels;
        for (auto& l : configured_levels(setup)) {
            const auto eu = eu_distribution(simulate_level(setup, setup.dataset, l));
            levels.push_back({std::move(l), eu.mean(), cvar_curve(eu, a.alphas)});
        }
        w.write("cvar_curve.csv", [&](std::ostream& out) { write_cvar_csv(out, levels); });
    } else if (name == "distributions") {
        std::vector<DistributionLevel> levels;
        for (auto& l : configured_levels(setup)) {
            auto o = simulate_level(setup, setup.dataset, l);
            levels.push_back({std::move(l), std::move(o)});
        }
        for (const auto& l : levels) write_histograms(w, "hist", l);
        w.write("distribution_summary.csv", [&](std::ostream& out) { write_distribution_summary_csv(out, levels); });
    } else if (name == "contributions") {
        std::vector<ContributionLevel> levels;
        for (auto& l : configured_levels(setup)) {
            auto f = year_contributions(l.indices);
            levels.push_back({std::move(l), std::move(f)});
        }
        w.write("contributions.csv", [&](std::ostream& out) { write_contributions_csv(out, levels); });
    } else if (name == "leave-one-out") {
        const auto& label = leave_out_label(config);
        w.write("leave_one_out.csv", [&](std::ostream& out) {
            out << "wind_gw,excluded_year,lole_all_hours,eeu_all_mwh,lole_without_hours,eeu_without_mwh\n";
            for (const auto& l : configured_levels(setup)) {
                const auto loo = leave_one_out_indices(setup.fleet, setup.dataset, l.scenario, label, setup.resolution_mw);
                out << text::format(l.wind_gw) << ',' << label << ',' << text::format(l.indices.lole_hours) << ','
                    << text::format(l.indices.eeu_mwh) << ',' << text::format(loo.lole_hours) << ','
                    << text::format(loo.eeu_mwh) << '\n';
            }
        });
    } else if (name == "calibrate") {
        write_calibration(w, "calibration.csv", calibrate_levels(setup), setup.target_eeu_mwh);
    } else if (name == "optimize") {
        std::vector<std::pair<double, ProcurementSolution>> sols;
        for (const auto& l : configured_levels(setup)) {
            const RiskCurve curve(setup.fleet, setup.dataset, l.scenario, setup.resolution_mw);
            sols.emplace_back(l.wind_gw, optimize_procurement(curve, {a.cone_per_mw_year, a.voll_per_mwh}));
        }
        w.write("procurement.csv", [&](std::ostream& out) {
            out << "wind_gw,cone,voll,target_lole_hours,r_star_mw,lole_hours,eeu_mwh,total_cost\n";
            for (const auto& [wind, s] : sols)
                out << text::format(wind) << ',' << text::format(s.cone_per_mw_year) << ','
                    << text::format(s.voll_per_mwh) << ',' << text::format(s.target_lole_hours) << ','
                    << text::format(s.r_star_mw) << ',' << text::format(s.lole_at_r_star) << ','
                    << text::format(s.eeu_at_r_star) << ',' << text::format(s.total_cost) << '\n';
        });
    } else if (name == "sweep") {
        for (const auto& l : configured_levels(setup)) {
            const RiskCurve curve(setup.fleet, setup.dataset, l.scenario, setup.resolution_mw);
            const auto sweep = voll_sensitivity_sweep(curve, a.cone_per_mw_year, a.voll_sweep_per_mwh);
            w.write("sweep_" + wind_tag(l.wind_gw) + ".csv",
                    [&](std::ostream& out) { write_sweep_csv(out, a.cone_per_mw_year, sweep); });
        }
    } else if (name == "experiment-fig1") {
        const auto levels = cvar_experiment(setup, a.alphas);
        std::vector<CalibratedLevel> cal;
        for (const auto& l : levels) cal.push_back(l.level);
        write_calibration(w, "calibration.csv", cal, setup.target_eeu_mwh);
        w.write("fig1_cvar_eu.csv", [&](std::ostream& out) { write_cvar_csv(out, levels); });
    } else if (name == "experiment-fig2") {
        const auto levels = distribution_experiment(setup);
        std::vector<CalibratedLevel> cal;
        for (const auto& l : levels) cal.push_back(l.level);
        write_calibration(w, "calibration.csv", cal, setup.target_eeu_mwh);
        for (const auto& l : levels) write_histograms(w, "fig2", l);
        w.write("fig2_summary.csv", [&](std::ostream& out) { write_distribution_summary_csv(out, levels); });
    } else if (name == "experiment-fig3") {
        const auto levels = contribution_experiment(setup);
        std::vector<CalibratedLevel> cal;
        for (const auto& l : levels) cal.push_back(l.level);
        write_calibration(w, "calibration.csv", cal, setup.target_eeu_mwh);
        w.write("fig3_contributions.csv", [&](std::ostream& out) { write_contributions_csv(out, levels); });
    } else if (name == "experiment-fig4") {
        const auto& label = leave_out_label(config);
        const auto levels = leave_one_out_experiment(setup, label);
        std::vector<CalibratedLevel> with, without;
        for (const auto& l : levels) {
            with.push_back(l.with_year.level);
            without.push_back(l.without_year.level);
            for (const auto* part : {&l.with_year, &l.without_year}) {
                const auto h = metric_histogram(part->outcome, OutcomeMetric::eu);
                const std::string which = part == &l.with_year ? "all" : "without" + label;
                w.write("fig4_eu_" + which + "_" + wind_tag(part->level.wind_gw) + ".csv",
                        [&](std::ostream& out) { write_histogram_csv(out, h, "mwh"); });
            }
        }
        write_calibration(w, "calibration_all.csv", with, setup.target_eeu_mwh);
        write_calibration(w, "calibration_without" + label + ".csv", without, setup.target_eeu_mwh);
        w.write("fig4_summary.csv", [&](std::ostream& out) { write_leave_one_out_csv(out, levels, label); });
    } else {
        throw ValidationError("unknown subcommand '" + name + "'");
    }
    w.finish(name, config);
    return w.files();
}

}  // namespace adequacy
