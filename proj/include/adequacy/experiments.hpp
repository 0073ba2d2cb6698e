#pragma once

// Fixed-EEU wind experiments. Each wind level is calibrated to the same
// target EEU with a procurement shift, then simulated. All levels reuse the
// run seed, so the conventional-fleet trajectories are common across levels.

#include <adequacy/nonsequential.hpp>
#include <adequacy/procurement.hpp>
#include <adequacy/risk_metrics.hpp>
#include <adequacy/sequential.hpp>

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace adequacy {

struct ExperimentSetup {
    Fleet fleet;
    WeatherDataset dataset;
    ScenarioConfig scenario;  ///< wind_total_gw is replaced per level
    std::vector<double> wind_gw;
    double target_eeu_mwh = 3000.0;
    std::size_t replications = 1000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    double resolution_mw = 1.0;
    CalibrationOptions calibration;
};

inline void validate(const ExperimentSetup& s) {
    validate(s.fleet);
    validate(s.dataset);
    if (s.wind_gw.empty()) throw ValidationError("wind_gw: at least one wind level is required");
    for (double w : s.wind_gw)
        if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("wind_gw: values must be finite and >= 0");
    if (!(s.target_eeu_mwh > 0.0)) throw ValidationError("target_eeu_mwh must be > 0");
    if (s.replications < 1) throw ValidationError("replications must be >= 1");
    if (!(s.resolution_mw > 0.0)) throw ValidationError("resolution_mw must be > 0");
}

/// One wind level after calibration. `scenario` has the calibration shift
/// folded into demand_shift_mw.
struct CalibratedLevel {
    double wind_gw = 0.0;
    ScenarioConfig scenario;
    CalibrationResult calibration;
    RiskIndices indices;
};

inline ScenarioConfig with_wind(ScenarioConfig s, double wind_gw) {
    s.wind_total_gw = wind_gw;
    return s;
}

inline CalibratedLevel calibrate_level(const ExperimentSetup& setup, const WeatherDataset& dataset, double wind_gw) {
    const auto base = with_wind(setup.scenario, wind_gw);
    const RiskCurve curve(setup.fleet, dataset, base, setup.resolution_mw);
    CalibratedLevel out;
    out.wind_gw = wind_gw;
    out.calibration = calibrate_to_target_eeu(curve, setup.target_eeu_mwh, setup.calibration);
    out.scenario = base;
    out.scenario.demand_shift_mw += out.calibration.shift_mw;
    out.indices = curve.indices(out.calibration.shift_mw);
    return out;
}

inline std::vector<CalibratedLevel> calibrate_levels(const ExperimentSetup& setup, const WeatherDataset& dataset) {
    validate(setup);
    std::vector<CalibratedLevel> out;
    for (double w : setup.wind_gw) out.push_back(calibrate_level(setup, dataset, w));
    return out;
}

inline std::vector<CalibratedLevel> calibrate_levels(const ExperimentSetup& setup) {
    return calibrate_levels(setup, setup.dataset);
}

inline SimulationOutcome simulate_level(const ExperimentSetup& setup, const WeatherDataset& dataset,
                                        const CalibratedLevel& level) {
    return simulate(setup.fleet, dataset, level.scenario, setup.replications, setup.seed, setup.threads);
}

// ---- experiment-fig1: CVaR of EU against alpha ----

struct CvarLevel {
    CalibratedLevel level;
    double mean_eu_mwh = 0.0;
    std::vector<CvarPoint> curve;
};

inline std::vector<CvarLevel> cvar_experiment(const ExperimentSetup& setup, const std::vector<double>& alphas) {
    std::vector<CvarLevel> out;
    for (auto& level : calibrate_levels(setup)) {
        const auto eu = eu_distribution(simulate_level(setup, setup.dataset, level));
        out.push_back({std::move(level), eu.mean(), cvar_curve(eu, alphas)});
    }
    return out;
}

inline void write_cvar_csv(std::ostream& out, const std::vector<CvarLevel>& levels) {
    out << "wind_gw,alpha,cvar_eu_mwh\n";
    for (const auto& l : levels)
        for (const auto& p : l.curve)
            out << text::format(l.level.wind_gw) << ',' << text::format(p.alpha) << ',' << text::format(p.cvar)
                << '\n';
}

// ---- experiment-fig2: outcome distributions ----

inline constexpr OutcomeMetric all_metrics[] = {OutcomeMetric::lold, OutcomeMetric::eu, OutcomeMetric::shortfall_days,
                                                OutcomeMetric::eu_within_day};

struct DistributionLevel {
    CalibratedLevel level;
    SimulationOutcome outcome;
};

inline std::vector<DistributionLevel> distribution_experiment(const ExperimentSetup& setup,
                                                              const WeatherDataset& dataset) {
    std::vector<DistributionLevel> out;
    for (auto& level : calibrate_levels(setup, dataset)) {
        auto outcome = simulate_level(setup, dataset, level);
        out.push_back({std::move(level), std::move(outcome)});
    }
    return out;
}

inline std::vector<DistributionLevel> distribution_experiment(const ExperimentSetup& setup) {
    return distribution_experiment(setup, setup.dataset);
}

/// Histogram of one metric; an empty `eu_within_day` pool gives no bins.
inline Histogram metric_histogram(const SimulationOutcome& o, OutcomeMetric m) {
    if (m == OutcomeMetric::eu_within_day) {
        bool any = false;
        for (const auto& r : o.replications) any = any || !r.eu_per_shortfall_day.empty();
        if (!any) return {};
    }
    return make_histogram(outcome_distribution(o, m), metric_is_integer(m));
}

inline void write_histogram_csv(std::ostream& out, const Histogram& h, std::string_view unit) {
    out << "bin_lower_" << unit << ",bin_upper_" << unit << ",count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        out << text::format(h.bin_edges[i]) << ',' << text::format(h.bin_edges[i + 1]) << ',' << h.counts[i] << '\n';
}

inline void write_distribution_summary_csv(std::ostream& out, const std::vector<DistributionLevel>& levels) {
    out << "wind_gw,metric,unit,samples,mean,stddev,min,max,q50,q90,q95,q99\n";
    for (const auto& l : levels)
        for (auto m : all_metrics) {
            out << text::format(l.level.wind_gw) << ',' << metric_name(m) << ',' << metric_unit(m) << ',';
            if (m == OutcomeMetric::eu_within_day && metric_histogram(l.outcome, m).counts.empty()) {
                out << "0,,,,,,,,\n";
                continue;
            }
            const auto d = outcome_distribution(l.outcome, m);
            const auto s = summary(d);
            out << d.size();
            for (double v : {s.mean, s.stddev, s.min, s.max, s.q50, s.q90, s.q95, s.q99}) out << ',' << text::format(v);
            out << '\n';
        }
}

// ---- experiment-fig3: per-year EEU contributions ----

struct ContributionLevel {
    CalibratedLevel level;
    std::map<std::string, double> fraction;
};

inline std::vector<ContributionLevel> contribution_experiment(const ExperimentSetup& setup) {
    std::vector<ContributionLevel> out;
    for (auto& level : calibrate_levels(setup)) {
        auto f = year_contributions(level.indices);
        out.push_back({std::move(level), std::move(f)});
    }
    return out;
}

inline void write_contributions_csv(std::ostream& out, const std::vector<ContributionLevel>& levels) {
    out << "wind_gw,year,eeu_mwh,fraction\n";
    for (const auto& l : levels)
        for (const auto& y : l.level.indices.per_year)
            out << text::format(l.level.wind_gw) << ',' << y.year << ',' << text::format(y.eeu_mwh) << ','
                << text::format(l.fraction.at(y.year)) << '\n';
}

// ---- experiment-fig4: EU distribution with one year left out ----

struct LeaveOneOutLevel {
    DistributionLevel with_year;
    DistributionLevel without_year;
};

/// Runs the distribution experiment twice: on all years and with `label`
/// removed from both calibration and simulation.
inline std::vector<LeaveOneOutLevel> leave_one_out_experiment(const ExperimentSetup& setup, const std::string& label) {
    const auto reduced = without_year(setup.dataset, label);
    auto full = distribution_experiment(setup, setup.dataset);
    auto part = distribution_experiment(setup, reduced);
    std::vector<LeaveOneOutLevel> out;
    for (std::size_t i = 0; i < full.size(); ++i) out.push_back({std::move(full[i]), std::move(part[i])});
    return out;
}

inline void write_leave_one_out_csv(std::ostream& out, const std::vector<LeaveOneOutLevel>& levels,
                                    const std::string& label) {
    out << "wind_gw,excluded_year,shift_with_mw,shift_without_mw,eu_q99_with_mwh,eu_q99_without_mwh,"
           "eu_q99_ratio,eu_max_with_mwh,eu_max_without_mwh\n";
    for (const auto& l : levels) {
        const auto a = summary(eu_distribution(l.with_year.outcome));
        const auto b = summary(eu_distribution(l.without_year.outcome));
        out << text::format(l.with_year.level.wind_gw) << ',' << label << ','
            << text::format(l.with_year.level.calibration.shift_mw) << ','
            << text::format(l.without_year.level.calibration.shift_mw) << ',' << text::format(a.q99) << ','
            << text::format(b.q99) << ',' << (a.q99 > 0.0 ? text::format(b.q99 / a.q99) : std::string()) << ','
            << text::format(a.max) << ',' << text::format(b.max) << '\n';
    }
}

}  // namespace adequacy
