#pragma once

// Capacity procurement: calibrating the supply-demand shift to a target
// EEU, and the CONE/VOLL cost-benefit optimum.
//
// Everything here works on a RiskCurve, so r is an extra shift on top of
// the scenario's own demand_shift_mw. EEU(r) is continuous, convex and
// nonincreasing with slope -LOLE(r), so both problems are one-dimensional
// monotone root finds solved by bisection.

#include <adequacy/errors.hpp>
#include <adequacy/nonsequential.hpp>
#include <adequacy/text.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace adequacy {

inline double eeu_of_shift(const RiskCurve& curve, double r_mw) { return curve.eeu(r_mw); }

inline double eeu_of_shift(const Fleet& fleet, const WeatherDataset& dataset, const ScenarioConfig& scenario,
                           double r_mw, double resolution_mw = 1.0) {
    return RiskCurve(fleet, dataset, scenario, resolution_mw).eeu(r_mw);
}

struct CalibrationOptions {
    double tolerance = 1e-3;        ///< relative, on EEU
    std::optional<double> bound_mw;  ///< search r in [-bound, +bound]; default total fleet capacity
    int max_iterations = 200;
};

struct CalibrationResult {
    double shift_mw = 0.0;
    double achieved_eeu_mwh = 0.0;
    double lole_hours = 0.0;
    int iterations = 0;
};

/// Shift r with |EEU(r) - target| <= tolerance * target.
inline CalibrationResult calibrate_to_target_eeu(const RiskCurve& curve, double target_eeu_mwh,
                                                 const CalibrationOptions& opt = {}) {
    if (!(target_eeu_mwh > 0.0) || !std::isfinite(target_eeu_mwh))
        throw ValidationError("target EEU must be finite and > 0");
    if (!(opt.tolerance > 0.0)) throw ValidationError("calibration tolerance must be > 0");
    const double bound = opt.bound_mw.value_or(curve.fleet_capacity_mw());
    if (!(bound > 0.0)) throw CalibrationInfeasible("calibration bound is zero (empty fleet?)");

    double lo = -bound;  // EEU(lo) >= target required
    double hi = bound;   // EEU(hi) <= target required
    const double eeu_lo = curve.eeu(lo);
    const double eeu_hi = curve.eeu(hi);
    const double slack = opt.tolerance * target_eeu_mwh;
    const auto done = [&](double r, double e, int it) {
        return CalibrationResult{r, e, curve.lole(r), it};
    };
    if (std::abs(eeu_lo - target_eeu_mwh) <= slack) return done(lo, eeu_lo, 0);
    if (std::abs(eeu_hi - target_eeu_mwh) <= slack) return done(hi, eeu_hi, 0);
    if (eeu_lo < target_eeu_mwh)
        throw CalibrationInfeasible("EEU at shift " + text::format(lo) + " MW is " + text::format(eeu_lo) +
                                    " MWh, below the target " + text::format(target_eeu_mwh));
    if (eeu_hi > target_eeu_mwh)
        throw CalibrationInfeasible("EEU at shift +" + text::format(hi) + " MW is " + text::format(eeu_hi) +
                                    " MWh, above the target " + text::format(target_eeu_mwh));

    for (int it = 1; it <= opt.max_iterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double e = curve.eeu(mid);
        if (std::abs(e - target_eeu_mwh) <= slack) return done(mid, e, it);
        (e > target_eeu_mwh ? lo : hi) = mid;
    }
    throw CalibrationInfeasible("calibration did not converge in " + std::to_string(opt.max_iterations) +
                                " iterations");
}

inline CalibrationResult calibrate_to_target_eeu(const Fleet& fleet, const WeatherDataset& dataset,
                                                 const ScenarioConfig& scenario, double target_eeu_mwh,
                                                 const CalibrationOptions& opt = {}, double resolution_mw = 1.0) {
    return calibrate_to_target_eeu(RiskCurve(fleet, dataset, scenario, resolution_mw), target_eeu_mwh, opt);
}

struct ProcurementProblem {
    double cone_per_mw_year = 0.0;
    double voll_per_mwh = 0.0;
};

inline void validate(const ProcurementProblem& p) {
    if (!(p.cone_per_mw_year > 0.0) || !std::isfinite(p.cone_per_mw_year))
        throw ValidationError("cone_per_mw_year must be finite and > 0");
    if (!(p.voll_per_mwh > 0.0) || !std::isfinite(p.voll_per_mwh))
        throw ValidationError("voll_per_mwh must be finite and > 0");
}

struct ProcurementSolution {
    double cone_per_mw_year = 0.0;
    double voll_per_mwh = 0.0;
    double r_star_mw = 0.0;
    double total_cost = 0.0;  ///< CONE * r* + VOLL * EEU(r*)
    double lole_at_r_star = 0.0;
    double eeu_at_r_star = 0.0;
    double target_lole_hours = 0.0;  ///< CONE / VOLL
};

inline double procurement_objective(const RiskCurve& curve, const ProcurementProblem& p, double r_mw) {
    return p.cone_per_mw_year * r_mw + p.voll_per_mwh * curve.eeu(r_mw);
}

struct OptimizeOptions {
    std::optional<double> bound_mw;  ///< r in [-bound, +bound]; default total fleet capacity
    double r_tolerance_mw = 1e-9;
};

/// The objective's right derivative is CONE - VOLL * LOLE(r), so r* is the
/// smallest r with LOLE(r) <= CONE / VOLL.
inline ProcurementSolution optimize_procurement(const RiskCurve& curve, const ProcurementProblem& problem,
                                                const OptimizeOptions& opt = {}) {
    validate(problem);
    const double ratio = problem.cone_per_mw_year / problem.voll_per_mwh;
    const double bound = opt.bound_mw.value_or(curve.fleet_capacity_mw());
    double lo = -bound;
    double hi = bound;
    if (curve.lole(lo) <= ratio)
        throw BoundarySolution(BoundarySolution::Bound::lower,
                               "no interior optimum: LOLE at the lower bound r = " + text::format(lo) + " MW is " +
                                   text::format(curve.lole(lo)) + " h, already <= CONE/VOLL = " + text::format(ratio));
    if (curve.lole(hi) > ratio)
        throw BoundarySolution(BoundarySolution::Bound::upper,
                               "no interior optimum: LOLE at the upper bound r = +" + text::format(hi) + " MW is " +
                                   text::format(curve.lole(hi)) + " h, still > CONE/VOLL = " + text::format(ratio));
    // invariant: LOLE(lo) > ratio >= LOLE(hi)
    while (hi - lo > opt.r_tolerance_mw) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (curve.lole(mid) > ratio ? lo : hi) = mid;
    }
    ProcurementSolution s;
    s.cone_per_mw_year = problem.cone_per_mw_year;
    s.voll_per_mwh = problem.voll_per_mwh;
    s.r_star_mw = hi;
    s.lole_at_r_star = curve.lole(hi);
    s.eeu_at_r_star = curve.eeu(hi);
    s.total_cost = problem.cone_per_mw_year * hi + problem.voll_per_mwh * s.eeu_at_r_star;
    s.target_lole_hours = ratio;
    return s;
}

struct SweepEntry {
    double voll_per_mwh = 0.0;
    std::optional<ProcurementSolution> solution;
    std::string error;  ///< set when solution is empty
};

/// One solve per VOLL at fixed CONE, ordered by VOLL; failures are recorded
/// per entry.
inline std::vector<SweepEntry> voll_sensitivity_sweep(const RiskCurve& curve, double cone_per_mw_year,
                                                      std::vector<double> voll_values,
                                                      const OptimizeOptions& opt = {}) {
    std::sort(voll_values.begin(), voll_values.end());
    std::vector<SweepEntry> out;
    for (double voll : voll_values) {
        SweepEntry e;
        e.voll_per_mwh = voll;
        try {
            e.solution = optimize_procurement(curve, {cone_per_mw_year, voll}, opt);
        } catch (const std::exception& ex) {
            e.error = ex.what();
        }
        out.push_back(std::move(e));
    }
    return out;
}

/// voll,cone,r_star_mw,lole_hours,eeu_mwh,total_cost (failed entries leave
/// the solution fields empty).
inline void write_sweep_csv(std::ostream& out, double cone_per_mw_year, const std::vector<SweepEntry>& sweep) {
    out << "voll,cone,r_star_mw,lole_hours,eeu_mwh,total_cost\n";
    for (const auto& e : sweep) {
        out << text::format(e.voll_per_mwh) << ',' << text::format(cone_per_mw_year) << ',';
        if (e.solution)
            out << text::format(e.solution->r_star_mw) << ',' << text::format(e.solution->lole_at_r_star) << ','
                << text::format(e.solution->eeu_at_r_star) << ',' << text::format(e.solution->total_cost);
        else
            out << ",,,";
        out << '\n';
    }
}

}  // namespace adequacy
