#pragma once

// Conventional generation fleet: exact capacity distribution by
// convolution, and two-state Markov availability trajectories.

#include <adequacy/errors.hpp>
#include <adequacy/seeding.hpp>
#include <adequacy/text.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace adequacy {

struct GeneratingUnit {
    std::string id;
    double capacity_mw = 0.0;
    double availability = 1.0;  ///< stationary probability of being up
    double mttr_hours = 1.0;
};

inline void validate(const GeneratingUnit& u) {
    const auto bad = [&](const std::string& what) {
        throw ValidationError("unit '" + u.id + "': " + what);
    };
    if (!std::isfinite(u.capacity_mw) || u.capacity_mw <= 0.0) bad("capacity_mw must be finite and > 0");
    if (!std::isfinite(u.availability) || u.availability <= 0.0 || u.availability > 1.0)
        bad("availability must lie in (0, 1]");
    if (!std::isfinite(u.mttr_hours) || u.mttr_hours <= 0.0) bad("mttr_hours must be finite and > 0");
}

struct Fleet {
    std::vector<GeneratingUnit> units;

    double total_capacity_mw() const {
        double sum = 0.0;
        for (const auto& u : units) sum += u.capacity_mw;
        return sum;
    }

    double mean_available_mw() const {
        double sum = 0.0;
        for (const auto& u : units) sum += u.availability * u.capacity_mw;
        return sum;
    }
};

inline void validate(const Fleet& fleet) {
    std::set<std::string> ids;
    for (const auto& u : fleet.units) {
        validate(u);
        if (!ids.insert(u.id).second) throw ValidationError("duplicate unit id '" + u.id + "'");
    }
}

/// Discrete distribution of available capacity on a grid of
/// `resolution_mw`: probabilities[k] = P(X = k * resolution_mw).
class CapacityDistribution {
public:
    CapacityDistribution() : CapacityDistribution(1.0, {1.0}) {}

    CapacityDistribution(double resolution_mw, std::vector<double> probabilities)
        : resolution_(resolution_mw), probs_(std::move(probabilities)) {
        if (!(resolution_ > 0.0) || !std::isfinite(resolution_))
            throw ValidationError("capacity resolution must be finite and > 0");
        if (probs_.empty()) throw ValidationError("capacity distribution needs at least one level");
        build_tables();
    }

    double resolution_mw() const noexcept { return resolution_; }
    std::size_t levels() const noexcept { return probs_.size(); }
    std::span<const double> probabilities() const noexcept { return probs_; }
    double capacity_at(std::size_t level) const noexcept { return static_cast<double>(level) * resolution_; }
    double max_capacity_mw() const noexcept { return capacity_at(probs_.size() - 1); }

    /// P(X = capacity); zero off the grid.
    double probability_at(double capacity_mw) const {
        const double k = capacity_mw / resolution_;
        const double r = std::round(k);
        if (std::abs(k - r) > 1e-9 || r < 0.0 || r >= static_cast<double>(probs_.size())) return 0.0;
        return probs_[static_cast<std::size_t>(r)];
    }

    double mean_mw() const {
        double m = 0.0;
        for (std::size_t k = 0; k < probs_.size(); ++k) m += probs_[k] * capacity_at(k);
        return m;
    }

    /// P(X < demand): strict, so capacity exactly equal to demand is no shortfall.
    double prob_below(double demand_mw) const {
        const auto k = last_level_below(demand_mw);
        if (k < 0) return 0.0;
        return cdf_[static_cast<std::size_t>(k)];
    }

    /// E[max(0, demand - X)].
    double expected_shortfall(double demand_mw) const {
        const auto k = last_level_below(demand_mw);
        if (k < 0) return 0.0;
        const auto ku = static_cast<std::size_t>(k);
        return shortfall_at_level_[ku] + (demand_mw - capacity_at(ku)) * cdf_[ku];
    }

private:
    // Largest level k with k * resolution < demand, clamped to the top
    // level; -1 when no level lies below.
    std::int64_t last_level_below(double demand_mw) const {
        if (!(demand_mw > 0.0)) return -1;
        const double top = static_cast<double>(probs_.size() - 1);
        const double k = std::ceil(demand_mw / resolution_) - 1.0;
        if (k >= top) return static_cast<std::int64_t>(top);
        auto ki = static_cast<std::int64_t>(k);
        // guard against division rounding at exact grid points
        while (ki >= 0 && capacity_at(static_cast<std::size_t>(ki)) >= demand_mw) --ki;
        while (ki + 1 <= static_cast<std::int64_t>(top) && capacity_at(static_cast<std::size_t>(ki + 1)) < demand_mw)
            ++ki;
        return ki;
    }

    void build_tables() {
        double total = 0.0;
        for (double p : probs_) {
            if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("capacity probabilities must be finite and >= 0");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw ValidationError("capacity probabilities must sum to 1 (got " + text::format(total) + ")");
        cdf_.resize(probs_.size());
        shortfall_at_level_.resize(probs_.size());
        double acc = 0.0;
        for (std::size_t k = 0; k < probs_.size(); ++k) {
            acc += probs_[k];
            cdf_[k] = acc;
        }
        // E[(k*res - X)^+] built by forward increments, all terms >= 0.
        shortfall_at_level_[0] = 0.0;
        for (std::size_t k = 1; k < probs_.size(); ++k)
            shortfall_at_level_[k] = shortfall_at_level_[k - 1] + resolution_ * cdf_[k - 1];
    }

    double resolution_;
    std::vector<double> probs_;
    std::vector<double> cdf_;
    std::vector<double> shortfall_at_level_;
};

/// Unit capacity expressed in grid steps, rounded half-up.
inline std::size_t grid_steps(double capacity_mw, double resolution_mw) {
    return static_cast<std::size_t>(std::floor(capacity_mw / resolution_mw + 0.5));
}

/// Exact distribution of sum_i B_i c_i with independent B_i ~ Bernoulli(p_i).
inline CapacityDistribution build_capacity_distribution(const Fleet& fleet, double resolution_mw = 1.0) {
    if (!(resolution_mw > 0.0) || !std::isfinite(resolution_mw))
        throw ValidationError("resolution_mw must be finite and > 0");
    validate(fleet);
    std::size_t total_steps = 0;
    for (const auto& u : fleet.units) total_steps += grid_steps(u.capacity_mw, resolution_mw);

    std::vector<double> probs(total_steps + 1, 0.0);
    probs[0] = 1.0;
    std::size_t top = 0;
    for (const auto& u : fleet.units) {
        const std::size_t c = grid_steps(u.capacity_mw, resolution_mw);
        const double p = u.availability;
        const double q = 1.0 - p;
        // in-place, descending so each source level is read before overwrite
        for (std::size_t k = top + c + 1; k-- > 0;) {
            const double down = k <= top ? probs[k] * q : 0.0;
            const double up = (k >= c && k - c <= top) ? probs[k - c] * p : 0.0;
            probs[k] = down + up;
        }
        top += c;
    }
    return CapacityDistribution(resolution_mw, std::move(probs));
}

struct TransitionRates {
    double failure_per_hour = 0.0;
    double repair_per_hour = 0.0;
};

/// Rates of the two-state up/down chain whose stationary up-probability is
/// the unit's availability.
inline TransitionRates unit_transition_rates(const GeneratingUnit& unit) {
    validate(unit);
    TransitionRates r;
    r.repair_per_hour = 1.0 / unit.mttr_hours;
    r.failure_per_hour = unit.availability >= 1.0 ? 0.0 : r.repair_per_hour * (1.0 - unit.availability) / unit.availability;
    return r;
}

namespace detail {

// Sojourn length (hours) of a state whose per-hour exit probability is q:
// geometric on {1, 2, ...}. Sampling whole sojourns by inversion gives the
// same law as stepping the hourly chain.
inline std::uint64_t sojourn_hours(double q, Engine& eng) {
    constexpr auto forever = std::numeric_limits<std::uint64_t>::max();
    if (q <= 0.0) return forever;
    if (q >= 1.0) return 1;
    const double u = uniform_open0(eng);
    const double extra = std::floor(std::log(u) / std::log1p(-q));
    if (!(extra < 9.0e18)) return forever;
    return 1 + static_cast<std::uint64_t>(extra);
}

inline std::pair<double, double> hourly_transition_probabilities(const GeneratingUnit& unit) {
    const auto rates = unit_transition_rates(unit);
    if (rates.repair_per_hour > 1.0)
        throw ValidationError("unit '" + unit.id + "': repair probability per hour exceeds 1 (mttr_hours < 1)");
    if (rates.failure_per_hour > 1.0)
        throw ValidationError("unit '" + unit.id + "': failure probability per hour exceeds 1");
    return {rates.failure_per_hour, rates.repair_per_hour};
}

/// Calls on_down(begin, end) for every maximal run of down hours in
/// [0, n_hours) of the unit's hourly chain driven by `seed`.
template <typename OnDown>
void for_each_outage(const GeneratingUnit& unit, std::size_t n_hours, std::uint64_t seed, OnDown&& on_down) {
    const auto [fail_p, repair_p] = hourly_transition_probabilities(unit);
    Engine eng(seed);
    bool up = uniform01(eng) < unit.availability;
    std::uint64_t t = 0;
    const auto n = static_cast<std::uint64_t>(n_hours);
    while (t < n) {
        const std::uint64_t len = sojourn_hours(up ? fail_p : repair_p, eng);
        const std::uint64_t end = len >= n - t ? n : t + len;
        if (!up) on_down(static_cast<std::size_t>(t), static_cast<std::size_t>(end));
        t = end;
        up = !up;
    }
}

}  // namespace detail

/// Hourly availability (1 = up) of one unit; initial state drawn from the
/// stationary distribution.
inline std::vector<std::uint8_t> simulate_unit_trajectory(const GeneratingUnit& unit, std::size_t n_hours,
                                                          std::uint64_t seed) {
    if (n_hours < 1) throw ValidationError("n_hours must be >= 1");
    std::vector<std::uint8_t> up(n_hours, 1);
    detail::for_each_outage(unit, n_hours, seed, [&](std::size_t b, std::size_t e) {
        std::fill(up.begin() + static_cast<std::ptrdiff_t>(b), up.begin() + static_cast<std::ptrdiff_t>(e), 0);
    });
    return up;
}

/// Sub-seed of unit `unit_index` within a fleet simulation seeded by `seed`.
constexpr std::uint64_t unit_seed(std::uint64_t seed, std::size_t unit_index) noexcept {
    return derive_seed(seed, static_cast<std::uint64_t>(unit_index));
}

/// Writes the hourly available fleet capacity into `out` (size = hours).
/// Unit i uses the stream unit_seed(seed, i).
inline void simulate_fleet_capacity_into(const Fleet& fleet, std::uint64_t seed, std::span<double> out,
                                         std::vector<double>& scratch) {
    const std::size_t n = out.size();
    scratch.assign(n + 1, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < fleet.units.size(); ++i) {
        const auto& u = fleet.units[i];
        total += u.capacity_mw;
        detail::for_each_outage(u, n, unit_seed(seed, i), [&](std::size_t b, std::size_t e) {
            scratch[b] -= u.capacity_mw;
            scratch[e] += u.capacity_mw;
        });
    }
    double delta = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        delta += scratch[t];
        out[t] = total + delta;
    }
}

inline std::vector<double> simulate_fleet_capacity(const Fleet& fleet, std::size_t n_hours, std::uint64_t seed) {
    if (n_hours < 1) throw ValidationError("n_hours must be >= 1");
    validate(fleet);
    std::vector<double> out(n_hours);
    std::vector<double> scratch;
    simulate_fleet_capacity_into(fleet, seed, out, scratch);
    return out;
}

// ---- fleet file: unit_id,capacity_mw,availability,mttr_hours ----

inline Fleet parse_fleet(const text::CsvTable& t) {
    const int c_id = t.require_column("unit_id");
    const int c_cap = t.require_column("capacity_mw");
    const int c_av = t.require_column("availability");
    const int c_mttr = t.require_column("mttr_hours");
    Fleet fleet;
    std::set<std::string> ids;
    for (const auto& row : t.rows) {
        GeneratingUnit u;
        u.id = row.fields[static_cast<std::size_t>(c_id)];
        u.capacity_mw = t.number(row, c_cap);
        u.availability = t.number(row, c_av);
        u.mttr_hours = t.number(row, c_mttr);
        if (u.id.empty()) t.fail(row, "empty unit_id");
        try {
            validate(u);
        } catch (const ValidationError& e) {
            t.fail(row, e.what());
        }
        if (!ids.insert(u.id).second) t.fail(row, "duplicate unit id '" + u.id + "'");
        fleet.units.push_back(std::move(u));
    }
    return fleet;
}

inline Fleet load_fleet(const std::string& path) { return parse_fleet(text::read_csv(path)); }

inline void write_fleet(std::ostream& out, const Fleet& fleet) {
    out << "unit_id,capacity_mw,availability,mttr_hours\n";
    for (const auto& u : fleet.units)
        out << u.id << ',' << text::format(u.capacity_mw) << ',' << text::format(u.availability) << ','
            << text::format(u.mttr_hours) << '\n';
}

}  // namespace adequacy
