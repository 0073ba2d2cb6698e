#pragma once

// Independent reference computations used only by the tests. Nothing here
// goes through the convolution or the cumulative tables of the library.

#include <adequacy/fleet.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <vector>

namespace oracle {

struct FleetState {
    double probability;
    double capacity_mw;  // sum of rounded capacities of units that are up
};

/// All 2^n up/down states of the fleet, capacities rounded half-up to the grid.
inline std::vector<FleetState> enumerate_states(const adequacy::Fleet& fleet, double resolution_mw = 1.0) {
    const std::size_t n = fleet.units.size();
    std::vector<FleetState> out;
    out.reserve(std::size_t{1} << n);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        double p = 1.0;
        double cap = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& u = fleet.units[i];
            if (mask & (std::uint64_t{1} << i)) {
                p *= u.availability;
                cap += std::floor(u.capacity_mw / resolution_mw + 0.5) * resolution_mw;
            } else {
                p *= 1.0 - u.availability;
            }
        }
        out.push_back({p, cap});
    }
    return out;
}

/// Capacity level (grid steps) -> probability, by enumeration.
inline std::map<long, double> brute_force_distribution(const adequacy::Fleet& fleet, double resolution_mw = 1.0) {
    std::map<long, double> dist;
    for (const auto& s : enumerate_states(fleet, resolution_mw))
        dist[std::lround(s.capacity_mw / resolution_mw)] += s.probability;
    return dist;
}

/// E[sum_t I(X < d_t)] and E[sum_t max(0, d_t - X)] over all fleet states.
struct HindcastExpectation {
    double lole = 0.0;
    double eeu = 0.0;
};

inline HindcastExpectation brute_force_hindcast(const adequacy::Fleet& fleet, std::span<const double> net_demand,
                                                double resolution_mw = 1.0) {
    HindcastExpectation h;
    const auto states = enumerate_states(fleet, resolution_mw);
    for (double d : net_demand) {
        for (const auto& s : states) {
            if (s.capacity_mw < d) {
                h.lole += s.probability;
                h.eeu += s.probability * (d - s.capacity_mw);
            }
        }
    }
    return h;
}

inline adequacy::Fleet random_fleet(std::mt19937_64& rng, std::size_t n_units, double max_capacity = 500.0) {
    std::uniform_real_distribution<double> cap(10.0, max_capacity);
    std::uniform_real_distribution<double> avail(0.6, 1.0);
    std::uniform_real_distribution<double> mttr(1.0, 100.0);
    adequacy::Fleet f;
    for (std::size_t i = 0; i < n_units; ++i)
        f.units.push_back({"U" + std::to_string(i), std::round(cap(rng)), avail(rng), mttr(rng)});
    return f;
}

/// Batch-means estimate of the mean of a correlated series and its
/// standard error.
struct BatchMeans {
    double mean = 0.0;
    double standard_error = 0.0;
};

template <typename T>
BatchMeans batch_means(std::span<const T> series, std::size_t n_batches = 100) {
    const std::size_t len = series.size() / n_batches;
    std::vector<double> means(n_batches, 0.0);
    for (std::size_t b = 0; b < n_batches; ++b) {
        double s = 0.0;
        for (std::size_t t = b * len; t < (b + 1) * len; ++t) s += static_cast<double>(series[t]);
        means[b] = s / static_cast<double>(len);
    }
    BatchMeans bm;
    for (double m : means) bm.mean += m;
    bm.mean /= static_cast<double>(n_batches);
    double ss = 0.0;
    for (double m : means) ss += (m - bm.mean) * (m - bm.mean);
    bm.standard_error = std::sqrt(ss / static_cast<double>(n_batches - 1) / static_cast<double>(n_batches));
    return bm;
}

}  // namespace oracle
