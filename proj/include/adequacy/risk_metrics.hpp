#pragma once

// Weighted empirical distributions with lower-quantile VaR and the
// Rockafellar-Uryasev CVaR estimator.

#include <adequacy/errors.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace adequacy {

class EmpiricalDistribution {
public:
    struct Sample {
        double value;
        double weight;
    };

    /// Equally weighted samples.
    static EmpiricalDistribution equal_weight(std::span<const double> values) {
        std::vector<Sample> s;
        s.reserve(values.size());
        for (double v : values) s.push_back({v, 1.0});
        return EmpiricalDistribution(std::move(s));
    }

    /// Weights must be positive; they are normalized to sum to 1.
    explicit EmpiricalDistribution(std::vector<Sample> samples) : samples_(std::move(samples)) {
        if (samples_.empty()) throw ValidationError("empirical distribution needs at least one sample");
        double total = 0.0;
        for (const auto& s : samples_) {
            if (!std::isfinite(s.value)) throw ValidationError("empirical distribution values must be finite");
            if (!(s.weight > 0.0) || !std::isfinite(s.weight))
                throw ValidationError("empirical distribution weights must be finite and > 0");
            total += s.weight;
        }
        for (auto& s : samples_) s.weight /= total;
        // stable so equal values keep insertion order; makes sums reproducible
        std::stable_sort(samples_.begin(), samples_.end(),
                         [](const Sample& a, const Sample& b) { return a.value < b.value; });
    }

    /// Samples sorted by value.
    std::span<const Sample> samples() const noexcept { return samples_; }
    std::size_t size() const noexcept { return samples_.size(); }
    double min() const noexcept { return samples_.front().value; }
    double max() const noexcept { return samples_.back().value; }

    double mean() const {
        double m = 0.0;
        for (const auto& s : samples_) m += s.weight * s.value;
        return m;
    }

private:
    std::vector<Sample> samples_;
};

namespace detail {
inline void check_alpha(double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw ValidationError("alpha must lie in [0, 1), got " + std::to_string(alpha));
}
}  // namespace detail

/// Lower alpha-quantile: inf{u : P(U <= u) >= alpha}; alpha = 0 gives the
/// minimum sample.
inline double var_alpha(const EmpiricalDistribution& dist, double alpha) {
    detail::check_alpha(alpha);
    const auto s = dist.samples();
    // cumulative weights carry rounding; 1e-12 slack keeps exact
    // fractions such as 2/3 on the intended atom
    double cum = 0.0;
    for (const auto& x : s) {
        cum += x.weight;
        if (cum >= alpha - 1e-12) return x.value;
    }
    return s.back().value;
}

/// CVaR_alpha = u' + E[(U - u')^+] / (1 - alpha) with u' = VaR_alpha.
/// At alpha = 0 it returns mean().
inline double cvar_alpha(const EmpiricalDistribution& dist, double alpha) {
    detail::check_alpha(alpha);
    if (alpha == 0.0) return dist.mean();
    const double u = var_alpha(dist, alpha);
    double excess = 0.0;
    for (const auto& x : dist.samples())
        if (x.value > u) excess += x.weight * (x.value - u);
    return u + excess / (1.0 - alpha);
}

struct CvarPoint {
    double alpha;
    double cvar;
};

inline std::vector<CvarPoint> cvar_curve(const EmpiricalDistribution& dist, std::vector<double> alphas) {
    for (double a : alphas) detail::check_alpha(a);
    std::sort(alphas.begin(), alphas.end());
    std::vector<CvarPoint> out;
    out.reserve(alphas.size());
    for (double a : alphas) out.push_back({a, cvar_alpha(dist, a)});
    return out;
}

struct DistributionSummary {
    double mean = 0.0;
    double stddev = 0.0;
    double min = 0.0;
    double max = 0.0;
    double q50 = 0.0;
    double q90 = 0.0;
    double q95 = 0.0;
    double q99 = 0.0;
};

inline DistributionSummary summary(const EmpiricalDistribution& dist) {
    DistributionSummary s;
    s.mean = dist.mean();
    double var = 0.0;
    for (const auto& x : dist.samples()) var += x.weight * (x.value - s.mean) * (x.value - s.mean);
    s.stddev = std::sqrt(var);
    s.min = dist.min();
    s.max = dist.max();
    s.q50 = var_alpha(dist, 0.5);
    s.q90 = var_alpha(dist, 0.9);
    s.q95 = var_alpha(dist, 0.95);
    s.q99 = var_alpha(dist, 0.99);
    return s;
}

/// Histogram with fixed bin edges; counts are sample counts (not weights).
/// Bin i covers [edges[i], edges[i+1]), the last bin is closed.
struct Histogram {
    std::vector<double> bin_edges;
    std::vector<std::size_t> counts;

    std::size_t total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }
};

/// Integer-valued outcomes get unit-width bins centred on each integer;
/// continuous outcomes get `continuous_bins` equal-width bins from the
/// minimum to the maximum.
inline Histogram make_histogram(const EmpiricalDistribution& dist, bool integer_valued,
                                std::size_t continuous_bins = 40) {
    Histogram h;
    const double lo = dist.min();
    const double hi = dist.max();
    if (integer_valued) {
        const double first = std::floor(lo);
        const double last = std::ceil(hi);
        for (double e = first - 0.5; e <= last + 0.5; e += 1.0) h.bin_edges.push_back(e);
    } else if (hi > lo) {
        const std::size_t nb = std::max<std::size_t>(continuous_bins, 1);
        for (std::size_t i = 0; i <= nb; ++i)
            h.bin_edges.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(nb));
    } else {
        h.bin_edges = {lo - 0.5, lo + 0.5};
    }
    const std::size_t nbins = h.bin_edges.size() - 1;
    h.counts.assign(nbins, 0);
    for (const auto& x : dist.samples()) {
        auto it = std::upper_bound(h.bin_edges.begin(), h.bin_edges.end(), x.value);
        auto idx = static_cast<std::size_t>(std::distance(h.bin_edges.begin(), it));
        idx = idx == 0 ? 0 : std::min(idx - 1, nbins - 1);
        ++h.counts[idx];
    }
    return h;
}

}  // namespace adequacy
