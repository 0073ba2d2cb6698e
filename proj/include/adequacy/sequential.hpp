#pragma once

// Time-sequential Monte Carlo over hindcast weather years. Each replication
// pairs one historic year's net demand with a simulated trajectory of the
// conventional fleet and records the per-period outcomes.

#include <adequacy/errors.hpp>
#include <adequacy/fleet.hpp>
#include <adequacy/risk_metrics.hpp>
#include <adequacy/seeding.hpp>
#include <adequacy/text.hpp>
#include <adequacy/weather.hpp>

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace adequacy {

inline constexpr std::size_t hours_per_day = 24;

struct ReplicationOutcome {
    std::string weather_year;
    std::int64_t lold_hours = 0;
    double eu_mwh = 0.0;
    std::int64_t shortfall_days = 0;
    std::vector<double> eu_per_shortfall_day;  ///< MWh, in day order
    std::vector<std::int64_t> shortfall_day_index;  ///< 0-based day block of each entry above
};

struct SimulationOutcome {
    std::vector<ReplicationOutcome> replications;
    std::uint64_t seed = 0;
    std::size_t n_replications() const noexcept { return replications.size(); }
};

/// Seed of replication `r` under run seed `seed`; unit i of that
/// replication then uses unit_seed(replication_seed(seed, r), i).
constexpr std::uint64_t replication_seed(std::uint64_t seed, std::size_t replication) noexcept {
    return derive_seed(seed, 0x5E9u, static_cast<std::uint64_t>(replication));
}

/// Outcome of one period given available capacity and net demand. Days are
/// consecutive 24-hour blocks from hour 0; a trailing partial block counts
/// as a day.
inline ReplicationOutcome evaluate_period(std::span<const double> capacity_mw, std::span<const double> net_demand_mw) {
    if (capacity_mw.size() != net_demand_mw.size())
        throw ValidationError("capacity and net demand series lengths differ");
    ReplicationOutcome out;
    double day_eu = 0.0;
    bool day_short = false;
    for (std::size_t t = 0; t < capacity_mw.size(); ++t) {
        const double surplus = capacity_mw[t] - net_demand_mw[t];
        if (surplus < 0.0) {
            ++out.lold_hours;
            out.eu_mwh += -surplus;
            day_eu += -surplus;
            day_short = true;
        }
        if ((t + 1) % hours_per_day == 0 || t + 1 == capacity_mw.size()) {
            if (day_short) {
                ++out.shortfall_days;
                out.eu_per_shortfall_day.push_back(day_eu);
                out.shortfall_day_index.push_back(static_cast<std::int64_t>(t / hours_per_day));
            }
            day_eu = 0.0;
            day_short = false;
        }
    }
    return out;
}

/// Runs replications [0, n_replications). Replication r uses weather year
/// r mod n_years. Results do not depend on `threads`.
inline SimulationOutcome simulate(const Fleet& fleet, const WeatherDataset& dataset, const ScenarioConfig& scenario,
                                  std::size_t n_replications, std::uint64_t seed, unsigned threads = 1) {
    if (n_replications < 1) throw ValidationError("n_replications must be >= 1");
    validate(fleet);
    validate(scenario, dataset);
    for (const auto& u : fleet.units) (void)detail::hourly_transition_probabilities(u);

    std::vector<std::vector<double>> net;
    net.reserve(dataset.years.size());
    for (const auto& y : dataset.years) net.push_back(net_demand(y, scenario));

    SimulationOutcome out;
    out.seed = seed;
    out.replications.resize(n_replications);

    const auto run_range = [&](std::size_t begin, std::size_t end) {
        std::vector<double> capacity;
        std::vector<double> scratch;
        for (std::size_t r = begin; r < end; ++r) {
            const std::size_t yi = r % dataset.years.size();
            capacity.resize(net[yi].size());
            simulate_fleet_capacity_into(fleet, replication_seed(seed, r), capacity, scratch);
            auto rep = evaluate_period(capacity, net[yi]);
            rep.weather_year = dataset.years[yi].label;
            out.replications[r] = std::move(rep);
        }
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_replications)));
    if (workers == 1) {
        run_range(0, n_replications);
        return out;
    }
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const std::size_t chunk = (n_replications + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t b = w * chunk;
        const std::size_t e = std::min(n_replications, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&, b, e] {
            try {
                run_range(b, e);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

// ---- outcome distributions ----

enum class OutcomeMetric { lold, eu, shortfall_days, eu_within_day };

inline const char* metric_name(OutcomeMetric m) {
    switch (m) {
        case OutcomeMetric::lold: return "lold";
        case OutcomeMetric::eu: return "eu";
        case OutcomeMetric::shortfall_days: return "shortfall_days";
        case OutcomeMetric::eu_within_day: return "eu_within_day";
    }
    return "";
}

inline const char* metric_unit(OutcomeMetric m) {
    switch (m) {
        case OutcomeMetric::lold: return "hours";
        case OutcomeMetric::shortfall_days: return "days";
        case OutcomeMetric::eu:
        case OutcomeMetric::eu_within_day: return "mwh";
    }
    return "";
}

inline OutcomeMetric parse_metric(const std::string& name) {
    for (auto m : {OutcomeMetric::lold, OutcomeMetric::eu, OutcomeMetric::shortfall_days, OutcomeMetric::eu_within_day})
        if (name == metric_name(m)) return m;
    throw ValidationError("unknown metric '" + name + "' (expected lold, eu, shortfall_days or eu_within_day)");
}

inline bool metric_is_integer(OutcomeMetric m) {
    return m == OutcomeMetric::lold || m == OutcomeMetric::shortfall_days;
}

namespace detail {
inline void require_nonempty(const SimulationOutcome& o) {
    if (o.replications.empty()) throw ValidationError("simulation outcome has no replications");
}
}  // namespace detail

inline EmpiricalDistribution lold_distribution(const SimulationOutcome& o) {
    detail::require_nonempty(o);
    std::vector<double> v;
    for (const auto& r : o.replications) v.push_back(static_cast<double>(r.lold_hours));
    return EmpiricalDistribution::equal_weight(v);
}

inline EmpiricalDistribution eu_distribution(const SimulationOutcome& o) {
    detail::require_nonempty(o);
    std::vector<double> v;
    for (const auto& r : o.replications) v.push_back(r.eu_mwh);
    return EmpiricalDistribution::equal_weight(v);
}

inline EmpiricalDistribution shortfall_days_distribution(const SimulationOutcome& o) {
    detail::require_nonempty(o);
    std::vector<double> v;
    for (const auto& r : o.replications) v.push_back(static_cast<double>(r.shortfall_days));
    return EmpiricalDistribution::equal_weight(v);
}

/// Pools every shortfall day from every replication, one sample per day.
inline EmpiricalDistribution eu_within_day_distribution(const SimulationOutcome& o) {
    detail::require_nonempty(o);
    std::vector<double> v;
    for (const auto& r : o.replications) v.insert(v.end(), r.eu_per_shortfall_day.begin(), r.eu_per_shortfall_day.end());
    if (v.empty()) throw ComputationError("no shortfall days in any replication; EU-within-day distribution is empty");
    return EmpiricalDistribution::equal_weight(v);
}

inline EmpiricalDistribution outcome_distribution(const SimulationOutcome& o, OutcomeMetric m) {
    switch (m) {
        case OutcomeMetric::lold: return lold_distribution(o);
        case OutcomeMetric::eu: return eu_distribution(o);
        case OutcomeMetric::shortfall_days: return shortfall_days_distribution(o);
        case OutcomeMetric::eu_within_day: return eu_within_day_distribution(o);
    }
    throw ValidationError("unknown metric");
}

struct MeanWithError {
    double mean = 0.0;
    double standard_error = 0.0;
};

/// Sample mean and its standard error (sample variance / n).
inline MeanWithError mean_with_error(std::span<const double> v) {
    MeanWithError m;
    if (v.empty()) return m;
    for (double x : v) m.mean += x;
    m.mean /= static_cast<double>(v.size());
    if (v.size() < 2) return m;
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.standard_error = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    return m;
}

// ---- CSV export ----
// replications: replication,weather_year,lold_hours,eu_mwh,shortfall_days
// days:         replication,day_index,eu_mwh   (day_index = 0-based 24-hour block)

inline void write_replications_csv(std::ostream& out, const SimulationOutcome& o) {
    out << "replication,weather_year,lold_hours,eu_mwh,shortfall_days\n";
    for (std::size_t r = 0; r < o.replications.size(); ++r) {
        const auto& rep = o.replications[r];
        out << r << ',' << rep.weather_year << ',' << rep.lold_hours << ',' << text::format(rep.eu_mwh) << ','
            << rep.shortfall_days << '\n';
    }
}

inline void write_shortfall_days_csv(std::ostream& out, const SimulationOutcome& o) {
    out << "replication,day_index,eu_mwh\n";
    for (std::size_t r = 0; r < o.replications.size(); ++r) {
        const auto& rep = o.replications[r];
        for (std::size_t d = 0; d < rep.eu_per_shortfall_day.size(); ++d)
            out << r << ',' << rep.shortfall_day_index[d] << ',' << text::format(rep.eu_per_shortfall_day[d]) << '\n';
    }
}

}  // namespace adequacy
