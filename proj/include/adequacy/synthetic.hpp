#pragma once

// Synthetic winter-season demand and wind data, plus a demo conventional
// fleet. The generator is a deterministic function of its options; every
// year draws from its own seed streams, so changing n_years does not alter
// the years already generated.

#include <adequacy/fleet.hpp>
#include <adequacy/seeding.hpp>
#include <adequacy/weather.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>

namespace adequacy {

struct SyntheticOptions {
    std::uint64_t seed = 1;
    std::size_t n_years = 12;
    std::size_t hours_per_year = 3624;  ///< Nov-Mar, 151 days
    /// Make the first year a mild winter containing a multi-day calm spell at
    /// high demand.
    bool outlier_year = true;
    int first_year = 2005;
    double nominal_acs_mw = 50000.0;
};

/// Hours of the calm high-demand episode in the outlier year.
struct EpisodeWindow {
    std::size_t begin_hour = 0;
    std::size_t end_hour = 0;
};

namespace detail::synth {

enum Stream : std::uint64_t { demand_stream = 1, spell_stream = 2, wind_stream = 3 };

// Relative demand by hour of day: overnight trough, morning ramp, evening peak.
inline constexpr std::array<double, 24> diurnal = {
    0.70, 0.67, 0.65, 0.64, 0.64, 0.66, 0.72, 0.81, 0.87, 0.89, 0.90, 0.90,
    0.89, 0.88, 0.88, 0.90, 0.95, 1.00, 0.99, 0.96, 0.91, 0.85, 0.79, 0.74};

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline EpisodeWindow outlier_episode(std::size_t hours) {
    const std::size_t days = std::max<std::size_t>(hours / 24, 1);
    const std::size_t length_days = std::min<std::size_t>(5, days);
    // centred on the seasonal demand maximum
    std::size_t start_day = days / 2 >= length_days / 2 ? days / 2 - length_days / 2 : 0;
    if (start_day + length_days > days) start_day = days - length_days;
    return {start_day * 24, std::min(hours, (start_day + length_days) * 24)};
}

}  // namespace detail::synth

inline EpisodeWindow outlier_episode_window(const SyntheticOptions& opt) {
    return detail::synth::outlier_episode(opt.hours_per_year);
}

inline WeatherDataset generate_synthetic_dataset(const SyntheticOptions& opt) {
    using namespace detail::synth;
    if (opt.n_years < 1) throw ValidationError("n_years must be >= 1");
    if (opt.hours_per_year < 1) throw ValidationError("hours_per_year must be >= 1");
    if (!(opt.nominal_acs_mw > 0.0)) throw ValidationError("nominal_acs_mw must be > 0");

    const std::size_t n = opt.hours_per_year;
    const std::size_t days = (n + 23) / 24;
    const auto episode = outlier_episode(n);

    WeatherDataset ds;
    for (std::size_t yi = 0; yi < opt.n_years; ++yi) {
        const bool is_outlier = opt.outlier_year && yi == 0;
        Engine demand_rng(derive_seed(opt.seed, yi, demand_stream));
        Engine spell_rng(derive_seed(opt.seed, yi, spell_stream));
        Engine wind_rng(derive_seed(opt.seed, yi, wind_stream));

        // Year severity and cold spells. The outlier winter is mild overall.
        const double severity = is_outlier ? 0.955 : 0.985 + 0.03 * uniform01(spell_rng);
        std::vector<double> spell(days, 0.0);
        const int n_spells = is_outlier ? 0 : 1 + static_cast<int>(uniform01(spell_rng) * 3.0);
        for (int s = 0; s < n_spells; ++s) {
            const auto start = static_cast<std::size_t>(uniform01(spell_rng) * static_cast<double>(days));
            const auto len = 3 + static_cast<std::size_t>(uniform01(spell_rng) * 5.0);
            const double depth = 0.02 + 0.04 * uniform01(spell_rng);
            for (std::size_t d = start; d < std::min(days, start + len); ++d) {
                const double pos = (static_cast<double>(d - start) + 0.5) / static_cast<double>(len);
                spell[d] = std::max(spell[d], depth * std::sin(3.14159265358979 * pos));
            }
        }
        if (is_outlier) {
            // a cold, still high-pressure spell at close to typical peak demand
            for (std::size_t d = episode.begin_hour / 24; d < (episode.end_hour + 23) / 24 && d < days; ++d)
                spell[d] = 0.12;
        }

        // Daily temperature-like anomaly, AR(1).
        std::vector<double> anomaly(days);
        double a = standard_normal(demand_rng);
        for (std::size_t d = 0; d < days; ++d) {
            anomaly[d] = a;
            a = 0.8 * a + 0.6 * standard_normal(demand_rng);
        }

        HistoricYear y;
        y.label = std::to_string(opt.first_year + static_cast<int>(yi));
        y.demand_mw.resize(n);
        y.cf_onshore.resize(n);
        y.cf_offshore.resize(n);
        for (std::size_t t = 0; t < n; ++t) {
            const std::size_t d = t / 24;
            const double season = 0.90 + 0.10 * std::sin(3.14159265358979 * (static_cast<double>(d) + 0.5) /
                                                         static_cast<double>(days));
            const double weekly = (d % 7 == 5 || d % 7 == 6) ? 0.93 : 1.0;
            const double hourly_noise = 1.0 + 0.005 * standard_normal(demand_rng);
            const double level = season * diurnal[t % 24] * weekly * (1.0 + 0.02 * anomaly[d]) * (1.0 + spell[d]);
            y.demand_mw[t] = opt.nominal_acs_mw * severity * level * hourly_noise;
        }

        // Wind: two latent AR(1) processes (~30 h memory) with correlated
        // innovations, mapped through a logistic link. Cold spells pull the
        // link towards calm.
        const double phi = 0.97;
        const double innov = std::sqrt(1.0 - phi * phi);
        double x_on = standard_normal(wind_rng);
        double x_off = 0.8 * x_on + 0.6 * standard_normal(wind_rng);
        for (std::size_t t = 0; t < n; ++t) {
            const double calm = is_outlier ? 0.0 : 0.8 * spell[t / 24] / 0.06;
            double on = logistic(-0.6 - calm + 1.2 * x_on);
            double off = logistic(-0.25 - calm + 1.2 * x_off);
            if (is_outlier && t >= episode.begin_hour && t < episode.end_hour) {
                on = 0.01 + 0.02 * uniform01(wind_rng);
                off = 0.01 + 0.03 * uniform01(wind_rng);
            }
            y.cf_onshore[t] = std::clamp(on, 0.0, 1.0);
            y.cf_offshore[t] = std::clamp(off, 0.0, 1.0);
            const double e1 = standard_normal(wind_rng);
            const double e2 = 0.8 * e1 + 0.6 * standard_normal(wind_rng);
            x_on = phi * x_on + innov * e1;
            x_off = phi * x_off + innov * e2;
        }
        // ACS is the weather-corrected statistic, common to all years; the
        // realized peaks differ from it by the year's severity.
        y.acs_peak_mw = opt.nominal_acs_mw;
        ds.years.push_back(std::move(y));
    }
    return ds;
}

inline WeatherDataset generate_synthetic_dataset(std::uint64_t seed, std::size_t n_years, std::size_t hours_per_year,
                                                 bool outlier_year) {
    SyntheticOptions opt;
    opt.seed = seed;
    opt.n_years = n_years;
    opt.hours_per_year = hours_per_year;
    opt.outlier_year = outlier_year;
    return generate_synthetic_dataset(opt);
}

/// A mixed thermal fleet of about 50 GW with integer MW capacities.
inline Fleet generate_demo_fleet(std::uint64_t seed) {
    struct Tech {
        const char* prefix;
        int count;
        double capacity_mw;
        double availability;
        double mttr_hours;
    };
    static constexpr std::array<Tech, 6> techs = {{
        {"NUC", 8, 1150.0, 0.85, 150.0},
        {"CCGT", 48, 620.0, 0.90, 50.0},
        {"COAL", 8, 500.0, 0.87, 60.0},
        {"BIO", 4, 640.0, 0.88, 60.0},
        {"PSH", 4, 450.0, 0.95, 20.0},
        {"OCGT", 24, 110.0, 0.92, 24.0},
    }};
    Engine rng(derive_seed(seed, 0xF1EE7));
    Fleet fleet;
    for (const auto& tech : techs) {
        for (int i = 0; i < tech.count; ++i) {
            GeneratingUnit u;
            u.id = std::string(tech.prefix) + "_" + std::to_string(i + 1);
            u.capacity_mw = std::round(tech.capacity_mw * (0.9 + 0.2 * uniform01(rng)));
            u.availability = std::round(1000.0 * (tech.availability + 0.02 * (uniform01(rng) - 0.5))) / 1000.0;
            u.mttr_hours = tech.mttr_hours;
            fleet.units.push_back(std::move(u));
        }
    }
    return fleet;
}

}  // namespace adequacy
