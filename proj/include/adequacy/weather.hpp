#pragma once

// Hourly demand and wind capacity-factor records per historic weather
// year, and the scenario transforms that turn them into net demand.

#include <adequacy/errors.hpp>
#include <adequacy/text.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace adequacy {

struct HistoricYear {
    std::string label;
    std::vector<double> demand_mw;
    std::vector<double> cf_onshore;
    std::vector<double> cf_offshore;
    double acs_peak_mw = 0.0;  ///< Average Cold Spell peak statistic for this year

    std::size_t hours() const noexcept { return demand_mw.size(); }
};

inline void validate(const HistoricYear& y) {
    const auto bad = [&](const std::string& what) { throw ValidationError("year '" + y.label + "': " + what); };
    const std::size_t n = y.demand_mw.size();
    if (n < 1) bad("no hours");
    if (y.cf_onshore.size() != n || y.cf_offshore.size() != n) bad("demand and wind series lengths differ");
    for (double d : y.demand_mw)
        if (!std::isfinite(d) || d < 0.0) bad("demand must be finite and >= 0");
    for (const auto* cf : {&y.cf_onshore, &y.cf_offshore})
        for (double v : *cf)
            if (!(v >= 0.0 && v <= 1.0)) bad("capacity factor outside [0, 1]");
    if (!std::isfinite(y.acs_peak_mw) || y.acs_peak_mw <= 0.0) bad("acs_peak_mw must be finite and > 0");
}

struct WeatherDataset {
    std::vector<HistoricYear> years;

    const HistoricYear* find(const std::string& label) const {
        for (const auto& y : years)
            if (y.label == label) return &y;
        return nullptr;
    }

    std::vector<std::string> labels() const {
        std::vector<std::string> out;
        for (const auto& y : years) out.push_back(y.label);
        return out;
    }
};

inline void validate(const WeatherDataset& ds) {
    if (ds.years.empty()) throw ValidationError("dataset has no years");
    std::set<std::string> labels;
    for (const auto& y : ds.years) {
        validate(y);
        if (!labels.insert(y.label).second) throw ValidationError("duplicate year label '" + y.label + "'");
    }
}

/// Dataset without the named year. Throws if the label is absent or is the
/// only year.
inline WeatherDataset without_year(const WeatherDataset& ds, const std::string& label) {
    if (!ds.find(label)) throw ValidationError("year '" + label + "' is not in the dataset");
    if (ds.years.size() < 2) throw ValidationError("cannot exclude the only year '" + label + "'");
    WeatherDataset out;
    for (const auto& y : ds.years)
        if (y.label != label) out.years.push_back(y);
    return out;
}

struct ScenarioConfig {
    double target_acs_peak_mw = 0.0;
    double wind_total_gw = 0.0;
    double onshore_fraction = 0.35;
    /// Additive supply-demand shift r (MW); positive means extra capacity.
    double demand_shift_mw = 0.0;
    std::size_t season_hours = 0;
};

inline void validate(const ScenarioConfig& s) {
    if (!std::isfinite(s.target_acs_peak_mw) || s.target_acs_peak_mw <= 0.0)
        throw ValidationError("target_acs_peak_mw must be finite and > 0");
    if (!std::isfinite(s.wind_total_gw) || s.wind_total_gw < 0.0)
        throw ValidationError("wind_total_gw must be finite and >= 0");
    if (!(s.onshore_fraction >= 0.0 && s.onshore_fraction <= 1.0))
        throw ValidationError("onshore_fraction must lie in [0, 1]");
    if (!std::isfinite(s.demand_shift_mw)) throw ValidationError("demand_shift_mw must be finite");
    if (s.season_hours < 1) throw ValidationError("season_hours must be >= 1");
}

inline void validate(const ScenarioConfig& s, const WeatherDataset& ds) {
    validate(s);
    validate(ds);
    for (const auto& y : ds.years)
        if (y.hours() != s.season_hours)
            throw ValidationError("year '" + y.label + "' has " + std::to_string(y.hours()) +
                                  " hours but season_hours is " + std::to_string(s.season_hours));
}

/// Demand scaled by target / year ACS peak; capacity factors untouched.
inline HistoricYear rescale_demand(const HistoricYear& year, double target_acs_peak_mw) {
    if (!std::isfinite(target_acs_peak_mw) || target_acs_peak_mw <= 0.0)
        throw ValidationError("target ACS peak must be finite and > 0");
    if (!(year.acs_peak_mw > 0.0)) throw ValidationError("year '" + year.label + "' has nonpositive ACS peak");
    HistoricYear out = year;
    if (target_acs_peak_mw != year.acs_peak_mw) {
        const double ratio = target_acs_peak_mw / year.acs_peak_mw;
        for (double& d : out.demand_mw) d *= ratio;
    }
    out.acs_peak_mw = target_acs_peak_mw;
    return out;
}

inline std::vector<double> wind_available_capacity(const HistoricYear& year, const ScenarioConfig& scenario) {
    const double on_mw = 1000.0 * scenario.wind_total_gw * scenario.onshore_fraction;
    const double off_mw = 1000.0 * scenario.wind_total_gw * (1.0 - scenario.onshore_fraction);
    std::vector<double> out(year.hours());
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = on_mw * year.cf_onshore[t] + off_mw * year.cf_offshore[t];
    return out;
}

/// Rescaled demand minus wind minus the procurement shift.
inline std::vector<double> net_demand(const HistoricYear& year, const ScenarioConfig& scenario) {
    const HistoricYear scaled = rescale_demand(year, scenario.target_acs_peak_mw);
    const auto wind = wind_available_capacity(year, scenario);
    std::vector<double> out(year.hours());
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = scaled.demand_mw[t] - wind[t] - scenario.demand_shift_mw;
    return out;
}

// ---- files ----
// demand: year,hour,demand_mw[,acs_peak_mw]
// wind:   year,hour,cf_onshore,cf_offshore

namespace detail {

struct YearColumns {
    std::vector<double> a, b;
    std::optional<double> acs;
    std::size_t first_row = 0;
};

inline std::map<std::string, YearColumns> read_hourly(const text::CsvTable& t, const char* col_a, const char* col_b,
                                                      bool with_acs, bool cf_range) {
    const int c_year = t.require_column("year");
    const int c_hour = t.require_column("hour");
    const int c_a = t.require_column(col_a);
    const int c_b = col_b ? t.require_column(col_b) : -1;
    const int c_acs = with_acs ? t.column("acs_peak_mw") : -1;

    std::map<std::string, YearColumns> out;
    for (const auto& row : t.rows) {
        const std::string& label = row.fields[static_cast<std::size_t>(c_year)];
        if (label.empty()) t.fail(row, "empty year label");
        auto& yc = out[label];
        if (yc.a.empty()) yc.first_row = row.number;
        const auto hour = t.integer(row, c_hour);
        if (hour != static_cast<std::int64_t>(yc.a.size()))
            t.fail(row, "year '" + label + "': expected hour " + std::to_string(yc.a.size()) + ", found " +
                            std::to_string(hour) + " (hours must be contiguous from 0)");
        const double a = t.number(row, c_a);
        const double b = c_b >= 0 ? t.number(row, c_b) : 0.0;
        if (cf_range) {
            if (!(a >= 0.0 && a <= 1.0)) t.fail(row, std::string(col_a) + " outside [0, 1]: " + text::format(a));
            if (!(b >= 0.0 && b <= 1.0)) t.fail(row, std::string(col_b) + " outside [0, 1]: " + text::format(b));
        } else if (a < 0.0) {
            t.fail(row, std::string(col_a) + " must be >= 0");
        }
        yc.a.push_back(a);
        yc.b.push_back(b);
        if (c_acs >= 0 && !row.fields[static_cast<std::size_t>(c_acs)].empty()) {
            const double acs = t.number(row, c_acs);
            if (acs <= 0.0) t.fail(row, "acs_peak_mw must be > 0");
            if (yc.acs && *yc.acs != acs) t.fail(row, "acs_peak_mw differs within year '" + label + "'");
            yc.acs = acs;
        }
    }
    return out;
}

}  // namespace detail

/// Joins demand and wind tables on (year, hour). Year order follows first
/// appearance in the demand table. ACS peak comes from the optional column
/// when present, otherwise the year's maximum demand.
inline WeatherDataset parse_dataset(const text::CsvTable& demand, const text::CsvTable& wind) {
    if (demand.rows.empty()) throw ValidationError(demand.source + ": no years found");
    const auto d = detail::read_hourly(demand, "demand_mw", nullptr, true, false);
    const auto w = detail::read_hourly(wind, "cf_onshore", "cf_offshore", false, true);

    std::vector<std::pair<std::size_t, std::string>> order;
    for (const auto& [label, yc] : d) order.emplace_back(yc.first_row, label);
    std::sort(order.begin(), order.end());

    WeatherDataset ds;
    for (const auto& [_, label] : order) {
        const auto& dy = d.at(label);
        const auto it = w.find(label);
        if (it == w.end()) throw ValidationError(wind.source + ": no wind records for year '" + label + "'");
        if (it->second.a.size() != dy.a.size())
            throw ValidationError("year '" + label + "': demand has " + std::to_string(dy.a.size()) +
                                  " hours but wind has " + std::to_string(it->second.a.size()));
        HistoricYear y;
        y.label = label;
        y.demand_mw = dy.a;
        y.cf_onshore = it->second.a;
        y.cf_offshore = it->second.b;
        y.acs_peak_mw = dy.acs ? *dy.acs : *std::max_element(dy.a.begin(), dy.a.end());
        validate(y);
        ds.years.push_back(std::move(y));
    }
    for (const auto& [label, _] : w)
        if (!d.count(label)) throw ValidationError(demand.source + ": no demand records for year '" + label + "'");
    return ds;
}

inline WeatherDataset load_dataset(const std::string& demand_path, const std::string& wind_path) {
    return parse_dataset(text::read_csv(demand_path), text::read_csv(wind_path));
}

/// Always writes the acs_peak_mw column.
inline void write_demand(std::ostream& out, const WeatherDataset& ds) {
    out << "year,hour,demand_mw,acs_peak_mw\n";
    for (const auto& y : ds.years) {
        const std::string acs = text::format(y.acs_peak_mw);
        for (std::size_t t = 0; t < y.hours(); ++t)
            out << y.label << ',' << t << ',' << text::format(y.demand_mw[t]) << ',' << acs << '\n';
    }
}

inline void write_wind(std::ostream& out, const WeatherDataset& ds) {
    out << "year,hour,cf_onshore,cf_offshore\n";
    for (const auto& y : ds.years)
        for (std::size_t t = 0; t < y.hours(); ++t)
            out << y.label << ',' << t << ',' << text::format(y.cf_onshore[t]) << ','
                << text::format(y.cf_offshore[t]) << '\n';
}

}  // namespace adequacy
