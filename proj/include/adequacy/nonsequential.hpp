#pragma once

// Hindcast expected-value risk indices from the time-collapsed capacity
// distribution: LOLP/EPU per hour, LOLE/EEU per year and across years.

#include <adequacy/errors.hpp>
#include <adequacy/fleet.hpp>
#include <adequacy/weather.hpp>

#include <json.hpp>

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace adequacy {

/// P(X < net demand); capacity equal to net demand is not a shortfall.
inline double lolp(const CapacityDistribution& capdist, double net_demand_mw) {
    return capdist.prob_below(net_demand_mw);
}

/// E[max(0, net demand - X)] in MW.
inline double epu(const CapacityDistribution& capdist, double net_demand_mw) {
    return capdist.expected_shortfall(net_demand_mw);
}

/// Expected shortfall hours over one year of hourly net demand.
inline double lole_year(const CapacityDistribution& capdist, std::span<const double> net_demand_mw,
                        double shift_mw = 0.0) {
    if (net_demand_mw.empty()) throw ValidationError("net demand series is empty");
    double sum = 0.0;
    for (double d : net_demand_mw) sum += capdist.prob_below(d - shift_mw);
    return sum;
}

/// Expected unserved energy (MWh) over one year; one-hour steps.
inline double eeu_year(const CapacityDistribution& capdist, std::span<const double> net_demand_mw,
                       double shift_mw = 0.0) {
    if (net_demand_mw.empty()) throw ValidationError("net demand series is empty");
    double sum = 0.0;
    for (double d : net_demand_mw) sum += capdist.expected_shortfall(d - shift_mw);
    return sum;
}

struct YearRisk {
    std::string year;
    double lole_hours = 0.0;
    double eeu_mwh = 0.0;
};

struct RiskIndices {
    double lole_hours = 0.0;  ///< per period, mean over years
    double eeu_mwh = 0.0;
    std::vector<YearRisk> per_year;  ///< dataset order
};

/// Capacity distribution plus each year's net demand at the scenario's own
/// shift. Evaluating at an extra shift r only re-reads the tables, which is
/// what calibration and procurement bisect over.
class RiskCurve {
public:
    RiskCurve(const Fleet& fleet, const WeatherDataset& dataset, const ScenarioConfig& scenario,
              double resolution_mw = 1.0)
        : capdist_(build_capacity_distribution(fleet, resolution_mw)), fleet_capacity_mw_(fleet.total_capacity_mw()) {
        validate(scenario, dataset);
        for (const auto& y : dataset.years) {
            labels_.push_back(y.label);
            net_.push_back(net_demand(y, scenario));
        }
    }

    const CapacityDistribution& capacity_distribution() const noexcept { return capdist_; }
    double fleet_capacity_mw() const noexcept { return fleet_capacity_mw_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::vector<std::vector<double>>& net_demand_mw() const noexcept { return net_; }
    std::size_t n_years() const noexcept { return net_.size(); }

    RiskIndices indices(double extra_shift_mw = 0.0) const {
        RiskIndices out;
        for (std::size_t i = 0; i < net_.size(); ++i) {
            YearRisk yr{labels_[i], lole_year(capdist_, net_[i], extra_shift_mw),
                        eeu_year(capdist_, net_[i], extra_shift_mw)};
            out.lole_hours += yr.lole_hours;
            out.eeu_mwh += yr.eeu_mwh;
            out.per_year.push_back(std::move(yr));
        }
        const auto n = static_cast<double>(net_.size());
        out.lole_hours /= n;
        out.eeu_mwh /= n;
        return out;
    }

    double lole(double extra_shift_mw = 0.0) const {
        double s = 0.0;
        for (const auto& y : net_) s += lole_year(capdist_, y, extra_shift_mw);
        return s / static_cast<double>(net_.size());
    }

    double eeu(double extra_shift_mw = 0.0) const {
        double s = 0.0;
        for (const auto& y : net_) s += eeu_year(capdist_, y, extra_shift_mw);
        return s / static_cast<double>(net_.size());
    }

private:
    CapacityDistribution capdist_;
    double fleet_capacity_mw_;
    std::vector<std::string> labels_;
    std::vector<std::vector<double>> net_;
};

inline RiskIndices risk_indices(const Fleet& fleet, const WeatherDataset& dataset, const ScenarioConfig& scenario,
                                double resolution_mw = 1.0) {
    return RiskCurve(fleet, dataset, scenario, resolution_mw).indices();
}

/// Share of total EEU contributed by each year, keyed by label.
inline std::map<std::string, double> year_contributions(const RiskIndices& indices) {
    double total = 0.0;
    for (const auto& y : indices.per_year) total += y.eeu_mwh;
    if (!(total > 0.0)) throw ComputationError("total EEU is zero; no contributions to attribute");
    std::map<std::string, double> out;
    for (const auto& y : indices.per_year) out[y.year] = y.eeu_mwh / total;
    return out;
}

inline RiskIndices leave_one_out_indices(const Fleet& fleet, const WeatherDataset& dataset,
                                         const ScenarioConfig& scenario, const std::string& excluded_year,
                                         double resolution_mw = 1.0) {
    return risk_indices(fleet, without_year(dataset, excluded_year), scenario, resolution_mw);
}

inline nlohmann::json to_json(const RiskIndices& r) {
    nlohmann::json per_year = nlohmann::json::array();
    for (const auto& y : r.per_year)
        per_year.push_back({{"year", y.year}, {"lole_hours", y.lole_hours}, {"eeu_mwh", y.eeu_mwh}});
    return {{"aggregate", {{"lole_hours", r.lole_hours}, {"eeu_mwh", r.eeu_mwh}}}, {"per_year", per_year}};
}

inline RiskIndices risk_indices_from_json(const nlohmann::json& j) {
    RiskIndices r;
    r.lole_hours = j.at("aggregate").at("lole_hours").get<double>();
    r.eeu_mwh = j.at("aggregate").at("eeu_mwh").get<double>();
    for (const auto& y : j.at("per_year"))
        r.per_year.push_back({y.at("year").get<std::string>(), y.at("lole_hours").get<double>(),
                              y.at("eeu_mwh").get<double>()});
    return r;
}

}  // namespace adequacy
