#pragma once

// Small reference systems shared by the unit and acceptance suites.

#include <adequacy/fleet.hpp>
#include <adequacy/synthetic.hpp>
#include <adequacy/weather.hpp>

namespace testsys {

/// Five units, about 500 MW, paired with two synthetic two-week years
/// scaled so that shortfalls are frequent enough for Monte Carlo checks.
struct SmallSystem {
    adequacy::Fleet fleet;
    adequacy::WeatherDataset dataset;
    adequacy::ScenarioConfig scenario;
};

inline SmallSystem five_unit_two_year() {
    SmallSystem s;
    s.fleet.units = {
        {"G1", 150.0, 0.90, 30.0}, {"G2", 120.0, 0.85, 20.0}, {"G3", 100.0, 0.92, 40.0},
        {"G4", 80.0, 0.88, 12.0},  {"G5", 60.0, 0.95, 8.0},
    };
    s.dataset = adequacy::generate_synthetic_dataset(31, 2, 24 * 14, true);
    s.scenario.target_acs_peak_mw = 470.0;
    s.scenario.wind_total_gw = 0.08;
    s.scenario.onshore_fraction = 0.5;
    s.scenario.season_hours = 24 * 14;
    return s;
}

}  // namespace testsys
