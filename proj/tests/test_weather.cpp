#include <adequacy/synthetic.hpp>
#include <adequacy/weather.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

using namespace adequacy;

namespace {

HistoricYear flat_year(double demand, std::size_t hours = 4, double cf_on = 0.0, double cf_off = 0.0) {
    HistoricYear y;
    y.label = "Y";
    y.demand_mw.assign(hours, demand);
    y.cf_onshore.assign(hours, cf_on);
    y.cf_offshore.assign(hours, cf_off);
    y.acs_peak_mw = demand;
    return y;
}

ScenarioConfig scenario_for(const HistoricYear& y, double wind_gw = 0.0, double shift = 0.0) {
    ScenarioConfig s;
    s.target_acs_peak_mw = y.acs_peak_mw;
    s.wind_total_gw = wind_gw;
    s.demand_shift_mw = shift;
    s.season_hours = y.hours();
    return s;
}

WeatherDataset parse(const std::string& demand, const std::string& wind) {
    std::istringstream d(demand), w(wind);
    return parse_dataset(text::parse_csv(d, "demand.csv"), text::parse_csv(w, "wind.csv"));
}

std::string error_of(const std::string& demand, const std::string& wind) {
    try {
        parse(demand, wind);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(RescaleDemand, PureRatio) {
    const auto y = rescale_demand(flat_year(50000.0), 55000.0);
    for (double d : y.demand_mw) EXPECT_DOUBLE_EQ(d, 55000.0);
    EXPECT_EQ(y.acs_peak_mw, 55000.0);
}

TEST(RescaleDemand, OwnAcsIsIdentity) {
    HistoricYear y = flat_year(0.0, 3);
    y.demand_mw = {41234.5, 47000.25, 39999.0};
    y.acs_peak_mw = 48000.0;
    const auto r = rescale_demand(y, 48000.0);
    EXPECT_EQ(r.demand_mw, y.demand_mw);
}

TEST(RescaleDemand, LinearInTargetAndLeavesWindAlone) {
    HistoricYear y = flat_year(0.0, 2, 0.3, 0.4);
    y.demand_mw = {40000.0, 50000.0};
    y.acs_peak_mw = 50000.0;
    const auto r = rescale_demand(y, 25000.0);
    EXPECT_DOUBLE_EQ(r.demand_mw[0], 20000.0);
    EXPECT_DOUBLE_EQ(r.demand_mw[1], 25000.0);
    EXPECT_EQ(r.cf_onshore, y.cf_onshore);
    EXPECT_EQ(r.cf_offshore, y.cf_offshore);

    const auto a = rescale_demand(y, 30000.0);
    const auto b = rescale_demand(y, 60000.0);
    for (std::size_t t = 0; t < 2; ++t) EXPECT_DOUBLE_EQ(2.0 * a.demand_mw[t], b.demand_mw[t]);
    // idempotent at the target
    EXPECT_EQ(rescale_demand(a, 30000.0).demand_mw, a.demand_mw);
}

TEST(RescaleDemand, RejectsNonpositiveTarget) {
    EXPECT_THROW(rescale_demand(flat_year(100.0), 0.0), ValidationError);
    EXPECT_THROW(rescale_demand(flat_year(100.0), -5.0), ValidationError);
}

TEST(WindCapacity, Arithmetic) {
    auto y = flat_year(1000.0, 1, 0.5, 0.0);
    auto s = scenario_for(y, 0.0);
    EXPECT_EQ(wind_available_capacity(y, s)[0], 0.0);

    s.wind_total_gw = 10.0;
    s.onshore_fraction = 1.0;
    EXPECT_DOUBLE_EQ(wind_available_capacity(y, s)[0], 5000.0);

    y = flat_year(1000.0, 1, 0.2, 0.6);
    s.wind_total_gw = 20.0;
    s.onshore_fraction = 0.5;
    EXPECT_DOUBLE_EQ(wind_available_capacity(y, s)[0], 8000.0);
}

TEST(NetDemand, RawDemandWithoutWindOrShift) {
    HistoricYear y = flat_year(0.0, 3);
    y.demand_mw = {100.0, 200.0, 300.0};
    y.acs_peak_mw = 300.0;
    EXPECT_EQ(net_demand(y, scenario_for(y)), y.demand_mw);
}

TEST(NetDemand, ShiftIsAdditive) {
    HistoricYear y = flat_year(0.0, 3, 0.3, 0.5);
    y.demand_mw = {30000.0, 42000.0, 51000.0};
    y.acs_peak_mw = 51000.0;
    auto s0 = scenario_for(y, 12.0, 0.0);
    auto s1 = scenario_for(y, 12.0, 500.0);
    const auto a = net_demand(y, s0);
    const auto b = net_demand(y, s1);
    for (std::size_t t = 0; t < 3; ++t) EXPECT_DOUBLE_EQ(b[t], a[t] - 500.0);
}

TEST(NetDemand, Arithmetic) {
    auto y = flat_year(50000.0, 1, 0.4, 0.4);
    auto s = scenario_for(y, 20.0, 1000.0);  // 20 GW * 0.4 = 8000 MW
    EXPECT_DOUBLE_EQ(net_demand(y, s)[0], 41000.0);
}

TEST(LoadDataset, TwoWellFormedYears) {
    const auto ds = parse("year,hour,demand_mw\n2005,0,100\n2005,1,120\n2006,0,90\n2006,1,95\n",
                          "year,hour,cf_onshore,cf_offshore\n2005,0,0.1,0.2\n2005,1,0.3,0.4\n"
                          "2006,0,0.5,0.6\n2006,1,0.7,0.8\n");
    ASSERT_EQ(ds.years.size(), 2u);
    EXPECT_EQ(ds.years[0].label, "2005");
    EXPECT_EQ(ds.years[0].acs_peak_mw, 120.0);  // max demand without an ACS column
    EXPECT_EQ(ds.years[1].cf_offshore[1], 0.8);
}

TEST(LoadDataset, ExplicitAcsColumnWins) {
    const auto ds = parse("year,hour,demand_mw,acs_peak_mw\nA,0,100,150\nA,1,120,150\n",
                          "year,hour,cf_onshore,cf_offshore\nA,0,0.1,0.2\nA,1,0.3,0.4\n");
    EXPECT_EQ(ds.years[0].acs_peak_mw, 150.0);
}

TEST(LoadDataset, CapacityFactorOutOfRangeNamesRow) {
    std::string wind = "year,hour,cf_onshore,cf_offshore\n";
    std::string demand = "year,hour,demand_mw\n";
    for (int h = 0; h < 10; ++h) {
        demand += "2005," + std::to_string(h) + ",100\n";
        wind += "2005," + std::to_string(h) + (h == 6 ? ",1.2,0.3\n" : ",0.2,0.3\n");
    }
    const auto err = error_of(demand, wind);
    EXPECT_NE(err.find("row 7"), std::string::npos) << err;
    EXPECT_NE(err.find("cf_onshore"), std::string::npos) << err;
}

TEST(LoadDataset, EmptyFileHasNoYears) {
    EXPECT_NE(error_of("", "year,hour,cf_onshore,cf_offshore\n").find("no years found"), std::string::npos);
    EXPECT_NE(error_of("year,hour,demand_mw\n", "").find("no years found"), std::string::npos);
}

TEST(LoadDataset, LengthMismatchAndMissingHours) {
    const std::string wind1 = "year,hour,cf_onshore,cf_offshore\nA,0,0.1,0.1\n";
    EXPECT_NE(error_of("year,hour,demand_mw\nA,0,1\nA,1,2\n", wind1).find("wind has 1"), std::string::npos);
    const auto gap = error_of("year,hour,demand_mw\nA,0,1\nA,2,2\n", wind1);
    EXPECT_NE(gap.find("row 2"), std::string::npos) << gap;
    EXPECT_NE(gap.find("expected hour 1"), std::string::npos) << gap;
    EXPECT_NE(error_of("year,hour,demand_mw\nA,0,1\n", "year,hour,cf_onshore,cf_offshore\nB,0,0.1,0.1\n")
                  .find("no wind records"),
              std::string::npos);
    EXPECT_NE(error_of("year,hour,demand_mw\nA,0,-1\n", wind1).find("row 1"), std::string::npos);
}

TEST(LoadDataset, WriteThenLoadIsFixedPoint) {
    const auto ds = generate_synthetic_dataset(17, 3, 96, true);
    std::stringstream d, w;
    write_demand(d, ds);
    write_wind(w, ds);
    const auto back = parse_dataset(text::parse_csv(d, "d"), text::parse_csv(w, "w"));
    ASSERT_EQ(back.years.size(), ds.years.size());
    for (std::size_t i = 0; i < ds.years.size(); ++i) {
        EXPECT_EQ(back.years[i].label, ds.years[i].label);
        EXPECT_EQ(back.years[i].demand_mw, ds.years[i].demand_mw);
        EXPECT_EQ(back.years[i].cf_onshore, ds.years[i].cf_onshore);
        EXPECT_EQ(back.years[i].cf_offshore, ds.years[i].cf_offshore);
        EXPECT_EQ(back.years[i].acs_peak_mw, ds.years[i].acs_peak_mw);
    }
    std::stringstream d2, w2;
    write_demand(d2, back);
    write_wind(w2, back);
    EXPECT_EQ(d.str(), d2.str());
    EXPECT_EQ(w.str(), w2.str());
}

TEST(ScenarioValidation, SeasonHoursMustMatch) {
    WeatherDataset ds{{flat_year(100.0, 48)}};
    auto s = scenario_for(ds.years[0]);
    EXPECT_NO_THROW(validate(s, ds));
    s.season_hours = 24;
    EXPECT_THROW(validate(s, ds), ValidationError);
    s = scenario_for(ds.years[0]);
    s.onshore_fraction = 1.5;
    EXPECT_THROW(validate(s, ds), ValidationError);
}

TEST(WithoutYear, RemovesLabelAndRejectsBadExclusions) {
    WeatherDataset ds{{flat_year(1.0), flat_year(2.0)}};
    ds.years[1].label = "Z";
    EXPECT_EQ(without_year(ds, "Y").years.size(), 1u);
    EXPECT_THROW(without_year(ds, "nope"), ValidationError);
    EXPECT_THROW(without_year(WeatherDataset{{flat_year(1.0)}}, "Y"), ValidationError);
}

TEST(SyntheticDataset, SatisfiesInvariants) {
    const auto ds = generate_synthetic_dataset(5, 2, 24 * 30, false);
    ASSERT_EQ(ds.years.size(), 2u);
    EXPECT_NO_THROW(validate(ds));
    EXPECT_NE(ds.years[0].label, ds.years[1].label);
    for (const auto& y : ds.years) EXPECT_EQ(y.hours(), 24u * 30u);
}

TEST(SyntheticDataset, OutlierYearHasCalmHighDemandEpisode) {
    SyntheticOptions opt;
    opt.seed = 3;
    opt.n_years = 4;
    opt.hours_per_year = 24 * 60;
    opt.outlier_year = true;
    const auto ds = generate_synthetic_dataset(opt);
    const auto& y = ds.years[0];
    const double peak = *std::max_element(y.demand_mw.begin(), y.demand_mw.end());
    const auto ep = outlier_episode_window(opt);
    ASSERT_GT(ep.end_hour - ep.begin_hour, 48u);
    bool found = false;
    for (std::size_t t = ep.begin_hour; t < ep.end_hour; ++t) {
        EXPECT_LT(std::max(y.cf_onshore[t], y.cf_offshore[t]), 0.05);
        if (y.demand_mw[t] > 0.9 * peak) found = true;
    }
    EXPECT_TRUE(found);
}

TEST(SyntheticDataset, DeterministicPerSeed) {
    const auto a = generate_synthetic_dataset(8, 3, 200, true);
    const auto b = generate_synthetic_dataset(8, 3, 200, true);
    const auto c = generate_synthetic_dataset(9, 3, 200, true);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(a.years[i].demand_mw, b.years[i].demand_mw);
        EXPECT_EQ(a.years[i].cf_onshore, b.years[i].cf_onshore);
    }
    EXPECT_NE(a.years[1].demand_mw, c.years[1].demand_mw);
    // years are independent streams: fewer years is a prefix
    const auto shorter = generate_synthetic_dataset(8, 2, 200, true);
    EXPECT_EQ(shorter.years[1].cf_offshore, a.years[1].cf_offshore);
}
