#include "drsim/pipeline.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "drsim/error.hpp"
#include "support/markets.hpp"
#include "support/oracles.hpp"

namespace drsim {
namespace {

using testing::august_scenario;

ScenarioConfig diagonal_config() {
  ScenarioConfig cfg;
  cfg.elasticity_table = ElasticityTable::self_only(-0.10);
  return cfg;
}

ScenarioResult toy_result() {
  ScenarioResult r;
  r.timestamps = {HourStamp{}, HourStamp{} + std::chrono::hours{1}};
  r.baseline_demand = {100, 100};
  r.forecast_price = {50, 10};
  r.baseline_spot_price = {48, 11};
  r.dr_demand = {90, 110};
  r.updated_spot_price = {40, 12};
  r.clamp_flags = {false, false};
  return r;
}

TEST(CustomerBill, Examples) {
  EXPECT_DOUBLE_EQ(customer_bill(std::vector<double>{10, 10}, 30.0), 600.0);
  EXPECT_EQ(customer_bill(std::vector<double>{5, 7, 9}, std::vector<double>{0, 0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(customer_bill(std::vector<double>{1, 2}, std::vector<double>{30, 40}), 110.0);
  EXPECT_THROW(customer_bill(std::vector<double>{1, 2}, std::vector<double>{30}), LengthMismatch);
}

TEST(ImpactSummary, TwoHourToy) {
  const auto s = impact_summary(toy_result(), ScenarioConfig{});
  EXPECT_EQ(s.hours, 2u);
  EXPECT_EQ(s.delta_energy, 0.0);
  EXPECT_EQ(s.delta_energy_pct, 0.0);
  EXPECT_DOUBLE_EQ(s.baseline_cost, 6000.0);
  EXPECT_DOUBLE_EQ(s.dr_cost, 4920.0);
  EXPECT_DOUBLE_EQ(s.delta_cost, -1080.0);
  EXPECT_DOUBLE_EQ(s.delta_cost_pct, -18.0);
  EXPECT_DOUBLE_EQ(s.flat_rate_bill, 6000.0);
  EXPECT_EQ(s.peak_price_before, 50.0);
  EXPECT_EQ(s.peak_price_after, 40.0);
  EXPECT_EQ(s.peak_real_price, 48.0);
}

TEST(ImpactSummary, IdenticalSeriesGiveZeroDeltas) {
  auto r = toy_result();
  r.dr_demand = r.baseline_demand;
  r.updated_spot_price = r.forecast_price;
  const auto s = impact_summary(r, ScenarioConfig{});
  EXPECT_EQ(s.delta_energy, 0.0);
  EXPECT_EQ(s.delta_cost, 0.0);
  EXPECT_EQ(s.delta_cost_pct, 0.0);
}

TEST(ImpactSummary, EmptyResultIsEmptyWindow) {
  EXPECT_THROW(impact_summary(ScenarioResult{}, ScenarioConfig{}), EmptyWindow);
}

TEST(ImpactSummary, JsonRoundTrip) {
  const auto s = impact_summary(toy_result(), ScenarioConfig{});
  const auto back = summary_from_json(summary_to_json(s));
  EXPECT_EQ(back.hours, s.hours);
  EXPECT_EQ(back.delta_cost, s.delta_cost);
  EXPECT_EQ(back.delta_cost_pct, s.delta_cost_pct);
  EXPECT_EQ(back.peak_real_price, s.peak_real_price);
  EXPECT_EQ(back.clamp_count, s.clamp_count);
}

TEST(RunScenario, ZeroTableLeavesDemandAndPricesUnchanged) {
  const auto m = august_scenario(7);
  ScenarioConfig cfg;
  cfg.elasticity_table = ElasticityTable{};
  const auto r = run_scenario(m.history, m.window, cfg);
  ASSERT_EQ(r.hours(), 48u);
  EXPECT_EQ(r.dr_demand, r.baseline_demand);
  EXPECT_EQ(r.updated_spot_price, r.forecast_price);
  const auto s = impact_summary(r, cfg);
  EXPECT_EQ(s.delta_energy, 0.0);
  EXPECT_EQ(s.delta_energy_pct, 0.0);
  EXPECT_EQ(s.delta_cost, 0.0);
  EXPECT_EQ(s.delta_cost_pct, 0.0);
}

TEST(RunScenario, FlatForecastAtFlatRateLeavesDemandUnchanged) {
  auto m = august_scenario(8);
  // Price identical to the flat rate: the fitted model is the constant 30.
  auto hist = m.history.entries();
  for (auto& e : hist) e.record.spot_price = 30.0;
  ScenarioConfig cfg;
  cfg.base_features = FeatureSpec{};
  cfg.feature_candidates = FeatureSpec{};
  const auto r = run_scenario(RecordSeries(hist), m.window, cfg);
  for (std::size_t i = 0; i < r.hours(); ++i) {
    ASSERT_NEAR(r.forecast_price[i], 30.0, 1e-12);
    ASSERT_NEAR(r.dr_demand[i], r.baseline_demand[i], 1e-9 * r.baseline_demand[i]);
  }
}

TEST(RunScenario, SignAndSpikeProperties) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto m = august_scenario(seed);
    const auto cfg = diagonal_config();
    const auto r = run_scenario(m.history, m.window, cfg);
    const double beta = r.model.coefficients[*r.model.spec.index_of(Feature::demand())];
    ASSERT_GT(beta, 0.0);
    bool saw_spike = false;
    for (std::size_t i = 0; i < r.hours(); ++i) {
      if (r.forecast_price[i] > cfg.flat_rate) {
        saw_spike = true;
        EXPECT_LT(r.dr_demand[i], r.baseline_demand[i]);
        EXPECT_LT(r.updated_spot_price[i], r.forecast_price[i]);
      } else if (r.forecast_price[i] < cfg.flat_rate) {
        EXPECT_GT(r.dr_demand[i], r.baseline_demand[i]);
      }
    }
    EXPECT_TRUE(saw_spike);
    EXPECT_LE(*std::max_element(r.updated_spot_price.begin(), r.updated_spot_price.end()),
              *std::max_element(r.forecast_price.begin(), r.forecast_price.end()));
  }
}

TEST(RunScenario, DeterministicAcrossCalls) {
  const auto m = august_scenario(11);
  const ScenarioConfig cfg;
  const auto a = run_scenario(m.history, m.window, cfg);
  const auto b = run_scenario(m.history, m.window, cfg);
  EXPECT_EQ(a.forecast_price, b.forecast_price);
  EXPECT_EQ(a.dr_demand, b.dr_demand);
  EXPECT_EQ(a.updated_spot_price, b.updated_spot_price);
  EXPECT_EQ(a.clamp_flags, b.clamp_flags);
  EXPECT_EQ(a.model.coefficients, b.model.coefficients);
  std::ostringstream oa, ob;
  write_result_csv(oa, a);
  write_result_csv(ob, b);
  EXPECT_EQ(oa.str(), ob.str());
}

TEST(RunScenario, GateRejectsWithStageAndFerms) {
  const auto m = august_scenario(12, 25.0);
  ScenarioConfig cfg;
  cfg.ferms_gate = 0.5;
  try {
    run_scenario(m.history, m.window, cfg);
    FAIL() << "expected ModelRejected";
  } catch (const ModelRejected& e) {
    EXPECT_EQ(e.stage(), "gate");
    EXPECT_GT(e.ferms(), 0.5);
    EXPECT_EQ(e.gate(), 0.5);
  }
}

TEST(RunScenario, InputErrorsCarryStage) {
  const auto m = august_scenario(13);
  const ScenarioConfig cfg;
  try {
    run_scenario(m.window, m.history, cfg);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.stage(), "validate");
  }
  try {
    run_scenario(m.history, m.window.slice(1, 24), cfg);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.stage(), "validate");
  }
  ScenarioConfig long_holdout;
  long_holdout.holdout_days = 28;
  try {
    run_scenario(m.history, m.window, long_holdout);
    FAIL() << "expected InsufficientData";
  } catch (const InsufficientData& e) {
    EXPECT_EQ(e.stage(), "select");
  }
}

TEST(ResultCsv, RoundTripsSeries) {
  const auto m = august_scenario(14);
  const auto r = run_scenario(m.history, m.window, ScenarioConfig{});
  std::stringstream buf;
  write_result_csv(buf, r);
  const auto back = read_result_csv(buf);
  EXPECT_EQ(back.timestamps, r.timestamps);
  EXPECT_EQ(back.baseline_demand, r.baseline_demand);
  EXPECT_EQ(back.forecast_price, r.forecast_price);
  EXPECT_EQ(back.dr_demand, r.dr_demand);
  EXPECT_EQ(back.baseline_spot_price, r.baseline_spot_price);
  EXPECT_EQ(back.updated_spot_price, r.updated_spot_price);
  EXPECT_EQ(back.clamp_flags, r.clamp_flags);

  std::istringstream bad_header("timestamp,demand\n");
  EXPECT_THROW(read_result_csv(bad_header), ParseError);
}

TEST(PlotCsv, HeadersAndRowCounts) {
  const auto r = toy_result();
  std::ostringstream f, d, p;
  write_forecast_plot_csv(f, r);
  write_demand_plot_csv(d, r);
  write_price_plot_csv(p, r);
  EXPECT_EQ(f.str().substr(0, f.str().find('\n')), "timestamp,forecast_price,real_price");
  EXPECT_EQ(d.str().substr(0, d.str().find('\n')), "timestamp,demand_before,demand_after");
  EXPECT_EQ(p.str().substr(0, p.str().find('\n')), "timestamp,price_before,price_after,real_price");
  for (const auto* s : {&f, &d, &p}) {
    const auto text = s->str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  }
  EXPECT_NE(p.str().find(",50,40,48\n"), std::string::npos);
}

TEST(SplitHoldout, TakesTrailingDays) {
  const auto m = august_scenario(15);
  const auto [train, hold] = split_holdout(m.history, 7);
  EXPECT_EQ(train.size(), 21u * 24);
  EXPECT_EQ(hold.size(), 7u * 24);
  EXPECT_EQ(hold[0].record.timestamp, m.history[21 * 24].record.timestamp);
  EXPECT_THROW(split_holdout(m.history, 28), InsufficientData);
}

TEST(Config, DefaultsAndOverrides) {
  const auto d = parse_config("{}");
  EXPECT_EQ(d.flat_rate, 30.0);
  EXPECT_EQ(d.ferms_gate, 15.0);
  EXPECT_EQ(d.holdout_days, 7);
  EXPECT_EQ(d.elasticity_table.values(), ElasticityTable::reference().values());

  const auto c = parse_config(R"({
    "flat_rate": 42.5, "ferms_gate": 12, "holdout_days": 3,
    "elasticity": {"peak_peak": -0.2, "peak_offpeak": 0.01, "peak_low": 0.0,
                   "offpeak_peak": 0.01, "offpeak_offpeak": -0.1, "offpeak_low": 0.0,
                   "low_peak": 0.0, "low_offpeak": 0.0, "low_low": -0.05},
    "periods": {"peak": [13,14,15,16,17,18,19], "offpeak": [9,10,11,12,20,21,22,23,24],
                "low": [1,2,3,4,5,6,7,8]},
    "features": {"base": ["intercept"], "candidates": ["intercept", "demand", "hour3"]},
    "data": {"columns": {"demand": "RT_Demand", "hour": "Hr_End"}, "hour_convention": "ending",
             "gap_mode": "permissive", "holidays": ["2014-07-04"]}
  })");
  EXPECT_EQ(c.flat_rate, 42.5);
  EXPECT_EQ(c.holdout_days, 3);
  EXPECT_EQ(c.elasticity_table(PeriodClass::Peak, PeriodClass::Peak), -0.2);
  EXPECT_EQ(c.elasticity_table(PeriodClass::Low, PeriodClass::Low), -0.05);
  EXPECT_EQ(c.period_config.classify(20), PeriodClass::OffPeak);
  EXPECT_EQ(c.base_features, FeatureSpec{});
  EXPECT_EQ(c.feature_candidates.size(), 3u);
  EXPECT_EQ(c.data.schema.demand, "RT_Demand");
  EXPECT_EQ(c.data.schema.hour, "Hr_End");
  EXPECT_EQ(c.data.convention, HourConvention::Ending);
  EXPECT_EQ(c.data.gap_mode, GapMode::Permissive);
  EXPECT_EQ(c.data.holidays.size(), 1u);
}

TEST(Config, Rejections) {
  EXPECT_THROW(parse_config("{\"flat_rate\": 0}"), ConfigError);
  EXPECT_THROW(parse_config("{\"ferms_gate\": -1}"), ConfigError);
  EXPECT_THROW(parse_config("{\"holdout_days\": 0}"), ConfigError);
  EXPECT_THROW(parse_config("{\"flat_rat\": 30}"), ConfigError);
  EXPECT_THROW(parse_config("{\"elasticity\": {\"peak_peak\": -0.1}}"), ConfigError);
  EXPECT_THROW(parse_config("{\"periods\": {\"peak\": [1], \"offpeak\": [2], \"low\": [3]}}"), ConfigError);
  EXPECT_THROW(parse_config("{\"data\": {\"hour_convention\": \"middle\"}}"), ConfigError);
  EXPECT_THROW(parse_config("[1, 2]"), ConfigError);
  EXPECT_THROW(parse_config("{not json"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, HolidaysFileResolvesAgainstConfigDirectory) {
  const auto dir = std::filesystem::temp_directory_path() / "drsim_config_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "hol.txt") << "2014-09-01\n";
  std::ofstream(dir / "cfg.json") << R"({"data": {"holidays_file": "hol.txt"}})";
  const auto cfg = load_config(dir / "cfg.json");
  EXPECT_TRUE(cfg.data.holidays.contains(Date{std::chrono::year{2014} / 9 / 1}));
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace drsim
