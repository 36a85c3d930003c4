#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "drsim/elasticity.hpp"
#include "drsim/market_data.hpp"
#include "drsim/mlr.hpp"

namespace drsim {

struct ScenarioConfig {
  double flat_rate = 30.0;  // $/MWh paid by customers before the program
  ElasticityTable elasticity_table = ElasticityTable::reference();
  PeriodConfig period_config;
  FeatureSpec base_features{{Feature::intercept(), Feature::demand()}};
  FeatureSpec feature_candidates = FeatureSpec::full();
  double ferms_gate = 15.0;  // max acceptable holdout FERMS, percent
  int holdout_days = 7;
  double selection_tolerance = 0.0;
  SignificanceThresholds significance_thresholds;
  ParseOptions data;  // how the hourly CSV is read

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

/// Reads the JSON scenario file. Every key is optional; missing keys keep
/// the defaults above. A relative "holidays_file" is resolved against
/// `base_dir`. Throws ConfigError on malformed content.
ScenarioConfig parse_config(std::string_view json, const std::filesystem::path& base_dir = {});
ScenarioConfig load_config(const std::filesystem::path& path);

struct ScenarioResult {
  std::vector<HourStamp> timestamps;
  std::vector<double> baseline_demand;
  std::vector<double> forecast_price;
  std::vector<double> dr_demand;
  std::vector<double> baseline_spot_price;  // realized prices in the window
  std::vector<double> updated_spot_price;
  std::vector<bool> clamp_flags;
  RegressionModel model;
  std::vector<SelectionStep> selection_steps;
  double holdout_ferms = 0.0;
  double study_ferms = 0.0;  // forecast against realized spot prices in the window

  std::size_t hours() const noexcept { return timestamps.size(); }
};

struct ImpactSummary {
  std::size_t hours = 0;
  double baseline_energy = 0.0;
  double dr_energy = 0.0;
  double delta_energy = 0.0;
  double delta_energy_pct = 0.0;
  double baseline_cost = 0.0;  // baseline demand at forecast prices
  double dr_cost = 0.0;  // DR demand at updated prices
  double delta_cost = 0.0;
  double delta_cost_pct = 0.0;
  double flat_rate_bill = 0.0;  // what customers paid before the program
  double peak_price_before = 0.0;  // max forecast price
  double peak_price_after = 0.0;   // max updated price
  double peak_real_price = 0.0;    // max realized spot price
  std::size_t clamp_count = 0;
  double holdout_ferms = 0.0;
  double study_ferms = 0.0;
};

/// Splits off the last `holdout_days` whole days. Throws InsufficientData when
/// nothing would be left to train on.
std::pair<RecordSeries, RecordSeries> split_holdout(const RecordSeries& history, int holdout_days);

/// Selects and fits the price model on `history`, forecasts the study window,
/// applies the customers' elasticity response to the forecast prices against
/// the flat rate, and re-prices the window with the new demand.
///
/// Errors carry the stage they came from (Error::stage()). Throws
/// ModelRejected when the holdout FERMS exceeds the configured gate.
ScenarioResult run_scenario(const RecordSeries& history, const RecordSeries& study_window,
                            const ScenarioConfig& cfg);

double customer_bill(std::span<const double> demand, std::span<const double> prices);
double customer_bill(std::span<const double> demand, double flat_rate);

/// Both costs are priced by the fitted model, before and after the response,
/// so a null response gives exactly zero deltas. Throws EmptyWindow for an
/// empty result.
ImpactSummary impact_summary(const ScenarioResult& result, const ScenarioConfig& cfg);

// Output files. Column orders are fixed:
//   result:   timestamp,baseline_demand,forecast_price,dr_demand,
//             baseline_spot_price,updated_spot_price,clamped
//   forecast: timestamp,forecast_price,real_price
//   demand:   timestamp,demand_before,demand_after
//   price:    timestamp,price_before,price_after,real_price
void write_result_csv(std::ostream& out, const ScenarioResult& result);
void write_forecast_plot_csv(std::ostream& out, const ScenarioResult& result);
void write_demand_plot_csv(std::ostream& out, const ScenarioResult& result);
void write_price_plot_csv(std::ostream& out, const ScenarioResult& result);

/// Reads back the per-hour series of write_result_csv. Throws ParseError.
ScenarioResult read_result_csv(std::istream& in);

std::string summary_to_json(const ImpactSummary& summary);
ImpactSummary summary_from_json(std::string_view json);

/// Human-readable digest used by the report command.
std::string format_summary(const ImpactSummary& summary);

}  // namespace drsim
