#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "drsim/error.hpp"
#include "drsim/market_data.hpp"
#include "drsim/mlr.hpp"
#include "drsim/pipeline.hpp"
#include "drsim/text.hpp"

namespace drsim::cli {

namespace fs = std::filesystem;

namespace {

using text::format_double;
using text::split_csv_line;

constexpr const char* kConfigEnv = "DR_SPOT_SIM_CONFIG";

constexpr const char* kResultFile = "result.csv";
constexpr const char* kSummaryFile = "summary.json";
constexpr const char* kModelFile = "model.json";
constexpr const char* kForecastPlotFile = "forecast_vs_real.csv";
constexpr const char* kDemandPlotFile = "demand_before_after.csv";
constexpr const char* kPricePlotFile = "price_before_after.csv";

struct Options {
  std::string data;
  std::string config;
  std::string out;
  std::string model;
  std::string window_start;
  int days = 7;
  double gate = std::numeric_limits<double>::quiet_NaN();
  int holdout_days = 0;
  bool strict = false;
  bool permissive = false;
};

std::string two_places(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

Error staged(const std::string& message, const char* stage) {
  Error e(message);
  e.set_stage(stage);
  return e;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw staged("cannot read " + path.string(), "load");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw staged("cannot write " + path.string(), "write");
  body(out);
  if (!out) throw staged("failed writing " + path.string(), "write");
}

ScenarioConfig load_scenario(const Options& o) {
  ScenarioConfig cfg;
  try {
    if (!o.config.empty()) cfg = load_config(o.config);
    if (o.holdout_days != 0) cfg.holdout_days = o.holdout_days;
    if (o.strict) cfg.data.gap_mode = GapMode::Strict;
    if (o.permissive) cfg.data.gap_mode = GapMode::Permissive;
    cfg.validate();
  } catch (Error& e) {
    if (e.stage().empty()) e.set_stage("config");
    throw;
  }
  return cfg;
}

RecordSeries load_series(const std::string& path, const ParseOptions& opts) {
  std::ifstream in(path);
  if (!in) throw staged("cannot read data file " + path, "load");
  try {
    auto series = parse_hourly_csv(in, opts);
    if (const auto v = validate_series(series); !v.empty()) throw Error(v.front().message);
    if (series.empty()) throw Error("no data rows");
    return series;
  } catch (const Error& e) {
    throw staged(path + ": " + e.what(), "load");
  }
}

Date window_date(const Options& o) {
  const auto d = parse_date(o.window_start);
  if (!d) throw staged("bad --window-start '" + o.window_start + "' (expected YYYY-MM-DD)", "config");
  if (o.days < 1) throw staged("--days must be at least 1", "config");
  return *d;
}

RecordSeries study_window(const RecordSeries& series, Date start, int days) {
  try {
    return select_window(series, start, days);
  } catch (const EmptyWindow&) {
    throw staged("window " + format_date(start) + " + " + std::to_string(days) + " days lies outside the data (" +
                     format_timestamp(series[0].record.timestamp) + " to " +
                     format_timestamp(series[series.size() - 1].record.timestamp) + ")",
                 "window");
  }
}

// Selection on a train/holdout split of `history`, then a refit of the chosen
// features on all of it.
std::pair<RegressionModel, double> select_and_fit(const RecordSeries& history, const ScenarioConfig& cfg) {
  SelectionResult sel;
  try {
    const auto [train, holdout] = split_holdout(history, cfg.holdout_days);
    sel = forward_select(cfg.feature_candidates, train, holdout, cfg.base_features,
                         SelectionOptions{cfg.selection_tolerance});
  } catch (Error& e) {
    if (e.stage().empty()) e.set_stage("select");
    throw;
  }
  try {
    return {fit_ols(history, sel.spec), sel.holdout_ferms};
  } catch (Error& e) {
    if (e.stage().empty()) e.set_stage("fit");
    throw;
  }
}

int cmd_fit(const Options& o, std::ostream& out) {
  const auto cfg = load_scenario(o);
  const auto series = load_series(o.data, cfg.data);
  const auto [model, holdout_ferms] = select_and_fit(series, cfg);
  out << format_coefficient_table(model, cfg.significance_thresholds);
  out << "holdout FERMS: " << two_places(holdout_ferms) << " %\n";
  if (!std::isnan(o.gate) && !(holdout_ferms <= o.gate)) throw ModelRejected(holdout_ferms, o.gate);
  write_file(o.out, [&](std::ostream& f) { f << model_to_json(model, cfg.significance_thresholds, holdout_ferms); });
  return kExitOk;
}

int cmd_forecast(const Options& o, std::ostream& out) {
  const auto cfg = load_scenario(o);
  const auto series = load_series(o.data, cfg.data);
  const Date start = window_date(o);
  const auto window = study_window(series, start, o.days);

  RegressionModel model;
  if (!o.model.empty()) {
    try {
      model = model_from_json(read_file(o.model));
    } catch (const Error& e) {
      throw staged(o.model + ": " + e.what(), "load");
    }
  } else {
    const auto history = records_before(series, window[0].record.timestamp);
    model = select_and_fit(history, cfg).first;
  }

  Eigen::VectorXd forecast;
  try {
    forecast = predict(model, design_matrix(window, model.spec));
  } catch (Error& e) {
    e.set_stage("forecast");
    throw;
  }
  const auto real = window.spot_prices();
  write_file(o.out, [&](std::ostream& f) {
    f << "timestamp,forecast_price,real_price\n";
    for (std::size_t i = 0; i < window.size(); ++i) {
      f << format_timestamp(window[i].record.timestamp) << ',' << format_double(forecast(static_cast<Eigen::Index>(i)))
        << ',' << format_double(real[i]) << '\n';
    }
  });
  out << "forecast " << window.size() << " hours from " << format_date(start) << ", FERMS vs realized "
      << two_places(ferms(forecast, Eigen::Map<const Eigen::VectorXd>(real.data(), static_cast<Eigen::Index>(real.size()))))
      << " %\n";
  return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  auto cfg = load_scenario(o);
  if (!std::isnan(o.gate)) {
    cfg.ferms_gate = o.gate;
    try {
      cfg.validate();
    } catch (Error& e) {
      e.set_stage("config");
      throw;
    }
  }
  const auto series = load_series(o.data, cfg.data);
  const Date start = window_date(o);
  const auto window = study_window(series, start, o.days);
  const auto history = records_before(series, window[0].record.timestamp);

  const auto result = run_scenario(history, window, cfg);
  const auto summary = impact_summary(result, cfg);

  const fs::path dir = o.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw staged("cannot create output directory " + dir.string() + ": " + ec.message(), "write");
  write_file(dir / kResultFile, [&](std::ostream& f) { write_result_csv(f, result); });
  write_file(dir / kSummaryFile, [&](std::ostream& f) { f << summary_to_json(summary); });
  write_file(dir / kModelFile,
             [&](std::ostream& f) { f << model_to_json(result.model, cfg.significance_thresholds, result.holdout_ferms); });
  write_file(dir / kForecastPlotFile, [&](std::ostream& f) { write_forecast_plot_csv(f, result); });
  write_file(dir / kDemandPlotFile, [&](std::ostream& f) { write_demand_plot_csv(f, result); });
  write_file(dir / kPricePlotFile, [&](std::ostream& f) { write_price_plot_csv(f, result); });
  out << format_summary(summary);
  return kExitOk;
}

// Header plus one row per hour, every row as wide as the header.
void check_plot_file(const fs::path& path, std::size_t hours) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw staged(path.string() + ": missing header", "report");
  const auto width = split_csv_line(line).size();
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    if (split_csv_line(line).size() != width) {
      throw staged(path.string() + ": row " + std::to_string(rows + 1) + " has the wrong number of fields", "report");
    }
  }
  if (rows != hours) {
    throw staged(path.string() + ": " + std::to_string(rows) + " rows, expected " + std::to_string(hours), "report");
  }
}

bool close(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({std::abs(a), std::abs(b), 1.0});
}

int cmd_report(const Options& o, std::ostream& out) {
  const fs::path dir = o.out;
  ImpactSummary summary;
  try {
    summary = summary_from_json(read_file(dir / kSummaryFile));
  } catch (const Error& e) {
    throw staged(e.stage() == "load" ? std::string(e.what()) : (dir / kSummaryFile).string() + ": " + e.what(),
                 "report");
  }
  ScenarioResult result;
  {
    std::istringstream in(read_file(dir / kResultFile));
    try {
      result = read_result_csv(in);
    } catch (const Error& e) {
      throw staged((dir / kResultFile).string() + ": " + e.what(), "report");
    }
  }
  if (result.hours() != summary.hours || result.hours() == 0) {
    throw staged((dir / kResultFile).string() + ": " + std::to_string(result.hours()) + " hours, summary says " +
                     std::to_string(summary.hours),
                 "report");
  }
  for (const char* name : {kForecastPlotFile, kDemandPlotFile, kPricePlotFile}) check_plot_file(dir / name, summary.hours);

  const auto recomputed = impact_summary(result, ScenarioConfig{});
  if (!close(recomputed.delta_energy, summary.delta_energy) || !close(recomputed.delta_cost, summary.delta_cost)) {
    throw staged((dir / kSummaryFile).string() + ": deltas disagree with " + kResultFile, "report");
  }
  out << format_summary(summary);
  return kExitOk;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--data", o.data, "Hourly market CSV")->required();
  sub->add_option("--config", o.config, "Scenario JSON (default: built-in defaults)")->envname(kConfigEnv);
  sub->add_option("--holdout-days", o.holdout_days, "Days held out for feature selection")->check(CLI::PositiveNumber);
  auto* strict = sub->add_flag("--strict", o.strict, "Reject gaps in the hourly series (default)");
  auto* permissive = sub->add_flag("--permissive", o.permissive, "Fill gaps in the hourly series");
  strict->excludes(permissive);
}

void add_window(CLI::App* sub, Options& o) {
  sub->add_option("--window-start", o.window_start, "First day of the study window (YYYY-MM-DD)")->required();
  sub->add_option("--days", o.days, "Length of the study window in days")->capture_default_str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Demand response impact on spot market prices"};
  app.name("dr_spot_sim");
  app.require_subcommand(1);

  auto* fit = app.add_subcommand("fit", "Select and fit the hourly price model");
  add_common(fit, o);
  fit->add_option("--out", o.out, "Model JSON to write")->required();
  fit->add_option("--gate", o.gate, "Fail with exit code 2 if holdout FERMS (%) exceeds this");

  auto* forecast = app.add_subcommand("forecast", "Forecast prices over a window");
  add_common(forecast, o);
  add_window(forecast, o);
  forecast->add_option("--model", o.model, "Model JSON from 'fit' (default: fit on data before the window)");
  forecast->add_option("--out", o.out, "Forecast CSV to write")->required();

  auto* simulate = app.add_subcommand("simulate", "Run the demand response scenario over a window");
  add_common(simulate, o);
  add_window(simulate, o);
  simulate->add_option("--out", o.out, "Output directory")->required();
  simulate->add_option("--gate", o.gate, "Override the configured FERMS gate (%)");

  auto* report = app.add_subcommand("report", "Summarize the outputs of 'simulate'");
  report->add_option("dir,--out", o.out, "Directory written by 'simulate'")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "dr_spot_sim: " << e.what() << "\n";
    return kExitError;
  }

  try {
    if (fit->parsed()) return cmd_fit(o, out);
    if (forecast->parsed()) return cmd_forecast(o, out);
    if (simulate->parsed()) return cmd_simulate(o, out);
    return cmd_report(o, out);
  } catch (const ModelRejected& e) {
    err << "dr_spot_sim: model rejected: holdout FERMS " << two_places(e.ferms()) << " % exceeds gate "
        << two_places(e.gate()) << " %\n";
    return kExitGate;
  } catch (const Error& e) {
    err << "dr_spot_sim: error";
    if (!e.stage().empty()) err << " in stage '" << e.stage() << "'";
    err << ": " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "dr_spot_sim: error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace drsim::cli
