#include "drsim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "drsim/error.hpp"
#include "drsim/text.hpp"

namespace drsim {

using json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kPeriodKeys[] = {"peak", "offpeak", "low"};

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> known, std::string_view where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

std::set<int> hour_set(const json& j) {
  std::set<int> out;
  for (const auto& v : j) out.insert(v.get<int>());
  return out;
}

FeatureSpec spec_from(const json& j) { return FeatureSpec::from_names(j.get<std::vector<std::string>>()); }

template <class Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (Error& e) {
    if (e.stage().empty()) e.set_stage(stage);
    throw;
  }
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

double percent_of(double delta, double base) { return 100.0 * delta / base; }

void require_same_length(const ScenarioResult& r) {
  const auto n = r.timestamps.size();
  if (r.baseline_demand.size() != n || r.forecast_price.size() != n || r.dr_demand.size() != n ||
      r.baseline_spot_price.size() != n || r.updated_spot_price.size() != n || r.clamp_flags.size() != n) {
    throw LengthMismatch("scenario result series differ in length");
  }
}

std::string fmt(double v) { return text::format_double(v); }

}  // namespace

void ScenarioConfig::validate() const {
  if (!(flat_rate > 0.0)) throw ConfigError("flat_rate must be positive");
  if (!(ferms_gate > 0.0)) throw ConfigError("ferms_gate must be positive");
  if (holdout_days < 1) throw ConfigError("holdout_days must be at least 1");
  if (!(selection_tolerance >= 0.0)) throw ConfigError("selection_tolerance must be non-negative");
  drsim::validate(significance_thresholds);
}

ScenarioConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  ScenarioConfig cfg;
  try {
    const json doc = json::parse(text);
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown_keys(doc,
                        {"flat_rate", "ferms_gate", "holdout_days", "selection_tolerance", "significance_thresholds",
                         "elasticity", "periods", "features", "data"},
                        "config");
    if (doc.contains("flat_rate")) cfg.flat_rate = doc["flat_rate"].get<double>();
    if (doc.contains("ferms_gate")) cfg.ferms_gate = doc["ferms_gate"].get<double>();
    if (doc.contains("holdout_days")) cfg.holdout_days = doc["holdout_days"].get<int>();
    if (doc.contains("selection_tolerance")) cfg.selection_tolerance = doc["selection_tolerance"].get<double>();
    if (doc.contains("significance_thresholds")) {
      const auto& t = doc["significance_thresholds"];
      reject_unknown_keys(t, {"t10", "t5", "t1"}, "significance_thresholds");
      cfg.significance_thresholds.t10 = t.value("t10", cfg.significance_thresholds.t10);
      cfg.significance_thresholds.t5 = t.value("t5", cfg.significance_thresholds.t5);
      cfg.significance_thresholds.t1 = t.value("t1", cfg.significance_thresholds.t1);
    }
    if (doc.contains("elasticity")) {
      const auto& e = doc["elasticity"];
      ElasticityTable::Values values{};
      std::size_t seen = 0;
      for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
          const auto key = std::string(kPeriodKeys[i]) + "_" + std::string(kPeriodKeys[j]);
          if (!e.contains(key)) throw ConfigError("elasticity table is missing '" + key + "'");
          values[i][j] = e[key].get<double>();
          ++seen;
        }
      }
      if (e.size() != seen) throw ConfigError("elasticity table has unknown keys");
      cfg.elasticity_table = ElasticityTable(values);
    }
    if (doc.contains("periods")) {
      const auto& p = doc["periods"];
      reject_unknown_keys(p, {"peak", "offpeak", "low"}, "periods");
      cfg.period_config = PeriodConfig(hour_set(p.at("peak")), hour_set(p.at("offpeak")), hour_set(p.at("low")));
    }
    if (doc.contains("features")) {
      const auto& f = doc["features"];
      reject_unknown_keys(f, {"base", "candidates"}, "features");
      if (f.contains("base")) cfg.base_features = spec_from(f["base"]);
      if (f.contains("candidates")) cfg.feature_candidates = spec_from(f["candidates"]);
    }
    if (doc.contains("data")) {
      const auto& d = doc["data"];
      reject_unknown_keys(d, {"columns", "hour_convention", "gap_mode", "holidays", "holidays_file"}, "data");
      if (d.contains("columns")) {
        const auto& c = d["columns"];
        reject_unknown_keys(c, {"timestamp", "demand", "spot_price", "dry_bulb", "dew_point", "day_ahead_price", "hour"},
                            "data.columns");
        auto& s = cfg.data.schema;
        s.timestamp = c.value("timestamp", s.timestamp);
        s.demand = c.value("demand", s.demand);
        s.spot_price = c.value("spot_price", s.spot_price);
        s.dry_bulb = c.value("dry_bulb", s.dry_bulb);
        s.dew_point = c.value("dew_point", s.dew_point);
        s.day_ahead_price = c.value("day_ahead_price", s.day_ahead_price);
        s.hour = c.value("hour", s.hour);
      }
      if (d.contains("hour_convention")) {
        const auto v = d["hour_convention"].get<std::string>();
        if (v == "beginning") {
          cfg.data.convention = HourConvention::Beginning;
        } else if (v == "ending") {
          cfg.data.convention = HourConvention::Ending;
        } else {
          throw ConfigError("hour_convention must be 'beginning' or 'ending'");
        }
      }
      if (d.contains("gap_mode")) {
        const auto v = d["gap_mode"].get<std::string>();
        if (v == "strict") {
          cfg.data.gap_mode = GapMode::Strict;
        } else if (v == "permissive") {
          cfg.data.gap_mode = GapMode::Permissive;
        } else {
          throw ConfigError("gap_mode must be 'strict' or 'permissive'");
        }
      }
      if (d.contains("holidays")) {
        for (const auto& h : d["holidays"]) {
          const auto s = h.get<std::string>();
          auto date = parse_date(s);
          if (!date) throw ConfigError("bad holiday date '" + s + "'");
          cfg.data.holidays.insert(*date);
        }
      }
      if (d.contains("holidays_file")) {
        std::filesystem::path path = d["holidays_file"].get<std::string>();
        if (path.is_relative()) path = base_dir / path;
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read holidays file " + path.string());
        cfg.data.holidays.merge(read_holidays(in));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

std::pair<RecordSeries, RecordSeries> split_holdout(const RecordSeries& history, int holdout_days) {
  const auto hold = static_cast<std::size_t>(holdout_days) * kHoursPerDay;
  if (holdout_days < 1 || history.size() <= hold) {
    throw InsufficientData("history of " + std::to_string(history.size()) + " hours leaves nothing to train on after a " +
                           std::to_string(holdout_days) + "-day holdout");
  }
  return {history.slice(0, history.size() - hold), history.slice(history.size() - hold, hold)};
}

ScenarioResult run_scenario(const RecordSeries& history, const RecordSeries& study_window,
                            const ScenarioConfig& cfg) {
  in_stage("validate", [&] {
    cfg.validate();
    if (auto v = validate_series(history); !v.empty()) throw Error("history: " + v.front().message);
    if (auto v = validate_series(study_window, true); !v.empty()) throw Error("study window: " + v.front().message);
    if (study_window.empty()) throw EmptyWindow("study window is empty");
    if (study_window[0].calendar.hour_of_day != 1) throw Error("study window must start at hour 1 of a day");
    if (!history.empty() && history[history.size() - 1].record.timestamp >= study_window[0].record.timestamp) {
      throw Error("history must end before the study window starts");
    }
  });

  ScenarioResult result;
  const auto selection = in_stage("select", [&] {
    const auto [train, holdout] = split_holdout(history, cfg.holdout_days);
    return forward_select(cfg.feature_candidates, train, holdout, cfg.base_features,
                          SelectionOptions{cfg.selection_tolerance});
  });
  result.holdout_ferms = selection.holdout_ferms;
  result.selection_steps = selection.steps;

  in_stage("gate", [&] {
    if (!(selection.holdout_ferms <= cfg.ferms_gate)) throw ModelRejected(selection.holdout_ferms, cfg.ferms_gate);
  });

  result.model = in_stage("fit", [&] { return fit_ols(history, selection.spec); });

  const auto n = study_window.size();
  const Eigen::VectorXd forecast = in_stage("forecast", [&] {
    return predict(result.model, design_matrix(study_window, result.model.spec));
  });
  result.timestamps.reserve(n);
  for (const auto& e : study_window) result.timestamps.push_back(e.record.timestamp);
  result.baseline_demand = study_window.demand();
  result.baseline_spot_price = study_window.spot_prices();
  result.forecast_price.assign(forecast.data(), forecast.data() + forecast.size());
  result.study_ferms = in_stage("forecast", [&] { return ferms(result.forecast_price, result.baseline_spot_price); });

  in_stage("response", [&] {
    const auto e = build_elasticity_matrix(cfg.elasticity_table, cfg.period_config);
    result.dr_demand.resize(n);
    result.clamp_flags.assign(n, false);
    for (std::size_t first = 0; first < n; first += kHoursPerDay) {
      DayVectors day;
      day.d0.assign(result.baseline_demand.begin() + first, result.baseline_demand.begin() + first + kHoursPerDay);
      day.p0.assign(kHoursPerDay, cfg.flat_rate);
      day.p.assign(result.forecast_price.begin() + first, result.forecast_price.begin() + first + kHoursPerDay);
      const auto response = multi_hour_response(day, e);
      for (std::size_t h = 0; h < kHoursPerDay; ++h) {
        result.dr_demand[first + h] = response.demand[h];
        result.clamp_flags[first + h] = response.clamped[h];
      }
    }
  });

  const Eigen::VectorXd updated = in_stage("reprice", [&] {
    return predict(result.model, design_matrix(study_window, result.model.spec, result.dr_demand));
  });
  result.updated_spot_price.assign(updated.data(), updated.data() + updated.size());
  return result;
}

double customer_bill(std::span<const double> demand, std::span<const double> prices) {
  if (demand.size() != prices.size()) {
    throw LengthMismatch("bill needs one price per hour (" + std::to_string(demand.size()) + " demands, " +
                         std::to_string(prices.size()) + " prices)");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < demand.size(); ++i) total += demand[i] * prices[i];
  return total;
}

double customer_bill(std::span<const double> demand, double flat_rate) { return flat_rate * sum(demand); }

ImpactSummary impact_summary(const ScenarioResult& result, const ScenarioConfig& cfg) {
  if (result.hours() == 0) throw EmptyWindow("scenario result has no hours");
  require_same_length(result);
  ImpactSummary s;
  s.hours = result.hours();
  s.baseline_energy = sum(result.baseline_demand);
  s.dr_energy = sum(result.dr_demand);
  s.delta_energy = s.dr_energy - s.baseline_energy;
  s.delta_energy_pct = percent_of(s.delta_energy, s.baseline_energy);
  s.baseline_cost = customer_bill(result.baseline_demand, result.forecast_price);
  s.dr_cost = customer_bill(result.dr_demand, result.updated_spot_price);
  s.delta_cost = s.dr_cost - s.baseline_cost;
  s.delta_cost_pct = percent_of(s.delta_cost, s.baseline_cost);
  s.flat_rate_bill = customer_bill(result.baseline_demand, cfg.flat_rate);
  s.peak_price_before = *std::max_element(result.forecast_price.begin(), result.forecast_price.end());
  s.peak_price_after = *std::max_element(result.updated_spot_price.begin(), result.updated_spot_price.end());
  s.peak_real_price = *std::max_element(result.baseline_spot_price.begin(), result.baseline_spot_price.end());
  s.clamp_count = static_cast<std::size_t>(std::count(result.clamp_flags.begin(), result.clamp_flags.end(), true));
  s.holdout_ferms = result.holdout_ferms;
  s.study_ferms = result.study_ferms;
  return s;
}

void write_result_csv(std::ostream& out, const ScenarioResult& r) {
  require_same_length(r);
  out << "timestamp,baseline_demand,forecast_price,dr_demand,baseline_spot_price,updated_spot_price,clamped\n";
  for (std::size_t i = 0; i < r.hours(); ++i) {
    out << format_timestamp(r.timestamps[i]) << ',' << fmt(r.baseline_demand[i]) << ',' << fmt(r.forecast_price[i])
        << ',' << fmt(r.dr_demand[i]) << ',' << fmt(r.baseline_spot_price[i]) << ','
        << fmt(r.updated_spot_price[i]) << ',' << (r.clamp_flags[i] ? 1 : 0) << '\n';
  }
}

void write_forecast_plot_csv(std::ostream& out, const ScenarioResult& r) {
  require_same_length(r);
  out << "timestamp,forecast_price,real_price\n";
  for (std::size_t i = 0; i < r.hours(); ++i) {
    out << format_timestamp(r.timestamps[i]) << ',' << fmt(r.forecast_price[i]) << ','
        << fmt(r.baseline_spot_price[i]) << '\n';
  }
}

void write_demand_plot_csv(std::ostream& out, const ScenarioResult& r) {
  require_same_length(r);
  out << "timestamp,demand_before,demand_after\n";
  for (std::size_t i = 0; i < r.hours(); ++i) {
    out << format_timestamp(r.timestamps[i]) << ',' << fmt(r.baseline_demand[i]) << ',' << fmt(r.dr_demand[i])
        << '\n';
  }
}

void write_price_plot_csv(std::ostream& out, const ScenarioResult& r) {
  require_same_length(r);
  out << "timestamp,price_before,price_after,real_price\n";
  for (std::size_t i = 0; i < r.hours(); ++i) {
    out << format_timestamp(r.timestamps[i]) << ',' << fmt(r.forecast_price[i]) << ','
        << fmt(r.updated_spot_price[i]) << ',' << fmt(r.baseline_spot_price[i]) << '\n';
  }
}

ScenarioResult read_result_csv(std::istream& in) {
  static const std::vector<std::string> kHeader{"timestamp",           "baseline_demand",    "forecast_price",
                                                "dr_demand",           "baseline_spot_price", "updated_spot_price",
                                                "clamped"};
  std::string line;
  if (!std::getline(in, line) || text::split_csv_line(line) != kHeader) {
    throw ParseError(1, "header", "unexpected result header");
  }
  ScenarioResult r;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (text::trim(line).empty()) continue;
    const auto fields = text::split_csv_line(line);
    if (fields.size() != kHeader.size()) {
      throw ParseError(row, "*", "expected " + std::to_string(kHeader.size()) + " fields, got " +
                                     std::to_string(fields.size()));
    }
    const auto space = fields[0].find('T');
    auto date = parse_date(fields[0].substr(0, space));
    auto hour = space == std::string::npos ? std::nullopt : text::parse_int(fields[0].substr(space + 1, 2));
    if (!date || !hour) throw ParseError(row, "timestamp", "bad timestamp '" + fields[0] + "'");
    r.timestamps.push_back(HourStamp{*date} + std::chrono::hours{*hour});
    std::vector<double> values;
    for (std::size_t c = 1; c + 1 < fields.size(); ++c) {
      auto v = text::parse_double(fields[c]);
      if (!v) throw ParseError(row, kHeader[c], "not a number: '" + fields[c] + "'");
      values.push_back(*v);
    }
    r.baseline_demand.push_back(values[0]);
    r.forecast_price.push_back(values[1]);
    r.dr_demand.push_back(values[2]);
    r.baseline_spot_price.push_back(values[3]);
    r.updated_spot_price.push_back(values[4]);
    const auto flag = text::trim(fields.back());
    if (flag != "0" && flag != "1") throw ParseError(row, "clamped", "expected 0 or 1");
    r.clamp_flags.push_back(flag == "1");
  }
  return r;
}

std::string summary_to_json(const ImpactSummary& s) {
  json doc;
  doc["hours"] = s.hours;
  doc["energy"] = {{"baseline_mwh", number_or_null(s.baseline_energy)},
                   {"dr_mwh", number_or_null(s.dr_energy)},
                   {"delta_mwh", number_or_null(s.delta_energy)},
                   {"delta_pct", number_or_null(s.delta_energy_pct)}};
  doc["cost"] = {{"baseline", number_or_null(s.baseline_cost)},
                 {"dr", number_or_null(s.dr_cost)},
                 {"delta", number_or_null(s.delta_cost)},
                 {"delta_pct", number_or_null(s.delta_cost_pct)},
                 {"flat_rate_bill", number_or_null(s.flat_rate_bill)}};
  doc["peak_price"] = {{"before", number_or_null(s.peak_price_before)},
                       {"after", number_or_null(s.peak_price_after)},
                       {"real", number_or_null(s.peak_real_price)}};
  doc["clamp_count"] = s.clamp_count;
  doc["ferms"] = {{"holdout_pct", number_or_null(s.holdout_ferms)}, {"study_pct", number_or_null(s.study_ferms)}};
  return doc.dump(2) + "\n";
}

ImpactSummary summary_from_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    ImpactSummary s;
    s.hours = doc.at("hours").get<std::size_t>();
    const auto& e = doc.at("energy");
    s.baseline_energy = number_from(e.at("baseline_mwh"));
    s.dr_energy = number_from(e.at("dr_mwh"));
    s.delta_energy = number_from(e.at("delta_mwh"));
    s.delta_energy_pct = number_from(e.at("delta_pct"));
    const auto& c = doc.at("cost");
    s.baseline_cost = number_from(c.at("baseline"));
    s.dr_cost = number_from(c.at("dr"));
    s.delta_cost = number_from(c.at("delta"));
    s.delta_cost_pct = number_from(c.at("delta_pct"));
    s.flat_rate_bill = number_from(c.at("flat_rate_bill"));
    const auto& p = doc.at("peak_price");
    s.peak_price_before = number_from(p.at("before"));
    s.peak_price_after = number_from(p.at("after"));
    s.peak_real_price = number_from(p.at("real"));
    s.clamp_count = doc.at("clamp_count").get<std::size_t>();
    s.holdout_ferms = number_from(doc.at("ferms").at("holdout_pct"));
    s.study_ferms = number_from(doc.at("ferms").at("study_pct"));
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed summary JSON: ") + e.what());
  }
}

std::string format_summary(const ImpactSummary& s) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "Hours simulated        %zu\n"
                "Change in energy       %.0f MWh  (%.2f %%)\n"
                "Change in cost         %.0f $  (%.2f %%)\n"
                "Wholesale cost         before %.0f $, after %.0f $\n"
                "Peak spot price        before %.2f $/MWh, after %.2f $/MWh (realized peak %.2f)\n"
                "FERMS                  holdout %.2f %%, study window %.2f %%\n"
                "Clamped hours          %zu\n",
                s.hours, s.delta_energy, s.delta_energy_pct, s.delta_cost, s.delta_cost_pct, s.baseline_cost,
                s.dr_cost, s.peak_price_before, s.peak_price_after, s.peak_real_price, s.holdout_ferms,
                s.study_ferms, s.clamp_count);
  return buf;
}

}  // namespace drsim
