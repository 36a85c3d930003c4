#include "drsim/mlr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <numeric>
#include <set>
#include <sstream>

#include "drsim/error.hpp"
#include "drsim/text.hpp"

namespace drsim {

using json = nlohmann::ordered_json;

namespace {

struct NamedKind {
  std::string_view name;
  FeatureKind kind;
};

constexpr NamedKind kNamedKinds[] = {
    {"intercept", FeatureKind::Intercept}, {"demand", FeatureKind::Demand},
    {"temperature", FeatureKind::Temperature}, {"dew_point", FeatureKind::DewPoint},
    {"month", FeatureKind::Month}, {"holiday", FeatureKind::Holiday},
    {"saturday", FeatureKind::Saturday}, {"sunday", FeatureKind::Sunday},
};

double feature_value(const Feature& f, const HourlyRecord& r, const CalendarFeatures& cal, double demand) {
  switch (f.kind) {
    case FeatureKind::Intercept:
      return 1.0;
    case FeatureKind::HourDummy:
      return cal.hour_of_day == f.hour ? 1.0 : 0.0;
    case FeatureKind::Demand:
      return demand;
    case FeatureKind::Temperature:
      return r.dry_bulb_f;
    case FeatureKind::DewPoint:
      return r.dew_point_f;
    case FeatureKind::Month:
      return static_cast<double>(cal.month);
    case FeatureKind::Holiday:
      return cal.is_holiday ? 1.0 : 0.0;
    case FeatureKind::Saturday:
      return cal.is_saturday ? 1.0 : 0.0;
    case FeatureKind::Sunday:
      return cal.is_sunday ? 1.0 : 0.0;
  }
  return 0.0;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = x.col(cols[c]);
  return out;
}

}  // namespace

Feature Feature::hour_dummy(int k) {
  if (k < 1 || k > 23) throw ConfigError("hour dummy index " + std::to_string(k) + " outside 1..23");
  return {FeatureKind::HourDummy, k};
}

Feature Feature::parse(std::string_view name) {
  for (const auto& nk : kNamedKinds) {
    if (nk.name == name) return {nk.kind, 0};
  }
  if (name.starts_with("hour")) {
    if (auto k = text::parse_int(name.substr(4)); k && name.size() <= 6 && name[4] != '+' && name[4] != '-') {
      return hour_dummy(static_cast<int>(*k));
    }
  }
  throw ConfigError("unknown feature '" + std::string(name) + "'");
}

std::string Feature::name() const {
  if (kind == FeatureKind::HourDummy) return "hour" + std::to_string(hour);
  for (const auto& nk : kNamedKinds) {
    if (nk.kind == kind) return std::string(nk.name);
  }
  return "?";
}

FeatureSpec::FeatureSpec(std::vector<Feature> features) : features_(std::move(features)) {
  if (features_.empty() || features_.front().kind != FeatureKind::Intercept) {
    throw ConfigError("feature list must start with the intercept");
  }
  std::set<Feature> seen;
  for (const auto& f : features_) {
    if (!seen.insert(f).second) throw ConfigError("duplicate feature '" + f.name() + "'");
  }
}

FeatureSpec FeatureSpec::full() {
  std::vector<Feature> fs;
  for (const auto& nk : kNamedKinds) fs.push_back({nk.kind, 0});
  for (int k = 1; k <= 23; ++k) fs.push_back(Feature::hour_dummy(k));
  return FeatureSpec(std::move(fs));
}

FeatureSpec FeatureSpec::from_names(const std::vector<std::string>& names) {
  std::vector<Feature> fs;
  fs.reserve(names.size());
  for (const auto& n : names) fs.push_back(Feature::parse(n));
  return FeatureSpec(std::move(fs));
}

FeatureSpec FeatureSpec::with(Feature f) const {
  auto fs = features_;
  fs.push_back(f);
  return FeatureSpec(std::move(fs));
}

bool FeatureSpec::contains(Feature f) const { return index_of(f).has_value(); }

std::optional<std::size_t> FeatureSpec::index_of(Feature f) const {
  auto it = std::find(features_.begin(), features_.end(), f);
  if (it == features_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - features_.begin());
}

std::vector<std::string> FeatureSpec::names() const {
  std::vector<std::string> out;
  out.reserve(features_.size());
  for (const auto& f : features_) out.push_back(f.name());
  return out;
}

std::vector<double> build_design_row(const HourlyRecord& record, const CalendarFeatures& cal,
                                     const FeatureSpec& spec) {
  std::vector<double> row;
  row.reserve(spec.size());
  for (const auto& f : spec.features()) row.push_back(feature_value(f, record, cal, record.demand_mwh));
  return row;
}

Eigen::MatrixXd design_matrix(const RecordSeries& series, const FeatureSpec& spec,
                              std::span<const double> demand_override) {
  if (!demand_override.empty() && demand_override.size() != series.size()) {
    throw DimensionMismatch("demand override has " + std::to_string(demand_override.size()) + " values for " +
                            std::to_string(series.size()) + " records");
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(series.size()), static_cast<Eigen::Index>(spec.size()));
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& e = series[i];
    const double demand = demand_override.empty() ? e.record.demand_mwh : demand_override[i];
    for (std::size_t c = 0; c < spec.size(); ++c) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          feature_value(spec[c], e.record, e.calendar, demand);
    }
  }
  return x;
}

Eigen::VectorXd price_vector(const RecordSeries& series) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(series.size()));
  for (std::size_t i = 0; i < series.size(); ++i) y(static_cast<Eigen::Index>(i)) = series[i].record.spot_price;
  return y;
}

namespace {

template <class ColumnName>
OlsEstimate least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, ColumnName&& column_name) {
  const Eigen::Index n = x.rows();
  const Eigen::Index m = x.cols();
  if (y.size() != n) throw DimensionMismatch("price vector length differs from design rows");
  if (m < 1) throw DimensionMismatch("design matrix has no columns");
  if (n <= m) {
    throw InsufficientData("need more observations than parameters (n=" + std::to_string(n) +
                           ", m=" + std::to_string(m) + ")");
  }

  // Unit-norm columns make the rank threshold independent of regressor units.
  const Eigen::VectorXd norms = x.colwise().norm().transpose();
  for (Eigen::Index c = 0; c < m; ++c) {
    if (!(norms(c) > 0.0) || !std::isfinite(norms(c))) throw RankDeficient(column_name(c));
  }
  const Eigen::MatrixXd z = x * norms.cwiseInverse().asDiagonal();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z.rows(), z.cols());
  qr.setThreshold(kRankThreshold);
  qr.compute(z);
  if (qr.rank() < m) {
    // Name the first column that adds no rank to the columns before it.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> prefix;
    prefix.setThreshold(kRankThreshold);
    for (Eigen::Index c = 1; c < m; ++c) {
      prefix.compute(z.leftCols(c + 1));
      if (prefix.rank() < c + 1) throw RankDeficient(column_name(c));
    }
    throw RankDeficient(column_name(m - 1));
  }

  OlsEstimate est;
  est.n_obs = static_cast<std::size_t>(n);
  est.coefficients = qr.solve(y).cwiseQuotient(norms);
  Eigen::VectorXd residual = y - x * est.coefficients;
  // Rounding-level residuals are an exact fit.
  const double floor = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * y.cwiseAbs().maxCoeff();
  residual = residual.unaryExpr([floor](double v) { return std::abs(v) <= floor ? 0.0 : v; });
  est.residual_variance = residual.squaredNorm() / static_cast<double>(n - m);

  // diag((Z'Z)^-1) is the row norms of R^-1, mapped back through the pivots.
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(m, m).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv = r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(m, m));
  const Eigen::VectorXd permuted_diag = r_inv.rowwise().squaredNorm();
  const auto& perm = qr.colsPermutation().indices();
  est.std_errors.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::Index c = perm(k);
    est.std_errors(c) = std::sqrt(est.residual_variance * permuted_diag(k)) / norms(c);
  }
  est.t_values = est.coefficients.cwiseQuotient(est.std_errors);
  return est;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

OlsEstimate fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return least_squares(x, y, [](Eigen::Index c) { return "column " + std::to_string(c); });
}

RegressionModel fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const FeatureSpec& spec) {
  if (static_cast<std::size_t>(x.cols()) != spec.size()) {
    throw DimensionMismatch("design matrix has " + std::to_string(x.cols()) + " columns, feature spec has " +
                            std::to_string(spec.size()));
  }
  auto est = least_squares(x, y, [&](Eigen::Index c) { return spec[static_cast<std::size_t>(c)].name(); });
  RegressionModel model;
  model.spec = spec;
  model.coefficients = to_std(est.coefficients);
  model.std_errors = to_std(est.std_errors);
  model.t_values = to_std(est.t_values);
  model.n_obs = est.n_obs;
  model.residual_variance = est.residual_variance;
  return model;
}

RegressionModel fit_ols(const RecordSeries& series, const FeatureSpec& spec) {
  return fit_ols(design_matrix(series, spec), price_vector(series), spec);
}

Eigen::VectorXd predict(const RegressionModel& model, const Eigen::MatrixXd& rows) {
  if (static_cast<std::size_t>(rows.cols()) != model.coefficients.size()) {
    throw DimensionMismatch("rows have " + std::to_string(rows.cols()) + " columns, model has " +
                            std::to_string(model.coefficients.size()));
  }
  const Eigen::Map<const Eigen::VectorXd> beta(model.coefficients.data(),
                                               static_cast<Eigen::Index>(model.coefficients.size()));
  return rows * beta;
}

double ferms(std::span<const double> forecast, std::span<const double> actual) {
  if (forecast.size() != actual.size() || actual.empty()) {
    throw LengthMismatch("FERMS needs equal, non-empty series (got " + std::to_string(forecast.size()) + " and " +
                         std::to_string(actual.size()) + ")");
  }
  const double n = static_cast<double>(actual.size());
  const double mean_actual = std::accumulate(actual.begin(), actual.end(), 0.0) / n;
  if (mean_actual == 0.0) throw ZeroMeanActual("mean of the actual series is zero");
  double sq = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = forecast[i] - actual[i];
    sq += e * e;
  }
  return 100.0 * std::sqrt(sq / n) / mean_actual;
}

double ferms(const Eigen::VectorXd& forecast, const Eigen::VectorXd& actual) {
  return ferms(std::span<const double>(forecast.data(), static_cast<std::size_t>(forecast.size())),
               std::span<const double>(actual.data(), static_cast<std::size_t>(actual.size())));
}

void validate(const SignificanceThresholds& t) {
  if (!(0.0 < t.t10 && t.t10 < t.t5 && t.t5 < t.t1)) {
    throw ConfigError("significance thresholds must satisfy 0 < t10 < t5 < t1");
  }
}

SignificanceLevel significance_level(double t, const SignificanceThresholds& thresholds) {
  const double a = std::fabs(t);
  if (a >= thresholds.t1) return SignificanceLevel::OnePercent;
  if (a >= thresholds.t5) return SignificanceLevel::FivePercent;
  if (a >= thresholds.t10) return SignificanceLevel::TenPercent;
  return SignificanceLevel::NotSignificant;
}

std::string_view stars(SignificanceLevel level) {
  switch (level) {
    case SignificanceLevel::OnePercent:
      return "**";
    case SignificanceLevel::FivePercent:
      return "*";
    case SignificanceLevel::TenPercent:
      return "+";
    case SignificanceLevel::NotSignificant:
      return "";
  }
  return "";
}

SelectionResult forward_select(const FeatureSpec& candidates, const RecordSeries& train,
                               const RecordSeries& holdout, const FeatureSpec& base,
                               const SelectionOptions& options) {
  if (train.empty() || holdout.empty()) throw InsufficientData("training and holdout windows must be non-empty");
  if (train[train.size() - 1].record.timestamp >= holdout[0].record.timestamp &&
      holdout[holdout.size() - 1].record.timestamp >= train[0].record.timestamp) {
    throw ConfigError("training and holdout windows overlap in time");
  }

  // One design over every feature that can appear; trials pick columns.
  std::vector<Feature> universe = base.features();
  std::vector<Feature> pool;
  for (const auto& f : candidates.features()) {
    if (!base.contains(f)) {
      universe.push_back(f);
      pool.push_back(f);
    }
  }
  const FeatureSpec all(universe);
  const Eigen::MatrixXd x_train = design_matrix(train, all);
  const Eigen::MatrixXd x_hold = design_matrix(holdout, all);
  const Eigen::VectorXd y_train = price_vector(train);
  const Eigen::VectorXd y_hold = price_vector(holdout);

  std::vector<Eigen::Index> columns(base.size());
  std::iota(columns.begin(), columns.end(), Eigen::Index{0});
  auto column_of = [&](const Feature& f) { return static_cast<Eigen::Index>(*all.index_of(f)); };

  auto evaluate = [&](const FeatureSpec& spec, const std::vector<Eigen::Index>& cols) {
    auto model = fit_ols(select_columns(x_train, cols), y_train, spec);
    const double score = ferms(predict(model, select_columns(x_hold, cols)), y_hold);
    return std::pair{std::move(model), score};
  };

  SelectionResult result;
  result.spec = base;
  std::tie(result.model, result.base_ferms) = evaluate(base, columns);
  result.holdout_ferms = result.base_ferms;

  while (!pool.empty()) {
    std::optional<std::size_t> best;
    double best_score = std::numeric_limits<double>::infinity();
    RegressionModel best_model;
    std::vector<std::size_t> dropped;
    for (std::size_t k = 0; k < pool.size(); ++k) {
      auto cols = columns;
      cols.push_back(column_of(pool[k]));
      try {
        auto [model, score] = evaluate(result.spec.with(pool[k]), cols);
        if (score < best_score) {
          best = k;
          best_score = score;
          best_model = std::move(model);
        }
      } catch (const RankDeficient&) {
        dropped.push_back(k);
      }
    }
    if (!best || !(result.holdout_ferms - best_score > options.tolerance)) {
      for (auto k : dropped) result.disqualified.push_back(pool[k]);
      break;
    }
    const Feature chosen = pool[*best];
    columns.push_back(column_of(chosen));
    result.spec = result.spec.with(chosen);
    result.model = std::move(best_model);
    result.holdout_ferms = best_score;
    result.steps.push_back({chosen, best_score});

    // Adding columns never restores rank, so dropped candidates stay out.
    std::vector<Feature> next;
    for (std::size_t k = 0; k < pool.size(); ++k) {
      if (k == *best) continue;
      if (std::find(dropped.begin(), dropped.end(), k) != dropped.end()) {
        result.disqualified.push_back(pool[k]);
      } else {
        next.push_back(pool[k]);
      }
    }
    pool = std::move(next);
  }
  return result;
}

std::string model_to_json(const RegressionModel& model, const SignificanceThresholds& thresholds,
                          std::optional<double> holdout_ferms) {
  json doc;
  json features = json::array();
  for (std::size_t i = 0; i < model.spec.size(); ++i) {
    json f;
    f["name"] = model.spec[i].name();
    f["coefficient"] = number_or_null(model.coefficients[i]);
    f["std_error"] = number_or_null(model.std_errors[i]);
    f["t_value"] = number_or_null(model.t_values[i]);
    f["significance"] = std::string(stars(significance_level(model.t_values[i], thresholds)));
    features.push_back(std::move(f));
  }
  doc["features"] = std::move(features);
  doc["n_obs"] = model.n_obs;
  doc["residual_variance"] = number_or_null(model.residual_variance);
  doc["significance_thresholds"] = {{"t10", thresholds.t10}, {"t5", thresholds.t5}, {"t1", thresholds.t1}};
  if (holdout_ferms) doc["holdout_ferms"] = number_or_null(*holdout_ferms);
  return doc.dump(2) + "\n";
}

RegressionModel model_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
    RegressionModel model;
    std::vector<Feature> fs;
    for (const auto& f : doc.at("features")) {
      fs.push_back(Feature::parse(f.at("name").get<std::string>()));
      model.coefficients.push_back(number_from(f.at("coefficient")));
      model.std_errors.push_back(number_from(f.at("std_error")));
      model.t_values.push_back(number_from(f.at("t_value")));
    }
    model.spec = FeatureSpec(std::move(fs));
    model.n_obs = doc.at("n_obs").get<std::size_t>();
    model.residual_variance = number_from(doc.at("residual_variance"));
    return model;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model JSON: ") + e.what());
  }
}

std::string format_coefficient_table(const RegressionModel& model, const SignificanceThresholds& thresholds) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%-14s %16s %12s\n", "Variable", "Estimate", "t-value");
  out << line;
  for (std::size_t i = 0; i < model.spec.size(); ++i) {
    const double t = model.t_values[i];
    char tbuf[40];
    std::snprintf(tbuf, sizeof tbuf, "%.2f%s", t, std::string(stars(significance_level(t, thresholds))).c_str());
    std::snprintf(line, sizeof line, "%-14s %16.6g %12s\n", model.spec[i].name().c_str(), model.coefficients[i],
                  tbuf);
    out << line;
  }
  std::snprintf(line, sizeof line, "n_obs = %zu, residual variance = %.6g\n", model.n_obs, model.residual_variance);
  out << line;
  return out.str();
}

}  // namespace drsim
