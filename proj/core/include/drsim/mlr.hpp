#pragma once

#include <Eigen/Dense>
#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drsim/market_data.hpp"

namespace drsim {

enum class FeatureKind { Intercept, HourDummy, Demand, Temperature, DewPoint, Month, Holiday, Saturday, Sunday };

/// One regressor of the hourly price model. Hour dummies carry the hour
/// number 1..23; hour 24 is the omitted reference level.
struct Feature {
  FeatureKind kind = FeatureKind::Intercept;
  int hour = 0;

  static Feature intercept() { return {FeatureKind::Intercept, 0}; }
  static Feature hour_dummy(int k);
  static Feature demand() { return {FeatureKind::Demand, 0}; }

  /// "intercept", "hour1".."hour23", "demand", "temperature", "dew_point",
  /// "month", "holiday", "saturday", "sunday". Throws ConfigError otherwise.
  static Feature parse(std::string_view name);
  std::string name() const;

  friend auto operator<=>(const Feature&, const Feature&) = default;
};

/// Ordered regressor list; the intercept is always present and first.
class FeatureSpec {
 public:
  FeatureSpec() : features_{Feature::intercept()} {}

  /// Throws ConfigError when the intercept is not first or a feature repeats.
  explicit FeatureSpec(std::vector<Feature> features);

  /// Intercept, demand, temperature, dew point, month, holiday, weekend
  /// flags, then hour1..hour23.
  static FeatureSpec full();
  static FeatureSpec from_names(const std::vector<std::string>& names);

  FeatureSpec with(Feature f) const;
  bool contains(Feature f) const;
  std::optional<std::size_t> index_of(Feature f) const;

  std::size_t size() const noexcept { return features_.size(); }
  const Feature& operator[](std::size_t i) const { return features_[i]; }
  const std::vector<Feature>& features() const noexcept { return features_; }
  std::vector<std::string> names() const;

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;

 private:
  std::vector<Feature> features_;
};

std::vector<double> build_design_row(const HourlyRecord& record, const CalendarFeatures& cal,
                                     const FeatureSpec& spec);

/// One design row per record. `demand_override`, when non-empty, replaces the
/// recorded demand of each row (every other regressor keeps its observed value).
Eigen::MatrixXd design_matrix(const RecordSeries& series, const FeatureSpec& spec,
                              std::span<const double> demand_override = {});

Eigen::VectorXd price_vector(const RecordSeries& series);

struct RegressionModel {
  FeatureSpec spec;
  std::vector<double> coefficients;
  std::vector<double> std_errors;
  std::vector<double> t_values;
  std::size_t n_obs = 0;
  double residual_variance = 0.0;
};

/// Relative pivot threshold below which a column counts as linearly
/// dependent on the others (columns are scaled to unit norm first).
inline constexpr double kRankThreshold = 1e-10;

/// Ordinary least squares through a column-pivoted Householder QR.
///
/// Standard errors come from residual_variance * diag((X'X)^-1) with
/// residual_variance = RSS / (n - m). A perfect fit therefore has zero
/// standard errors and non-finite t-values.
///
/// Throws InsufficientData when n <= m and RankDeficient (naming the first
/// column that depends on the ones before it) when X lacks full column rank.
RegressionModel fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const FeatureSpec& spec);

/// Coefficient statistics of a plain numeric design. RankDeficient names
/// columns by position ("column 3").
struct OlsEstimate {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd std_errors;
  Eigen::VectorXd t_values;
  double residual_variance = 0.0;
  std::size_t n_obs = 0;
};

OlsEstimate fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

RegressionModel fit_ols(const RecordSeries& series, const FeatureSpec& spec);

/// Throws DimensionMismatch when the row width differs from the model.
Eigen::VectorXd predict(const RegressionModel& model, const Eigen::MatrixXd& rows);

/// Root mean square forecast error as a percentage of the mean actual value.
/// Throws LengthMismatch (including empty inputs) and ZeroMeanActual.
double ferms(std::span<const double> forecast, std::span<const double> actual);
double ferms(const Eigen::VectorXd& forecast, const Eigen::VectorXd& actual);

enum class SignificanceLevel { OnePercent, FivePercent, TenPercent, NotSignificant };

struct SignificanceThresholds {
  double t10 = 1.3;
  double t5 = 1.69;
  double t1 = 2.45;
};

/// Throws ConfigError unless 0 < t10 < t5 < t1.
void validate(const SignificanceThresholds& thresholds);

SignificanceLevel significance_level(double t, const SignificanceThresholds& thresholds = {});

/// "**", "*", "+" or "" for the four levels.
std::string_view stars(SignificanceLevel level);

struct SelectionOptions {
  double tolerance = 0.0;  // minimum holdout FERMS improvement to accept a step
};

struct SelectionStep {
  Feature added;
  double holdout_ferms = 0.0;
};

struct SelectionResult {
  FeatureSpec spec;
  RegressionModel model;  // fitted on the training rows
  double base_ferms = 0.0;
  double holdout_ferms = 0.0;
  std::vector<SelectionStep> steps;
  std::vector<Feature> disqualified;  // rank deficient when added
};

/// Greedy forward selection on out-of-sample FERMS. Starting from `base`,
/// each round fits every remaining candidate appended to the current spec on
/// `train`, scores it on `holdout`, and keeps the best one if it improves the
/// current score by more than the tolerance. Ties go to the candidate listed
/// first. A candidate that makes the design rank deficient is dropped.
SelectionResult forward_select(const FeatureSpec& candidates, const RecordSeries& train,
                               const RecordSeries& holdout, const FeatureSpec& base,
                               const SelectionOptions& options = {});

/// JSON document listing each feature's coefficient, standard error, t-value
/// and significance stars, plus n_obs and the residual variance.
/// Non-finite numbers are written as null.
std::string model_to_json(const RegressionModel& model, const SignificanceThresholds& thresholds = {},
                          std::optional<double> holdout_ferms = std::nullopt);
RegressionModel model_from_json(std::string_view json);

/// Fixed-width text table: variable, estimate, t-value with stars.
std::string format_coefficient_table(const RegressionModel& model, const SignificanceThresholds& thresholds = {});

}  // namespace drsim
