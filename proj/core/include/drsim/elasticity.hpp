#pragma once

#include <array>
#include <cstddef>
#include <set>
#include <string_view>
#include <vector>

namespace drsim {

inline constexpr std::size_t kHoursPerDay = 24;

enum class PeriodClass { Peak = 0, OffPeak = 1, Low = 2 };

std::string_view to_string(PeriodClass c);

/// Partition of the hours 1..24 into the three tariff period classes.
class PeriodConfig {
 public:
  /// Low 1-8, off-peak 9-12 and 21-24, peak 13-20.
  PeriodConfig();

  /// Throws ConfigError unless the three sets partition 1..24 exactly.
  PeriodConfig(std::set<int> peak, std::set<int> offpeak, std::set<int> low);

  PeriodClass classify(int hour) const;
  const std::set<int>& hours(PeriodClass c) const { return sets_[static_cast<std::size_t>(c)]; }

 private:
  std::array<std::set<int>, 3> sets_;
  std::array<PeriodClass, kHoursPerDay> by_hour_{};
};

inline PeriodClass classify_period(int hour, const PeriodConfig& cfg) { return cfg.classify(hour); }

/// 3x3 self/cross elasticities indexed by (period of the responding hour,
/// period of the price-setting hour).
class ElasticityTable {
 public:
  using Values = std::array<std::array<double, 3>, 3>;

  /// All zero: no price response.
  ElasticityTable() = default;

  /// Throws ConfigError when a diagonal entry is positive or an
  /// off-diagonal entry is negative.
  explicit ElasticityTable(const Values& values);

  /// Peak/off-peak/low values commonly used for residential real-time
  /// pricing studies: self -0.10, cross 0.016 / 0.012 / 0.01.
  static ElasticityTable reference();

  /// Same self-elasticity in every period, no cross terms.
  static ElasticityTable self_only(double e);

  double operator()(PeriodClass row, PeriodClass col) const {
    return values_[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)];
  }
  const Values& values() const noexcept { return values_; }
  bool is_zero() const noexcept;

 private:
  Values values_{};
};

/// Square matrix E where E(i,i) is the self-elasticity of hour i and E(i,j)
/// the cross-elasticity of hour-i demand to the hour-j price. Indices are
/// 0-based here; hour 1 is row 0.
class ElasticityMatrix {
 public:
  ElasticityMatrix() = default;

  /// Row-major values; throws ConfigError on a sign violation.
  ElasticityMatrix(std::size_t n, std::vector<double> row_major);

  static ElasticityMatrix zero(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  bool is_symmetric() const;

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

/// 24x24 matrix with E(i,i) = table(class(i), class(i)) and, for hours in
/// different periods, E(i,j) = table(class(i), class(j)). Distinct hours of
/// the same period have no cross term (E(i,j) = 0).
ElasticityMatrix build_elasticity_matrix(const ElasticityTable& table, const PeriodConfig& cfg);

/// Baseline demand, baseline price and offered price for each hour of one
/// day (any horizon length is accepted, 24 in the pipeline).
struct DayVectors {
  std::vector<double> d0;
  std::vector<double> p0;
  std::vector<double> p;
};

enum class ClampPolicy { ClampAtZero, None };

struct DemandResponse {
  std::vector<double> demand;
  std::vector<bool> clamped;  // hour's raw response was negative and set to 0
};

/// d0 * (1 + e * (p - p0) / p0). Throws NonPositiveBaselinePrice if p0 <= 0.
double single_hour_response(double d0, double p0, double p, double e);

/// Self and cross elasticity response of every hour to every hour's price
/// deviation:
///
///   d(i) = d0(i) + E(i,i) d0(i)/p0(i) (p(i) - p0(i))
///               + sum_{j != i} E(i,j) d0(i)/p0(j) (p(j) - p0(j))
///
/// Throws NonPositiveBaselinePrice if any p0 <= 0 and DimensionMismatch when
/// the vectors and the matrix disagree in size.
DemandResponse multi_hour_response(const DayVectors& day, const ElasticityMatrix& e,
                                   ClampPolicy clamp = ClampPolicy::ClampAtZero);

/// Price at which a customer with self-elasticity e would consume d:
/// p0 + p0 (d - d0) / (e d0). Inverse of single_hour_response.
/// Throws DegenerateInverse if d0 == 0 or e == 0.
double implied_price(double d, double d0, double p0, double e);

}  // namespace drsim
