#include "drsim/elasticity.hpp"

#include <string>

#include "drsim/error.hpp"
#include "drsim/text.hpp"

namespace drsim {

namespace {

std::set<int> hour_range(int first, int last) {
  std::set<int> out;
  for (int h = first; h <= last; ++h) out.insert(h);
  return out;
}

void require_positive_baseline(double p0, std::size_t hour) {
  if (!(p0 > 0.0)) {
    throw NonPositiveBaselinePrice("baseline price must be positive (hour index " + std::to_string(hour) +
                                   ", got " + text::format_double(p0) + ")");
  }
}

}  // namespace

std::string_view to_string(PeriodClass c) {
  switch (c) {
    case PeriodClass::Peak:
      return "peak";
    case PeriodClass::OffPeak:
      return "offpeak";
    case PeriodClass::Low:
      return "low";
  }
  return "?";
}

PeriodConfig::PeriodConfig() {
  auto offpeak = hour_range(9, 12);
  offpeak.merge(hour_range(21, 24));
  *this = PeriodConfig(hour_range(13, 20), std::move(offpeak), hour_range(1, 8));
}

PeriodConfig::PeriodConfig(std::set<int> peak, std::set<int> offpeak, std::set<int> low)
    : sets_{std::move(peak), std::move(offpeak), std::move(low)} {
  std::array<int, kHoursPerDay> owners{};
  for (std::size_t c = 0; c < sets_.size(); ++c) {
    for (int h : sets_[c]) {
      if (h < 1 || h > static_cast<int>(kHoursPerDay)) {
        throw ConfigError("period hour " + std::to_string(h) + " outside 1..24");
      }
      if (owners[static_cast<std::size_t>(h - 1)]++ != 0) {
        throw ConfigError("hour " + std::to_string(h) + " assigned to more than one period");
      }
      by_hour_[static_cast<std::size_t>(h - 1)] = static_cast<PeriodClass>(c);
    }
  }
  for (std::size_t h = 0; h < kHoursPerDay; ++h) {
    if (owners[h] == 0) throw ConfigError("hour " + std::to_string(h + 1) + " is not assigned to any period");
  }
}

PeriodClass PeriodConfig::classify(int hour) const {
  if (hour < 1 || hour > static_cast<int>(kHoursPerDay)) {
    throw ConfigError("hour " + std::to_string(hour) + " outside 1..24");
  }
  return by_hour_[static_cast<std::size_t>(hour - 1)];
}

ElasticityTable::ElasticityTable(const Values& values) : values_(values) {
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      const double v = values_[i][j];
      const auto where = std::string(to_string(static_cast<PeriodClass>(i))) + "/" +
                         std::string(to_string(static_cast<PeriodClass>(j)));
      if (i == j && !(v <= 0.0)) throw ConfigError("self-elasticity " + where + " must be <= 0");
      if (i != j && !(v >= 0.0)) throw ConfigError("cross-elasticity " + where + " must be >= 0");
    }
  }
}

ElasticityTable ElasticityTable::reference() {
  return ElasticityTable(Values{{
      {-0.10, 0.016, 0.012},
      {0.016, -0.10, 0.01},
      {0.012, 0.01, -0.10},
  }});
}

ElasticityTable ElasticityTable::self_only(double e) {
  Values v{};
  for (std::size_t i = 0; i < 3; ++i) v[i][i] = e;
  return ElasticityTable(v);
}

bool ElasticityTable::is_zero() const noexcept {
  for (const auto& row : values_)
    for (double v : row)
      if (v != 0.0) return false;
  return true;
}

ElasticityMatrix::ElasticityMatrix(std::size_t n, std::vector<double> row_major)
    : n_(n), values_(std::move(row_major)) {
  if (values_.size() != n_ * n_) throw DimensionMismatch("elasticity matrix needs n*n values");
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      const double v = values_[i * n_ + j];
      if (i == j && !(v <= 0.0)) throw ConfigError("positive self-elasticity at hour index " + std::to_string(i));
      if (i != j && !(v >= 0.0)) {
        throw ConfigError("negative cross-elasticity at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
}

ElasticityMatrix ElasticityMatrix::zero(std::size_t n) { return ElasticityMatrix(n, std::vector<double>(n * n, 0.0)); }

bool ElasticityMatrix::is_symmetric() const {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      if ((*this)(i, j) != (*this)(j, i)) return false;
  return true;
}

ElasticityMatrix build_elasticity_matrix(const ElasticityTable& table, const PeriodConfig& cfg) {
  std::vector<double> values(kHoursPerDay * kHoursPerDay);
  for (std::size_t i = 0; i < kHoursPerDay; ++i) {
    const auto ci = cfg.classify(static_cast<int>(i + 1));
    for (std::size_t j = 0; j < kHoursPerDay; ++j) {
      const auto cj = cfg.classify(static_cast<int>(j + 1));
      // A period's diagonal entry is a self-elasticity; two distinct hours of
      // the same period get no cross term.
      if (i != j && ci == cj) continue;
      values[i * kHoursPerDay + j] = table(ci, cj);
    }
  }
  return ElasticityMatrix(kHoursPerDay, std::move(values));
}

double single_hour_response(double d0, double p0, double p, double e) {
  require_positive_baseline(p0, 0);
  return d0 * (1.0 + e * (p - p0) / p0);
}

DemandResponse multi_hour_response(const DayVectors& day, const ElasticityMatrix& e, ClampPolicy clamp) {
  const std::size_t n = e.size();
  if (day.d0.size() != n || day.p0.size() != n || day.p.size() != n) {
    throw DimensionMismatch("day vectors must all have " + std::to_string(n) + " entries");
  }
  for (std::size_t j = 0; j < n; ++j) require_positive_baseline(day.p0[j], j);

  DemandResponse out;
  out.demand.resize(n);
  out.clamped.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const double d0 = day.d0[i];
    double d = d0 + e(i, i) * (d0 / day.p0[i]) * (day.p[i] - day.p0[i]);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      d += e(i, j) * (d0 / day.p0[j]) * (day.p[j] - day.p0[j]);
    }
    if (clamp == ClampPolicy::ClampAtZero && d < 0.0) {
      d = 0.0;
      out.clamped[i] = true;
    }
    out.demand[i] = d;
  }
  return out;
}

double implied_price(double d, double d0, double p0, double e) {
  if (d0 == 0.0) throw DegenerateInverse("baseline demand is zero");
  if (e == 0.0) throw DegenerateInverse("self-elasticity is zero");
  require_positive_baseline(p0, 0);
  return p0 + p0 * (d - d0) / (e * d0);
}

}  // namespace drsim
