#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace drsim {

/// Base of every error raised by the library. Carries an optional pipeline
/// stage name so the front end can report where a run failed.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;

  const std::string& stage() const noexcept { return stage_; }
  void set_stage(std::string stage) { stage_ = std::move(stage); }

 private:
  std::string stage_;
};

// market data
class MissingColumn : public Error {
 public:
  explicit MissingColumn(const std::string& column)
      : Error("missing column '" + column + "'"), column_(column) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t row, const std::string& column, const std::string& detail)
      : Error("row " + std::to_string(row) + ", column " + column + ": " + detail),
        row_(row),
        column_(column) {}
  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

class GapError : public Error {
 public:
  explicit GapError(const std::string& missing_timestamp)
      : Error("gap in hourly series: missing " + missing_timestamp),
        missing_(missing_timestamp) {}
  const std::string& missing_timestamp() const noexcept { return missing_; }

 private:
  std::string missing_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// demand response
class NonPositiveBaselinePrice : public Error {
 public:
  using Error::Error;
};

class DegenerateInverse : public Error {
 public:
  using Error::Error;
};

// regression
class RankDeficient : public Error {
 public:
  explicit RankDeficient(const std::string& column)
      : Error("design matrix is rank deficient: column '" + column + "' is linearly dependent"),
        column_(column) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class ZeroMeanActual : public Error {
 public:
  using Error::Error;
};

// pipeline
class ModelRejected : public Error {
 public:
  ModelRejected(double achieved_ferms, double gate)
      : Error("price model rejected: holdout FERMS " + std::to_string(achieved_ferms) +
              "% exceeds gate " + std::to_string(gate) + "%"),
        ferms_(achieved_ferms),
        gate_(gate) {}
  double ferms() const noexcept { return ferms_; }
  double gate() const noexcept { return gate_; }

 private:
  double ferms_;
  double gate_;
};

class EmptyWindow : public Error {
 public:
  using Error::Error;
};

}  // namespace drsim
