#pragma once

#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace drsim {

/// Hour-resolution wall-clock time in the single configured local zone.
/// No timezone arithmetic is ever applied; the sys_time clock is only used
/// as a naive calendar.
using HourStamp = std::chrono::sys_time<std::chrono::hours>;
using Date = std::chrono::sys_days;
using HolidaySet = std::set<Date>;

/// One hour of market data. `timestamp` is the start of the hour interval.
struct HourlyRecord {
  HourStamp timestamp{};
  double demand_mwh = 0.0;
  double spot_price = 0.0;
  std::optional<double> day_ahead_price;
  double dry_bulb_f = 0.0;
  double dew_point_f = 0.0;

  friend bool operator==(const HourlyRecord&, const HourlyRecord&) = default;
};

struct CalendarFeatures {
  int hour_of_day = 1;  // 1..24, hour 1 is the 00:00-01:00 interval
  int month = 1;        // 1..12
  bool is_holiday = false;
  bool is_saturday = false;
  bool is_sunday = false;

  friend bool operator==(const CalendarFeatures&, const CalendarFeatures&) = default;
};

struct SeriesEntry {
  HourlyRecord record;
  CalendarFeatures calendar;
  bool filled = false;  // synthesized by permissive gap filling

  friend bool operator==(const SeriesEntry&, const SeriesEntry&) = default;
};

/// Ordered hourly records with their calendar features. Contiguity is not
/// enforced on construction; use validate_series to check it.
class RecordSeries {
 public:
  RecordSeries() = default;
  explicit RecordSeries(std::vector<SeriesEntry> entries) : entries_(std::move(entries)) {}

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const SeriesEntry& operator[](std::size_t i) const { return entries_[i]; }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }
  const std::vector<SeriesEntry>& entries() const noexcept { return entries_; }

  /// Sub-range [first, first + count), clipped to the series.
  RecordSeries slice(std::size_t first, std::size_t count) const;

  std::vector<double> demand() const;
  std::vector<double> spot_prices() const;

  friend bool operator==(const RecordSeries&, const RecordSeries&) = default;

 private:
  std::vector<SeriesEntry> entries_;
};

enum class HourConvention { Beginning, Ending };
enum class GapMode { Strict, Permissive };

/// Maps canonical fields onto CSV header names. When `hour` is non-empty the
/// timestamp column holds a date only and the hour column holds the hour
/// number (0..23 for hour-beginning, 1..24 for hour-ending data).
struct CsvSchema {
  std::string timestamp = "timestamp";
  std::string demand = "demand_mwh";
  std::string spot_price = "spot_price";
  std::string dry_bulb = "dry_bulb_f";
  std::string dew_point = "dew_point_f";
  std::string day_ahead_price = "da_price";  // optional column
  std::string hour;
};

struct ParseOptions {
  CsvSchema schema;
  HourConvention convention = HourConvention::Beginning;
  GapMode gap_mode = GapMode::Strict;
  HolidaySet holidays;
};

/// Reads hourly market data. Rows are reported by file line number, so the
/// first data row is row 2.
///
/// Throws MissingColumn, ParseError, or GapError (strict mode only; the
/// permissive mode interpolates demand and weather linearly, forward-fills
/// prices and flags the synthesized rows).
RecordSeries parse_hourly_csv(std::istream& source, const ParseOptions& options = {});

/// Writes the canonical layout (hour-beginning ISO timestamps) that
/// parse_hourly_csv reads back with default options.
void write_hourly_csv(std::ostream& sink, const RecordSeries& series);

CalendarFeatures derive_calendar(HourStamp interval_start, const HolidaySet& holidays);

struct Violation {
  std::size_t index = 0;  // position in the series
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Checks every series invariant. With `whole_days` the length must also be a
/// multiple of 24.
std::vector<Violation> validate_series(const RecordSeries& series, bool whole_days = false);

/// One ISO date per line; blank lines and lines starting with '#' are skipped.
HolidaySet read_holidays(std::istream& source);

std::string format_timestamp(HourStamp t);
std::string format_date(Date d);
std::optional<Date> parse_date(std::string_view text);

/// Records whose interval starts on [start, start + days).
/// Throws EmptyWindow when the window is not fully covered by the series.
RecordSeries select_window(const RecordSeries& series, Date start, int days);

/// Every record strictly before `start`.
RecordSeries records_before(const RecordSeries& series, HourStamp start);

}  // namespace drsim
