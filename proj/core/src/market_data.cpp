#include "drsim/market_data.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>

#include "drsim/error.hpp"
#include "drsim/text.hpp"

namespace drsim {

namespace chr = std::chrono;

namespace {

constexpr std::size_t kNoColumn = static_cast<std::size_t>(-1);

std::optional<int> parse_fixed_int(std::string_view s) {
  if (s.empty()) return std::nullopt;
  int v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return v;
}

std::optional<Date> make_date(int y, int m, int d) {
  const chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(m)},
                                chr::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

// Time-of-day part after the date: "HH", "HH:MM" or "HH:MM:SS". Returns the
// hour when minutes and seconds are zero, -1 when it is off the hour boundary.
std::optional<int> parse_time_of_day(std::string_view s) {
  s = text::trim(s);
  std::vector<std::string_view> parts;
  while (true) {
    const auto colon = s.find(':');
    parts.push_back(s.substr(0, colon));
    if (colon == std::string_view::npos) break;
    s.remove_prefix(colon + 1);
  }
  if (parts.size() > 3) return std::nullopt;
  std::vector<int> values;
  for (auto p : parts) {
    auto v = parse_fixed_int(p);
    if (!v) return std::nullopt;
    values.push_back(*v);
  }
  if (values[0] > 24) return std::nullopt;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > 59) return std::nullopt;
    if (values[i] != 0) return -1;
  }
  return values[0];
}

struct ParsedStamp {
  Date date;
  std::optional<int> hour;  // absent for date-only fields
  bool off_boundary = false;
};

std::optional<ParsedStamp> parse_stamp(std::string_view field) {
  field = text::trim(field);
  auto split = field.find_first_of("T ");
  const auto date_part = field.substr(0, split);
  auto date = parse_date(date_part);
  if (!date) return std::nullopt;
  ParsedStamp out{*date, std::nullopt, false};
  if (split == std::string_view::npos) return out;
  auto tod = parse_time_of_day(field.substr(split + 1));
  if (!tod) return std::nullopt;
  if (*tod < 0) {
    out.off_boundary = true;
    return out;
  }
  out.hour = *tod;
  return out;
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (text::trim(header[i]) == name) return i;
  }
  return kNoColumn;
}

std::size_t require_column(const std::vector<std::string>& header, const std::string& name) {
  const auto idx = find_column(header, name);
  if (idx == kNoColumn) throw MissingColumn(name);
  return idx;
}

}  // namespace

RecordSeries RecordSeries::slice(std::size_t first, std::size_t count) const {
  first = std::min(first, entries_.size());
  count = std::min(count, entries_.size() - first);
  return RecordSeries(std::vector<SeriesEntry>(entries_.begin() + static_cast<std::ptrdiff_t>(first),
                                               entries_.begin() + static_cast<std::ptrdiff_t>(first + count)));
}

std::vector<double> RecordSeries::demand() const {
  std::vector<double> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.record.demand_mwh);
  return out;
}

std::vector<double> RecordSeries::spot_prices() const {
  std::vector<double> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.record.spot_price);
  return out;
}

std::optional<Date> parse_date(std::string_view s) {
  s = text::trim(s);
  if (s.size() == 10 && s[4] == '-' && s[7] == '-') {
    auto y = parse_fixed_int(s.substr(0, 4));
    auto m = parse_fixed_int(s.substr(5, 2));
    auto d = parse_fixed_int(s.substr(8, 2));
    if (!y || !m || !d) return std::nullopt;
    return make_date(*y, *m, *d);
  }
  // US style M/D/YYYY, as exported by ISO spreadsheets
  const auto first = s.find('/');
  const auto second = s.find('/', first == std::string_view::npos ? 0 : first + 1);
  if (first == std::string_view::npos || second == std::string_view::npos) return std::nullopt;
  auto m = parse_fixed_int(s.substr(0, first));
  auto d = parse_fixed_int(s.substr(first + 1, second - first - 1));
  auto y = parse_fixed_int(s.substr(second + 1));
  if (!y || !m || !d || s.size() - second - 1 != 4) return std::nullopt;
  return make_date(*y, *m, *d);
}

std::string format_date(Date d) {
  const chr::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_timestamp(HourStamp t) {
  const auto day = chr::floor<chr::days>(t);
  const auto hour = (t - day).count();
  char buf[8];
  std::snprintf(buf, sizeof buf, "T%02d:00", static_cast<int>(hour));
  return format_date(day) + buf;
}

CalendarFeatures derive_calendar(HourStamp interval_start, const HolidaySet& holidays) {
  const auto day = chr::floor<chr::days>(interval_start);
  const chr::year_month_day ymd{day};
  const chr::weekday wd{day};
  CalendarFeatures cal;
  cal.hour_of_day = static_cast<int>((interval_start - day).count()) + 1;
  cal.month = static_cast<int>(static_cast<unsigned>(ymd.month()));
  cal.is_holiday = holidays.contains(day);
  cal.is_saturday = wd == chr::Saturday;
  cal.is_sunday = wd == chr::Sunday;
  return cal;
}

RecordSeries parse_hourly_csv(std::istream& source, const ParseOptions& options) {
  const auto& schema = options.schema;
  std::string line;
  if (!std::getline(source, line)) throw MissingColumn(schema.timestamp);
  const auto header = text::split_csv_line(line);

  const auto c_time = require_column(header, schema.timestamp);
  const auto c_demand = require_column(header, schema.demand);
  const auto c_spot = require_column(header, schema.spot_price);
  const auto c_temp = require_column(header, schema.dry_bulb);
  const auto c_dew = require_column(header, schema.dew_point);
  const auto c_da = schema.day_ahead_price.empty() ? kNoColumn
                                                   : find_column(header, schema.day_ahead_price);
  const auto c_hour = schema.hour.empty() ? kNoColumn : require_column(header, schema.hour);

  std::vector<HourlyRecord> rows;
  std::vector<std::size_t> row_numbers;
  std::size_t row = 1;
  while (std::getline(source, line)) {
    ++row;
    if (text::trim(line).empty()) continue;
    const auto fields = text::split_csv_line(line);
    auto field = [&](std::size_t col, const std::string& name) -> const std::string& {
      if (col >= fields.size()) throw ParseError(row, name, "field missing");
      return fields[col];
    };
    auto number = [&](std::size_t col, const std::string& name) {
      const auto& f = field(col, name);
      auto v = text::parse_double(f);
      if (!v) throw ParseError(row, name, "not a number: '" + f + "'");
      return *v;
    };

    const auto& stamp_text = field(c_time, schema.timestamp);
    auto stamp = parse_stamp(stamp_text);
    if (!stamp) throw ParseError(row, schema.timestamp, "bad timestamp '" + stamp_text + "'");
    if (stamp->off_boundary) {
      throw ParseError(row, schema.timestamp, "timestamp not on an hour boundary: '" + stamp_text + "'");
    }
    int hour = 0;
    if (c_hour != kNoColumn) {
      const auto& hour_text = field(c_hour, schema.hour);
      auto h = text::parse_int(hour_text);
      if (!h) throw ParseError(row, schema.hour, "bad hour '" + hour_text + "'");
      hour = static_cast<int>(*h);
    } else if (stamp->hour) {
      hour = *stamp->hour;
    } else {
      throw ParseError(row, schema.timestamp, "timestamp has no time of day: '" + stamp_text + "'");
    }
    if (options.convention == HourConvention::Ending) {
      if (hour < 1 || hour > 24) throw ParseError(row, schema.hour.empty() ? schema.timestamp : schema.hour,
                                                  "hour-ending value out of range 1..24");
      hour -= 1;
    } else if (hour < 0 || hour > 23) {
      throw ParseError(row, schema.hour.empty() ? schema.timestamp : schema.hour,
                       "hour-beginning value out of range 0..23");
    }

    HourlyRecord rec;
    rec.timestamp = HourStamp{stamp->date} + chr::hours{hour};
    rec.demand_mwh = number(c_demand, schema.demand);
    rec.spot_price = number(c_spot, schema.spot_price);
    rec.dry_bulb_f = number(c_temp, schema.dry_bulb);
    rec.dew_point_f = number(c_dew, schema.dew_point);
    if (c_da != kNoColumn && c_da < fields.size() && !text::trim(fields[c_da]).empty()) {
      rec.day_ahead_price = number(c_da, schema.day_ahead_price);
    }
    rows.push_back(rec);
    row_numbers.push_back(row);
  }

  std::vector<SeriesEntry> entries;
  entries.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& rec = rows[i];
    if (i > 0) {
      const auto& prev = rows[i - 1];
      if (rec.timestamp <= prev.timestamp) {
        throw ParseError(row_numbers[i], schema.timestamp,
                         "timestamp " + format_timestamp(rec.timestamp) + " does not follow " +
                             format_timestamp(prev.timestamp));
      }
      const auto step = (rec.timestamp - prev.timestamp).count();
      if (step > 1) {
        if (options.gap_mode == GapMode::Strict) {
          throw GapError(format_timestamp(prev.timestamp + chr::hours{1}));
        }
        for (long j = 1; j < step; ++j) {
          const double f = static_cast<double>(j) / static_cast<double>(step);
          HourlyRecord fill;
          fill.timestamp = prev.timestamp + chr::hours{j};
          fill.demand_mwh = prev.demand_mwh + f * (rec.demand_mwh - prev.demand_mwh);
          fill.dry_bulb_f = prev.dry_bulb_f + f * (rec.dry_bulb_f - prev.dry_bulb_f);
          fill.dew_point_f = prev.dew_point_f + f * (rec.dew_point_f - prev.dew_point_f);
          fill.spot_price = prev.spot_price;
          fill.day_ahead_price = prev.day_ahead_price;
          entries.push_back({fill, derive_calendar(fill.timestamp, options.holidays), true});
        }
      }
    }
    entries.push_back({rec, derive_calendar(rec.timestamp, options.holidays), false});
  }
  return RecordSeries(std::move(entries));
}

void write_hourly_csv(std::ostream& sink, const RecordSeries& series) {
  sink << "timestamp,demand_mwh,spot_price,da_price,dry_bulb_f,dew_point_f\n";
  for (const auto& e : series) {
    const auto& r = e.record;
    sink << format_timestamp(r.timestamp) << ',' << text::format_double(r.demand_mwh) << ','
         << text::format_double(r.spot_price) << ','
         << (r.day_ahead_price ? text::format_double(*r.day_ahead_price) : std::string{}) << ','
         << text::format_double(r.dry_bulb_f) << ',' << text::format_double(r.dew_point_f) << '\n';
  }
}

std::vector<Violation> validate_series(const RecordSeries& series, bool whole_days) {
  std::vector<Violation> out;
  std::map<HourStamp, std::size_t> seen;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& rec = series[i].record;
    const auto& cal = series[i].calendar;
    const auto stamp = format_timestamp(rec.timestamp);
    if (auto [it, inserted] = seen.emplace(rec.timestamp, i); !inserted) {
      out.push_back({i, "duplicate timestamp " + stamp + " (first at index " + std::to_string(it->second) + ")"});
    } else if (i > 0) {
      const auto& prev = series[i - 1].record.timestamp;
      if (rec.timestamp < prev) {
        out.push_back({i, "timestamp " + stamp + " precedes " + format_timestamp(prev)});
      } else if (rec.timestamp - prev != chr::hours{1}) {
        out.push_back({i, "gap before " + stamp + ": previous record is " + format_timestamp(prev)});
      }
    }
    if (!(rec.demand_mwh >= 0.0)) {
      out.push_back({i, "negative or invalid demand " + text::format_double(rec.demand_mwh) + " at " + stamp});
    }
    if (cal.hour_of_day < 1 || cal.hour_of_day > 24) {
      out.push_back({i, "hour_of_day out of range at " + stamp});
    }
    if (cal.is_saturday && cal.is_sunday) {
      out.push_back({i, "both weekend flags set at " + stamp});
    }
  }
  if (whole_days && series.size() % 24 != 0) {
    out.push_back({series.size(), "length " + std::to_string(series.size()) + " is not a whole number of days"});
  }
  return out;
}

HolidaySet read_holidays(std::istream& source) {
  HolidaySet out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(source, line)) {
    ++n;
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto d = parse_date(t);
    if (!d) throw ParseError(n, "holiday", "bad date '" + std::string(t) + "'");
    out.insert(*d);
  }
  return out;
}

RecordSeries select_window(const RecordSeries& series, Date start, int days) {
  const auto describe = [&] { return format_date(start) + " + " + std::to_string(days) + " days"; };
  if (days < 1) throw EmptyWindow("window " + describe() + " is empty");
  const HourStamp from{start};
  const HourStamp to = from + chr::hours{24 * days};
  auto first = std::find_if(series.begin(), series.end(),
                            [&](const SeriesEntry& e) { return e.record.timestamp >= from; });
  const auto index = static_cast<std::size_t>(first - series.begin());
  const auto want = static_cast<std::size_t>(24 * days);
  auto out = series.slice(index, want);
  if (out.size() != want || out[0].record.timestamp != from ||
      out[out.size() - 1].record.timestamp != to - chr::hours{1}) {
    throw EmptyWindow("window " + describe() + " is not covered by the data");
  }
  return out;
}

RecordSeries records_before(const RecordSeries& series, HourStamp start) {
  auto first = std::find_if(series.begin(), series.end(),
                            [&](const SeriesEntry& e) { return e.record.timestamp >= start; });
  return series.slice(0, static_cast<std::size_t>(first - series.begin()));
}

}  // namespace drsim
