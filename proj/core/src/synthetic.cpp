#include "drsim/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "drsim/error.hpp"

namespace drsim {

namespace {

// Portable draws: mt19937_64 output is fully specified, the std
// distributions are not.
class Draws {
 public:
  explicit Draws(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    const double v = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
  }

 private:
  std::mt19937_64 engine_;
};

// 0 at night, 1 at the 17:00 peak.
double load_shape(int hour_of_day) {
  const double x = (hour_of_day - 17) / 24.0 * 2.0 * std::numbers::pi;
  return 0.5 * (1.0 + std::cos(x));
}

}  // namespace

bool is_heat_hour(int hour_of_day) { return hour_of_day >= 13 && hour_of_day <= 19; }

RecordSeries make_synthetic_market(const SyntheticMarketOptions& o) {
  if (o.days < 1) throw ConfigError("synthetic market needs at least one day");
  if (o.price_model.hour_effects.size() != 23) throw ConfigError("price model needs 23 hour effects");
  Draws draws(o.seed);
  const auto& pm = o.price_model;

  std::vector<SeriesEntry> entries;
  entries.reserve(static_cast<std::size_t>(o.days) * 24);
  for (int day = 0; day < o.days; ++day) {
    const Date date = o.start + std::chrono::days{day};
    const bool heat = std::find(o.heat_days.begin(), o.heat_days.end(), day) != o.heat_days.end();
    const double day_temp = 78.0 + 4.0 * draws.normal() + (heat ? 10.0 : 0.0);
    const double day_demand = 1.0 + 0.04 * draws.normal();
    for (int h = 0; h < 24; ++h) {
      HourlyRecord r;
      r.timestamp = HourStamp{date} + std::chrono::hours{h};
      const auto cal = derive_calendar(r.timestamp, o.holidays);
      const double shape = load_shape(cal.hour_of_day);
      r.dry_bulb_f = day_temp - 8.0 + 14.0 * shape + 1.0 * draws.normal();
      r.dew_point_f = r.dry_bulb_f - 12.0 - 2.0 * std::abs(draws.normal());

      const bool weekend = cal.is_saturday || cal.is_sunday || cal.is_holiday;
      double demand = (o.base_demand + o.daily_swing * shape) * day_demand * (weekend ? 0.88 : 1.0);
      demand += 25.0 * (r.dry_bulb_f - 78.0) + 40.0 * draws.normal();
      if (heat && is_heat_hour(cal.hour_of_day)) {
        const double ramp = 1.0 - std::abs(cal.hour_of_day - 16) / 4.0;
        demand += o.heat_demand_mwh * ramp;
      }
      r.demand_mwh = std::max(demand, 0.0);

      double price = pm.intercept + pm.demand * r.demand_mwh + pm.temperature * r.dry_bulb_f +
                     pm.dew_point * r.dew_point_f + pm.month * cal.month + (cal.is_holiday ? pm.holiday : 0.0) +
                     (cal.is_saturday ? pm.saturday : 0.0) + (cal.is_sunday ? pm.sunday : 0.0);
      if (cal.hour_of_day <= 23) price += pm.hour_effects[static_cast<std::size_t>(cal.hour_of_day - 1)];
      r.spot_price = price + o.price_noise_sd * draws.normal();
      r.day_ahead_price = price;
      entries.push_back({r, cal, false});
    }
  }
  return RecordSeries(std::move(entries));
}

}  // namespace drsim
