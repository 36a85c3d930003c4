#pragma once

#include <cstdint>
#include <vector>

#include "drsim/market_data.hpp"

namespace drsim {

/// Coefficients of the hourly price equation used to generate prices.
/// Slopes are of the magnitude fitted on New England summer data; the
/// intercept is shifted so typical prices sit near 25-50 $/MWh.
struct SyntheticPriceModel {
  double intercept = -145.0;
  double demand = 0.0483;  // $/MWh per MWh
  double temperature = 0.62756;
  double dew_point = -1.23893;
  double month = 9.66399;
  double holiday = 7.23457;
  double saturday = 9.30045;
  double sunday = 11.82146;
  /// Effects of hour1..hour23; hour 24 is the reference level.
  std::vector<double> hour_effects{15.86, 24.07, 27.62, 28.27, 28.42, 24.30, 11.63, 0.10,
                                   -12.41, -23.13, -29.88, -32.45, -34.80, -29.87, -35.05, -28.77,
                                   -23.27, -35.95, -45.16, -39.39, -35.51, -29.15, -15.38};
};

struct SyntheticMarketOptions {
  Date start = Date{std::chrono::year{2014} / 6 / 1};
  int days = 35;
  std::uint64_t seed = 1;
  SyntheticPriceModel price_model;
  double price_noise_sd = 2.0;   // $/MWh
  double base_demand = 2600.0;   // MWh, overnight floor
  double daily_swing = 1400.0;   // MWh added at the afternoon peak
  /// Day offsets (from start) of heat events: afternoon demand and
  /// temperature surge, which produces price spikes through the demand term.
  std::vector<int> heat_days;
  double heat_demand_mwh = 2200.0;
  HolidaySet holidays;
};

/// Deterministic hourly market whose prices follow the linear price
/// equation exactly, plus Gaussian noise. Identical options give
/// bit-identical series on a given platform.
RecordSeries make_synthetic_market(const SyntheticMarketOptions& options);

/// Hours 13..19 of a heat day carry the demand surge.
bool is_heat_hour(int hour_of_day);

}  // namespace drsim
