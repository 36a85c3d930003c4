// Writes the synthetic hourly market used as the bundled example dataset.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "drsim/error.hpp"
#include "drsim/market_data.hpp"
#include "drsim/synthetic.hpp"

int main(int argc, char** argv) {
  drsim::SyntheticMarketOptions o;
  std::string out_path, start = drsim::format_date(o.start), holidays_path;
  CLI::App app{"Generate a synthetic hourly market CSV"};
  app.add_option("--out", out_path, "CSV to write")->required();
  app.add_option("--start", start, "First day (YYYY-MM-DD)")->capture_default_str();
  app.add_option("--days", o.days, "Number of days")->capture_default_str();
  app.add_option("--seed", o.seed, "Random seed")->capture_default_str();
  app.add_option("--noise", o.price_noise_sd, "Price noise standard deviation ($/MWh)")->capture_default_str();
  app.add_option("--heat-days", o.heat_days, "Day offsets with an afternoon heat surge");
  app.add_option("--holidays", holidays_path, "Holiday list, one YYYY-MM-DD per line");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto d = drsim::parse_date(start);
    if (!d) throw drsim::ConfigError("bad --start '" + start + "'");
    o.start = *d;
    if (!holidays_path.empty()) {
      std::ifstream in(holidays_path);
      if (!in) throw drsim::ConfigError("cannot read " + holidays_path);
      o.holidays = drsim::read_holidays(in);
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw drsim::ConfigError("cannot write " + out_path);
    drsim::write_hourly_csv(out, drsim::make_synthetic_market(o));
  } catch (const std::exception& e) {
    std::cerr << "make_synthetic_data: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
