// Acceptance suite: one PASS/FAIL/SKIP line per criterion. Exit status is
// non-zero when any required criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "drsim/elasticity.hpp"
#include "drsim/error.hpp"
#include "drsim/market_data.hpp"
#include "drsim/mlr.hpp"
#include "drsim/pipeline.hpp"
#include "support/markets.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace drsim;

namespace {

int failures = 0;

void report(bool pass, const char* name, const std::string& detail, bool required = true) {
  std::printf("[%s] %s%s: %s\n", pass ? "PASS" : "FAIL", name, required ? "" : " (optional)", detail.c_str());
  if (!pass && required) ++failures;
}

void skip(const char* name, const std::string& detail) { std::printf("[SKIP] %s (optional): %s\n", name, detail.c_str()); }

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Random three-period table with the usual sign structure.
ElasticityTable random_table(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> self(-0.5, 0.0), cross(0.0, 0.05);
  ElasticityTable::Values v{};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) v[i][j] = i == j ? self(rng) : cross(rng);
  return ElasticityTable(v);
}

void elasticity_oracle() {
  std::mt19937_64 rng(20140818);
  std::uniform_real_distribution<double> ud0(0.0, 5000.0), up0(10.0, 100.0), up(0.0, 300.0);
  const PeriodConfig periods;
  std::vector<DayVectors> days(1000);
  std::vector<ElasticityMatrix> mats(1000);
  for (std::size_t k = 0; k < days.size(); ++k) {
    auto& d = days[k];
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
      d.d0.push_back(ud0(rng));
      d.p0.push_back(up0(rng));
      d.p.push_back(up(rng));
    }
    mats[k] = build_elasticity_matrix(random_table(rng), periods);
  }

  std::vector<DemandResponse> got(days.size());
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t k = 0; k < days.size(); ++k) got[k] = multi_hour_response(days[k], mats[k], ClampPolicy::None);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  double worst = 0.0;
  bool clamp_ok = true;
  for (std::size_t k = 0; k < days.size(); ++k) {
    std::vector<double> e(kHoursPerDay * kHoursPerDay);
    for (std::size_t i = 0; i < kHoursPerDay; ++i)
      for (std::size_t j = 0; j < kHoursPerDay; ++j) e[i * kHoursPerDay + j] = mats[k](i, j);
    const auto want = oracle::response_terms(days[k].d0, days[k].p0, days[k].p, e);
    const auto clamped = multi_hour_response(days[k], mats[k]);
    for (std::size_t i = 0; i < kHoursPerDay; ++i) {
      const double w = static_cast<double>(want[i]);
      worst = std::max(worst, oracle::rel_diff(got[k].demand[i], w, days[k].d0[i]));
      clamp_ok = clamp_ok && clamped.demand[i] == std::max(got[k].demand[i], 0.0) &&
                 clamped.clamped[i] == (got[k].demand[i] < 0.0);
    }
  }
  report(worst <= 1e-10 && secs < 1.0 && clamp_ok, "elasticity-oracle-equivalence",
         fmt("1000 random days, max rel err %.3g (tol 1e-10), %.1f ms (limit 1000 ms), clamp %s", worst,
             secs * 1e3, clamp_ok ? "consistent" : "INCONSISTENT"));
}

void inverse_consistency() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ud0(1.0, 5000.0), up0(10.0, 100.0), up(0.0, 300.0), ue(-1.0, -0.01);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double d0 = ud0(rng), p0 = up0(rng), p = up(rng), e = ue(rng);
    const double back = implied_price(single_hour_response(d0, p0, p, e), d0, p0, e);
    worst = std::max(worst, oracle::rel_diff(back, p, p0));
  }
  report(worst <= 1e-9, "inverse-consistency", fmt("1000 random inputs, max rel err %.3g (tol 1e-9)", worst));
}

void ols_correctness() {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> ub(-10.0, 10.0);
  const Eigen::Index n = 500, m = 31;
  Eigen::MatrixXd x(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < m; ++j) x(i, j) = z(rng);
  }
  Eigen::VectorXd beta(m);
  for (auto& b : beta) b = ub(rng);
  const Eigen::VectorXd y = x * beta;

  const auto est = fit_ols(x, y);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) worst = std::max(worst, oracle::rel_diff(est.coefficients(j), beta(j)));

  Eigen::VectorXd noisy = y;
  for (auto& v : noisy) v += 0.5 * z(rng);
  double ortho = 0.0;
  for (const Eigen::VectorXd* target : {&y, static_cast<const Eigen::VectorXd*>(&noisy)}) {
    const auto fit = fit_ols(x, *target);
    const Eigen::VectorXd r = *target - x * fit.coefficients;
    ortho = std::max(ortho, (x.transpose() * r).cwiseAbs().maxCoeff() / target->cwiseAbs().maxCoeff());
  }
  report(worst <= 1e-8 && ortho <= 1e-6, "ols-correctness",
         fmt("n=500 m=31, max coef rel err %.3g (tol 1e-8), max |X'r|/|y| %.3g (tol 1e-6)", worst, ortho));
}

void significance_bands() {
  const bool demand = significance_level(20.66) == SignificanceLevel::OnePercent && stars(significance_level(20.66)) == "**";
  const bool hour8 = significance_level(0.02) == SignificanceLevel::NotSignificant && stars(significance_level(0.02)).empty();
  report(demand && hour8, "significance-bands",
         fmt("|t|=20.66 -> %s, |t|=0.02 -> '%s'", stars(significance_level(20.66)).data(),
             stars(significance_level(0.02)).data()));

  // The regression table prints hour7 (t=1.93) with "+" and hour23 (t=-2.56)
  // with "*"; the numeric bands put them at 5% and 1%.
  const auto h7 = significance_level(1.93), h23 = significance_level(-2.56);
  const bool diverge = h7 == SignificanceLevel::FivePercent && stars(h7) != "+" && h23 == SignificanceLevel::OnePercent &&
                       stars(h23) != "*";
  report(diverge, "significance-table-divergence",
         fmt("hour7 t=1.93 -> '%s' (table prints '+'), hour23 t=-2.56 -> '%s' (table prints '*')", stars(h7).data(),
             stars(h23).data()));
}

void closed_loop_signs() {
  ScenarioConfig cfg;
  cfg.elasticity_table = ElasticityTable::self_only(-0.10);
  int passed = 0;
  std::size_t spike_hours = 0;
  std::string first_failure;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto m = testing::august_scenario(seed);
    try {
      const auto r = run_scenario(m.history, m.window, cfg);
      const double beta = r.model.coefficients.at(r.model.spec.index_of(Feature::demand()).value());
      bool ok = beta > 0.0;
      std::size_t spikes = 0;
      for (std::size_t i = 0; i < r.hours(); ++i) {
        if (r.forecast_price[i] <= cfg.flat_rate) continue;
        ++spikes;
        ok = ok && r.dr_demand[i] < r.baseline_demand[i] && r.updated_spot_price[i] < r.forecast_price[i];
      }
      ok = ok && spikes > 0 &&
           *std::max_element(r.updated_spot_price.begin(), r.updated_spot_price.end()) <=
               *std::max_element(r.forecast_price.begin(), r.forecast_price.end());
      spike_hours += spikes;
      if (ok) {
        ++passed;
      } else if (first_failure.empty()) {
        first_failure = fmt(", first failure seed %d", static_cast<int>(seed));
      }
    } catch (const Error& e) {
      if (first_failure.empty()) first_failure = fmt(", seed %d threw: %s", static_cast<int>(seed), e.what());
    }
  }
  report(passed == 100, "closed-loop-sign-properties",
         fmt("%d/100 seeds (diagonal self-elasticity -0.10, flat rate 30), %zu spike hours checked%s", passed,
             spike_hours, first_failure.c_str()));

  // Same markets with the full reference table, for information only.
  int peak_down = 0;
  double energy = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto m = testing::august_scenario(seed);
    const auto r = run_scenario(m.history, m.window, ScenarioConfig{});
    const auto s = impact_summary(r, ScenarioConfig{});
    peak_down += s.peak_price_after < s.peak_price_before;
    energy += s.delta_energy_pct;
  }
  std::printf("[INFO] reference-table-run: peak price lowered in %d/100 seeds, mean energy change %.2f %%\n",
              peak_down, energy / 100.0);
}

void null_response() {
  ScenarioConfig cfg;
  cfg.elasticity_table = ElasticityTable{};
  int passed = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto m = testing::august_scenario(seed);
    const auto r = run_scenario(m.history, m.window, cfg);
    const auto s = impact_summary(r, cfg);
    const bool bits = r.updated_spot_price.size() == r.forecast_price.size() &&
                      std::equal(r.updated_spot_price.begin(), r.updated_spot_price.end(), r.forecast_price.begin(),
                                 [](double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; });
    const bool zero = s.delta_energy == 0.0 && s.delta_energy_pct == 0.0 && s.delta_cost == 0.0 &&
                      s.delta_cost_pct == 0.0 && r.dr_demand == r.baseline_demand;
    passed += bits && zero;
  }
  report(passed == 20, "null-response-invariance",
         fmt("%d/20 seeds with exactly zero deltas and bit-identical updated prices", passed));
}

void published_numbers() {
  const char* data = std::getenv("DR_SPOT_SIM_NEISO_CSV");
  if (data == nullptr || *data == '\0') {
    skip("ct-2014-reproduction", "set DR_SPOT_SIM_NEISO_CSV (and optionally DR_SPOT_SIM_NEISO_CONFIG) to run");
    return;
  }
  try {
    const char* config = std::getenv("DR_SPOT_SIM_NEISO_CONFIG");
    const auto cfg = config && *config ? load_config(config) : ScenarioConfig{};
    std::ifstream in(data);
    if (!in) throw Error(std::string("cannot read ") + data);
    const auto series = parse_hourly_csv(in, cfg.data);
    const auto window = select_window(series, Date{std::chrono::year{2014} / 8 / 18}, 7);
    const auto history = records_before(series, window[0].record.timestamp);
    const auto s = impact_summary(run_scenario(history, window, cfg), cfg);
    const bool ok = s.delta_energy_pct >= -3.5 && s.delta_energy_pct <= -1.0 && s.delta_cost_pct >= -32.0 &&
                    s.delta_cost_pct <= -20.0;
    report(ok, "ct-2014-reproduction",
           fmt("energy %.2f %% (band [-3.5, -1.0]), cost %.2f %% (band [-32, -20]), holdout FERMS %.2f %%",
               s.delta_energy_pct, s.delta_cost_pct, s.holdout_ferms),
           false);
  } catch (const std::exception& e) {
    report(false, "ct-2014-reproduction", e.what(), false);
  }
}

void determinism_and_round_trip(const fs::path& source) {
  const auto data = (source / "data/synthetic_summer_2014.csv").string();
  const auto config = (source / "config/default.json").string();
  const auto scratch = fs::temp_directory_path() / "drsim_acceptance";
  fs::remove_all(scratch);
  bool same = true;
  std::string detail;
  std::ostringstream sink;
  for (const char* run : {"a", "b"}) {
    const auto out = (scratch / run).string();
    const char* argv[] = {"dr_spot_sim", "simulate", "--data", data.c_str(), "--config", config.c_str(),
                          "--window-start", "2014-08-18", "--days", "7", "--out", out.c_str()};
    if (cli::run(static_cast<int>(std::size(argv)), argv, sink, sink) != cli::kExitOk) {
      same = false;
      detail = "simulate failed: " + sink.str();
    }
  }
  std::size_t files = 0;
  if (same) {
    for (const auto& entry : fs::directory_iterator(scratch / "a")) {
      ++files;
      const auto name = entry.path().filename();
      if (slurp(entry.path()) != slurp(scratch / "b" / name)) {
        same = false;
        detail = name.string() + " differs";
      }
    }
  }
  fs::remove_all(scratch);

  const auto original = slurp(data);
  std::istringstream in(original);
  const auto series = parse_hourly_csv(in);
  std::ostringstream written;
  write_hourly_csv(written, series);
  std::istringstream again(written.str());
  const bool round_trip = parse_hourly_csv(again) == series && written.str() == original;

  report(same && files == 6 && round_trip, "determinism-and-round-trip",
         fmt("%zu simulate outputs byte-identical across runs%s; %zu-hour CSV round-trip %s", files,
             detail.empty() ? "" : (" (" + detail + ")").c_str(), series.size(), round_trip ? "lossless" : "LOSSY"));
}

}  // namespace

int main() {
  elasticity_oracle();
  inverse_consistency();
  ols_correctness();
  significance_bands();
  closed_loop_signs();
  null_response();
  published_numbers();
  determinism_and_round_trip(DRSIM_SOURCE_DIR);
  std::printf("%s: %d required criteria failed\n", failures == 0 ? "OK" : "FAILED", failures);
  return failures == 0 ? 0 : 1;
}
