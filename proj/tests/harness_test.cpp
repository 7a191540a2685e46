#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "cble/exp_functional.hpp"
#include "cble/harness.hpp"
#include "cble/rng.hpp"

using namespace cble;

namespace {

json critical_config(std::size_t n_paths) {
  return {{"experiment", "critical"},
          {"mechanism", {{"kind", "stable"}, {"beta", -0.5}, {"c", -1.0}}},
          {"environment", {{"drift", 0.0}, {"sigma", 1.0}}},
          {"z", 1.0},
          {"t_grid", {{"start", 2.0}, {"stop", 16.0}, {"ratio", 2.0}}},
          {"n_paths", n_paths},
          {"grid_dt", 0.05},
          {"seed", 4242}};
}

}  // namespace

TEST_CASE("fit_rate on exact laws") {
  std::vector<double> t, p;
  for (double x = 1.0; x <= 128.0; x *= 2.0) {
    t.push_back(x);
    p.push_back(3.0 * std::pow(x, -0.5));
  }
  const auto f = fit_rate(t, p);
  CHECK(f.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<double> flat(t.size(), 0.25);
  CHECK(fit_rate(t, flat).slope == doctest::Approx(0.0).epsilon(1e-12));

  std::vector<double> bad = p;
  bad[2] = 0.0;
  CHECK_THROWS_AS(fit_rate(t, bad), std::invalid_argument);
}

TEST_CASE("fit_rate recovers a noisy synthetic power law") {
  philox4x32 rng(99, 0);
  const double truth = -0.5;
  int covered = 0;
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> t, p, se;
    for (double x = 4.0; x <= 512.0; x *= 2.0) {
      const double mean = 2.0 * std::pow(x, truth);
      const double sd = 0.03 * mean;
      t.push_back(x);
      p.push_back(mean + sd * rng.next_gauss());
      se.push_back(sd);
    }
    const auto f = fit_rate(t, p, se);
    if (std::abs(f.slope - truth) <= 2.0 * f.slope_se) ++covered;
  }
  CHECK(covered >= 90);
}

TEST_CASE("confidence intervals are honest on a known mean") {
  int covered = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto est =
        mc_estimate(400, 1000 + rep, exec_mode::parallel, [&](std::size_t i) {
          philox4x32 rng(1000 + rep, i);
          return rng.next_double() <= 0.5 ? 1.0 : 0.0;
        });
    if (est.ci_lo <= 0.5 && 0.5 <= est.ci_hi) ++covered;
  }
  CHECK(covered >= 90);
}

TEST_CASE("serial and parallel kernels are bit-identical") {
  LevyTriplet env;
  env.sigma = 1.0;
  annealed_options par, ser;
  par.mode = exec_mode::parallel;
  ser.mode = exec_mode::serial;
  const auto a =
      stable_annealed_nonexplosion(1.0, 2.0, -0.5, -1.0, env, 500, 77, par);
  const auto b =
      stable_annealed_nonexplosion(1.0, 2.0, -0.5, -1.0, env, 500, 77, ser);
  CHECK(a.mean == b.mean);
  CHECK(a.se == b.se);
}

TEST_CASE("annealed series agrees with the single-t estimator") {
  LevyTriplet env;
  env.sigma = 1.0;
  const auto mech = Mechanism::stable(-0.5, -1.0);
  std::vector<double> grid = {1.0, 2.0, 4.0};
  const auto series = annealed_nonexplosion_series(
      mech, env, 1.0, grid, 2000, 0.05, 5, exec_mode::parallel);
  REQUIRE(series.size() == 3);
  annealed_options ao;
  ao.grid_dt = 0.05;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto single = stable_annealed_nonexplosion(
        1.0, grid[j], -0.5, -1.0, env, 2000, 91, ao);
    const double comb =
        std::sqrt(series[j].se * series[j].se + single.se * single.se);
    CHECK(std::abs(series[j].mean - single.mean) < 3.0 * comb);
  }
  // sanity: non-explosion probabilities decrease with the horizon
  CHECK(series[0].mean > series[2].mean);
}

TEST_CASE("generic-mechanism series goes through the lambda limit") {
  LevyTriplet env;
  env.sigma = 0.5;
  const auto mech = Mechanism::finite_atoms({{1.0, 1.0}});
  std::vector<double> grid = {1.0};
  const auto series = annealed_nonexplosion_series(
      mech, env, 1.0, grid, 50, 0.05, 5, exec_mode::parallel);
  CHECK(series[0].mean == doctest::Approx(1.0));
  CHECK(series[0].se == 0.0);
}

TEST_CASE("antithetic pairing reduces variance here") {
  LevyTriplet env;
  env.sigma = 1.0;
  const auto mech = Mechanism::stable(-0.5, -1.0);
  std::vector<double> grid = {2.0};
  const auto plain = annealed_nonexplosion_series(
      mech, env, 1.0, grid, 3000, 0.05, 5, exec_mode::parallel, false);
  const auto anti = annealed_nonexplosion_series(
      mech, env, 1.0, grid, 3000, 0.05, 5, exec_mode::parallel, true);
  CHECK(anti[0].se < plain[0].se);
  CHECK(std::abs(anti[0].mean - plain[0].mean) <
        4.0 * std::sqrt(anti[0].se * anti[0].se + plain[0].se * plain[0].se));
}

TEST_CASE("subcritical runner produces a plateau verdict") {
  json cfg_json = {
      {"experiment", "subcritical"},
      {"mechanism", {{"kind", "stable"}, {"beta", -0.5}, {"c", -1.0}}},
      {"environment", {{"drift", -1.0}, {"sigma", 1.0}}},
      {"z", 1.0},
      {"t_grid", {4.0, 8.0, 16.0}},
      {"n_paths", 800},
      {"grid_dt", 0.05},
      {"seed", 11}};
  const auto cfg = ExperimentConfig::from_json(cfg_json);
  const auto res = run_subcritical(cfg);
  CHECK(res.hypotheses_met);
  CHECK(res.preamble["condition_E1"]["verdict"] == "Holds");
  CHECK(res.preamble["environment_mean"].get<double>() < 0.0);
  CHECK(res.estimates.back().mean > 0.0);
  CHECK(res.estimates.back().mean < 1.0);
}

TEST_CASE("critical runner fits a negative slope") {
  // short pre-asymptotic grid: the decay is steeper than the t -> inf rate,
  // so only the sign and sanity of the fit are asserted here; the acceptance
  // suite runs the full grid
  const auto cfg = ExperimentConfig::from_json(critical_config(2000));
  const auto res = run_critical(cfg);
  CHECK(res.hypotheses_met);
  CHECK(res.fit.slope < -0.2);
  CHECK(res.fit.slope > -3.0);
  CHECK(res.rho_used == doctest::Approx(0.5).epsilon(0.2));
  CHECK(res.compensated_spread >= 1.0);
}

TEST_CASE("re-running a config reproduces outputs byte for byte") {
  const auto cfg = ExperimentConfig::from_json(critical_config(300));
  const auto a = run_critical(cfg);
  const auto b = run_critical(cfg);
  CHECK(a.series_csv() == b.series_csv());
  CHECK(a.to_json().dump(2) == b.to_json().dump(2));
}

TEST_CASE("config parsing covers the sde environment route") {
  json j = {{"experiment", "grey"},
            {"mechanism", {{"kind", "atoms"},
                           {"atoms", {{{"mass", 1.0}, {"size", 1.0}}}}}},
            {"environment_sde",
             {{"alpha", 0.0}, {"delta", 0.0}, {"sigma", 1.0}}}};
  const auto cfg = ExperimentConfig::from_json(j);
  CHECK(cfg.triplet.drift == doctest::Approx(-0.5));
  const auto rep = run_grey(cfg);
  CHECK(rep["grey"]["verdict"] == "Conservative");
}

TEST_CASE("cli end to end: reruns are byte-identical and exit codes work") {
  const std::string cli = CBLE_CLI_PATH;
  const std::string dir = "/tmp/cble_cli_test";
  REQUIRE(std::system(("rm -rf " + dir + " && mkdir -p " + dir).c_str()) == 0);

  json cfg = {{"experiment", "sample-env"},
              {"environment", {{"drift", -0.25}, {"sigma", 1.0}}},
              {"start", 0.0},
              {"horizon", 2.0},
              {"grid_n", 101},
              {"seed", 31}};
  {
    std::ofstream os(dir + "/cfg.json");
    os << cfg.dump(2);
  }
  auto run = [&](const std::string& out) {
    const std::string cmd = cli + " sample-env --config " + dir +
                            "/cfg.json --out " + dir + "/" + out +
                            " > /dev/null 2>&1";
    return std::system(cmd.c_str());
  };
  REQUIRE(run("a") == 0);
  REQUIRE(run("b") == 0);

  auto slurp = [](const std::string& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
  };
  const auto csv_a = slurp(dir + "/a/env_path.csv");
  const auto csv_b = slurp(dir + "/b/env_path.csv");
  REQUIRE(!csv_a.empty());
  CHECK(csv_a == csv_b);
  CHECK(slurp(dir + "/a/result.json") == slurp(dir + "/b/result.json"));
}
