#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cble/levy_env.hpp"
#include "cble/math_util.hpp"
#include "cble/mc_runner.hpp"

namespace cble {

struct fluctuation_options {
  double grid_dt = 0.01;  // skeleton step of the random-walk skeleton
  exec_mode mode = exec_mode::parallel;
};

// MC estimate of (1/t) int_0^t 1{xi_s >= 0} ds at the horizon t; converges
// to the Spitzer index when the condition holds.
McEstimate spitzer_rho(const LevyTriplet& triplet, double t,
                       std::size_t n_paths, std::uint64_t seed,
                       const fluctuation_options& opt = {});

struct survival_fit {
  std::vector<double> t;
  std::vector<double> p;
  std::vector<double> se;
  std::vector<double> dropped_t;  // cells with zero surviving paths
  line_fit fit;                   // log p vs log t, delta-method weights
  bool power_law = true;          // false when the series plateaus
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
};

// P_x(sup_{s<=t} xi_s < 0) on a growing t-grid with a log-log rate fit;
// the fitted slope estimates -rho.
survival_fit survival_exponent(const LevyTriplet& triplet, double start_x,
                               std::span<const double> t_grid,
                               std::size_t n_paths, std::uint64_t seed,
                               const fluctuation_options& opt = {});

enum class ladder_direction { ascending, descending };

struct renewal_options {
  double grid_dt = 1.6e-3;
  double t_cap = 2e4;  // chains still below max(x_grid) by then are censored
  exec_mode mode = exec_mode::parallel;
};

struct renewal_table {
  std::vector<double> x;
  std::vector<double> u_hat;  // expected ladder points in [0,x], origin counted
  std::vector<double> se;
  std::vector<double> excluded_x;  // below the skeleton resolution floor
  std::size_t n_chains = 0;
  std::size_t censored = 0;
  double grid_dt = 0.0;
  std::string caveat;
};

// Expected number of strict-record points of the skeleton walk with height
// <= x (origin included, matching U(0)=1 for the irregular discrete walk).
renewal_table empirical_renewal(const LevyTriplet& triplet,
                                ladder_direction direction,
                                std::span<const double> x_grid,
                                std::size_t n_chains, std::uint64_t seed,
                                const renewal_options& opt = {});

struct martingale_report {
  std::vector<double> t;
  std::vector<double> stat;  // E_x[U(-xi_t) 1{sup xi <= t < 0}]
  std::vector<double> se;
  double max_dev_se = 0.0;  // max |stat - stat(t_0)| in combined SE units
  std::string note;
};

// Checks constancy in t of E_x[U(-xi_t) 1{sup < 0}]; U defaults to the
// Brownian-analytic U(y) = y.
martingale_report martingale_check(
    const LevyTriplet& triplet, double start_x, std::span<const double> t_grid,
    std::size_t n_paths, std::uint64_t seed, const fluctuation_options& = {},
    std::function<double(double)> renewal_u = {});

// Bundle for the CLI fluctuation experiment.
struct FluctuationStats {
  McEstimate rho_hat;
  survival_fit exponent;
  renewal_table renewal;
  martingale_report martingale;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
};

}  // namespace cble
