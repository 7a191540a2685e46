#pragma once

#include <cstdint>

#include "cble/levy_env.hpp"
#include "cble/mc_runner.hpp"

namespace cble {

struct ExpFunctionalValue {
  double value = 0.0;
  double beta = 0.0;
  double t = 0.0;
  double error_estimate = 0.0;  // 0: the left-value sum is exact per policy
};

// I_{0,t}(beta xi) = int_0^t exp(-beta xi_s) ds under the piecewise-constant
// (left value) policy: exact sum of segment widths times exp(-beta * left).
ExpFunctionalValue exp_functional(const EnvPath& path, double beta, double t);

struct annealed_options {
  double grid_dt = 0.125;
  exec_mode mode = exec_mode::parallel;
  bool antithetic = false;
};

// Monte Carlo mean of exp{-z (beta C I_{0,t}(beta xi))^{-1/beta}} over
// independent environments: the stable-case annealed non-explosion
// probability.
McEstimate stable_annealed_nonexplosion(double z, double t, double beta,
                                        double c, const LevyTriplet& triplet,
                                        std::size_t n_paths,
                                        std::uint64_t seed,
                                        const annealed_options& opt = {});

}  // namespace cble
