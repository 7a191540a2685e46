#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cble/levy_env.hpp"
#include "cble/mechanism.hpp"

namespace cble {

// Solution of the backward equation d/ds v = e^{xi_s} psi0(v e^{-xi_s}) on
// [0,t] with terminal datum v(t) = lambda, under the segment-frozen
// (piecewise-constant) environment policy.
struct QuenchedSolution {
  std::vector<double> s_grid;
  std::vector<double> v_values;
  double lambda = 0.0;
  std::uint64_t env_seed = 0;
  struct diagnostics_t {
    long steps = 0;
    double max_local_error = 0.0;
  } diagnostics;

  double v_at_zero() const { return v_values.front(); }
};

struct solve_options {
  // Use the adaptive embedded stepper even when the stable closed form
  // applies; tests cross the two routes against each other.
  bool force_generic = false;
  double abs_tol = 1e-10;
};

QuenchedSolution solve_backward(const Mechanism& mech, const EnvPath& path,
                                double t, double lambda,
                                const solve_options& opt = {});

struct nonexplosion_options {
  // Run the lambda -> 0 sequence even when a fast path applies.
  bool force_lambda_limit = false;
  int max_halvings = 40;
  double stop_tol = 1e-8;
  solve_options solver;
};

// lim_{lambda->0} v_t(0, lambda, xi), the quenched explosion functional.
double quenched_v0(const Mechanism& mech, const EnvPath& path, double t,
                   const nonexplosion_options& opt = {});

// exp{-z v0}; stable mechanisms use the closed form
// exp{-z (beta C I_{0,t}(beta xi))^{-1/beta}} directly.
double nonexplosion_prob_given_env(const Mechanism& mech, const EnvPath& path,
                                   double z, double t,
                                   const nonexplosion_options& opt = {});

// exp{-z v_t(0, lambda e^{-x}, xi - x)}.
double quenched_laplace(const Mechanism& mech, const EnvPath& path, double z,
                        double x, double lambda, double t);

struct BoundReport {
  double v0 = 0.0;             // solver value v_t(0, lambda, xi)
  double upper = 0.0;          // lambda * exp(int_0^t Phi_lambda(-xi_s) ds)
  double upper_slack = 0.0;    // upper - v0
  bool upper_ok = false;
  std::optional<double> v_limit;       // lambda->0 limit when (C) supplied
  std::optional<double> lower;         // (C beta I)^{-1/beta}
  std::optional<double> lower_slack;   // v_limit - lower
  bool lower_ok = true;
};

// Checks the integrated upper bound on v and, when condition (C) parameters
// are supplied, the stable lower bound on the lambda->0 limit.
BoundReport bound_check(const Mechanism& mech, const EnvPath& path,
                        double lambda, double t,
                        std::optional<stable_params> cond_c = {},
                        double tol = 1e-8);

}  // namespace cble
