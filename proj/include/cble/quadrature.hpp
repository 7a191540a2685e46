#pragma once

#include <functional>

namespace cble {

struct quad_result {
  double value = 0.0;
  double error = 0.0;  // absolute error estimate
  bool converged = false;
  int evaluations = 0;
};

struct quad_options {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_intervals = 4000;
};

using quad_fn = std::function<double(double)>;

// Adaptive Gauss-Kronrod (G7,K15) on a finite interval. Endpoint
// singularities are never evaluated (all nodes are interior) and are
// resolved by bisection toward the endpoint.
quad_result integrate(const quad_fn& f, double a, double b,
                      const quad_options& opt = {});

// int_a^inf f, mapped through x = a + u/(1-u).
quad_result integrate_half_line(const quad_fn& f, double a,
                                const quad_options& opt = {});

// int_0^b f with an integrable power singularity at 0, flattened by x = u^2.
quad_result integrate_sqrt_singular0(const quad_fn& f, double b,
                                     const quad_options& opt = {});

// As above but throws cble::numeric_error (message carries the residual
// estimate) when the tolerance was not reached.
double integrate_or_throw(const quad_fn& f, double a, double b,
                          const quad_options& opt = {});

}  // namespace cble
