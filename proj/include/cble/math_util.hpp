#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cble {

// Compensated (Kahan) accumulator; keeps reductions order-stable and
// accurate over long Monte Carlo sums.
struct kahan_sum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

// Exponential integral E1(w) = int_1^inf exp(-w y)/y dy, w > 0.
// Power series for w <= 1, modified Lentz continued fraction above.
// Relative accuracy ~1e-14 across (0, 700]; underflows to 0 beyond.
double expint_e1(double w);

// Regularized upper incomplete gamma Q(a, x) = Gamma(a,x)/Gamma(a).
double gamma_q(double a, double x);

// Standard normal CDF.
double norm_cdf(double x);

struct line_fit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_se = 0.0;
};

// Weighted least squares y ~ intercept + slope*x. Weights default to 1.
line_fit fit_line(std::span<const double> x, std::span<const double> y,
                  std::span<const double> w = {});

// Chi-square goodness-of-fit p-value for observed counts against expected
// counts (same length, expected > 0); dof = bins - 1 - extra_constraints.
double chi2_gof_pvalue(std::span<const double> observed,
                       std::span<const double> expected,
                       int extra_constraints = 0);

}  // namespace cble
