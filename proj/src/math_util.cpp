#include "cble/math_util.hpp"

#include <cmath>
#include <stdexcept>

#include "cble/errors.hpp"

namespace cble {

namespace {
constexpr double kEulerGamma = 0.57721566490153286060651209008240;
}

double expint_e1(double w) {
  if (!(w > 0.0)) throw std::invalid_argument("expint_e1: w must be > 0");
  if (w > 700.0) return 0.0;
  if (w <= 1.0) {
    // E1(w) = -gamma - ln w + sum_{k>=1} (-1)^{k+1} w^k / (k k!)
    double sum = 0.0;
    double term = 1.0;
    for (int k = 1; k <= 40; ++k) {
      term *= -w / k;
      const double add = -term / k;
      sum += add;
      if (std::abs(add) < 1e-18 * (std::abs(sum) + 1e-300)) break;
    }
    return -kEulerGamma - std::log(w) + sum;
  }
  // Continued fraction e^{-w} / (w + 1 - 1/(w+3 - 4/(w+5 - ...)))
  // evaluated with the modified Lentz algorithm.
  const double tiny = 1e-300;
  double b = w + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 200; ++i) {
    const double a = -static_cast<double>(i) * static_cast<double>(i);
    b += 2.0;
    d = a * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + a / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-w) * h;
}

namespace {

double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("gamma_q: bad args");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

line_fit fit_line(std::span<const double> x, std::span<const double> y,
                  std::span<const double> w) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line: need >= 2 matching points");
  if (!w.empty() && w.size() != x.size())
    throw std::invalid_argument("fit_line: weight size mismatch");

  const std::size_t n = x.size();
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    sw += wi;
    swx += wi * x[i];
    swy += wi * y[i];
    swxx += wi * x[i] * x[i];
    swxy += wi * x[i] * y[i];
  }
  const double det = sw * swxx - swx * swx;
  if (det == 0.0) throw numeric_error("fit_line: degenerate abscissae");

  line_fit out;
  out.slope = (sw * swxy - swx * swy) / det;
  out.intercept = (swy - out.slope * swx) / sw;

  const double ybar = swy / sw;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    const double fit = out.intercept + out.slope * x[i];
    ss_res += wi * (y[i] - fit) * (y[i] - fit);
    ss_tot += wi * (y[i] - ybar) * (y[i] - ybar);
  }
  out.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;

  // slope standard error from residual variance (unweighted dof n-2)
  if (n > 2) {
    const double sigma2 = ss_res / (static_cast<double>(n) - 2.0);
    out.slope_se = std::sqrt(sigma2 * sw / det);
  }
  return out;
}

double chi2_gof_pvalue(std::span<const double> observed,
                       std::span<const double> expected,
                       int extra_constraints) {
  if (observed.size() != expected.size() || observed.size() < 2)
    throw std::invalid_argument("chi2_gof_pvalue: bad bins");
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(expected[i] > 0.0))
      throw std::invalid_argument("chi2_gof_pvalue: expected must be > 0");
    const double d = observed[i] - expected[i];
    stat += d * d / expected[i];
  }
  const double dof =
      static_cast<double>(observed.size()) - 1.0 - extra_constraints;
  if (dof <= 0) throw std::invalid_argument("chi2_gof_pvalue: dof <= 0");
  return gamma_q(0.5 * dof, 0.5 * stat);
}

}  // namespace cble
