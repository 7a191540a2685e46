#include "cble/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cble/math_util.hpp"
#include "cble/quadrature.hpp"
#include "cutoff_ladder.hpp"

namespace cble {

const char* to_string(cond_verdict v) {
  switch (v) {
    case cond_verdict::holds:
      return "Holds";
    case cond_verdict::fails:
      return "Fails";
    default:
      return "Inconclusive";
  }
}

namespace {

cond_verdict verdict_from(detail::ladder_class c) {
  switch (c) {
    case detail::ladder_class::converges:
      return cond_verdict::holds;
    case detail::ladder_class::diverges:
      return cond_verdict::fails;
    default:
      return cond_verdict::inconclusive;
  }
}

}  // namespace

double a_xi(const LevyTriplet& triplet, double x) {
  if (!(x > 0.0)) throw std::invalid_argument("a_xi: x must be > 0");
  return -triplet.drift + triplet.jumps.neg_tail(1.0) +
         triplet.jumps.neg_tail_integral(x);
}

ConditionReport check_condition_Axi(const Mechanism& mech,
                                    const LevyTriplet& triplet, double lambda,
                                    double a) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("check_condition_Axi: lambda must be > 0");
  if (!(a > 0.0))
    throw std::invalid_argument("check_condition_Axi: a must be > 0");

  ConditionReport rep;
  rep.condition = "Axi_integral";

  // |dPhi_lambda(u)| = s * int y e^{-sy} mu_bar(y) dy du with s = lambda e^u
  auto integrand = [&](double u) {
    const double A = a_xi(triplet, u);
    if (!(A > 0.0))
      throw std::invalid_argument(
          "check_condition_Axi: A_xi vanishes on the range; condition "
          "ill-posed");
    const double s = lambda * std::exp(u);
    if (std::isinf(s)) return 0.0;
    return u / A * s * mech.tail_laplace(s, 1);
  };

  quad_options opt;
  opt.rel_tol = 1e-5;  // nested quadrature noise floor; the ladder only
  opt.abs_tol = 1e-10;  // needs percent-level increments
  const double u_cap = 500.0;  // exp(u) stays finite in double
  double lo = a;
  double acc = 0.0;
  for (double hi = 2.0 * a; lo < u_cap; hi *= 2.0) {
    const double h = std::min(hi, u_cap);
    acc += integrate_or_throw(integrand, lo, h, opt);
    rep.evidence.push_back(acc);
    lo = h;
  }
  rep.verdict = verdict_from(detail::classify_partials(rep.evidence, &rep.note));

  std::ostringstream note;
  note << "range [" << a << ", " << u_cap << "] doubled geometrically; "
       << rep.note;
  rep.note = note.str();
  return rep;
}

ConditionReport check_condition_E1(const Mechanism& mech, double lambda) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("check_condition_E1: lambda must be > 0");

  ConditionReport rep;
  rep.condition = "E1_integral";

  auto integrand = [&](double y) {
    return expint_e1(lambda * y) * mech.mu_bar(y);
  };
  quad_options opt;
  opt.rel_tol = 1e-8;
  opt.abs_tol = 1e-13;

  // bulk (no singularity): [1e-2, inf)
  double acc = integrate_half_line(integrand, 1e-2, opt).value;
  rep.evidence.push_back(acc);
  // shrinking cutoffs toward the log singularity at 0
  double upper = 1e-2;
  for (double eps = 1e-3; eps > 0.9e-12; eps *= 0.1) {
    acc += integrate_or_throw(integrand, eps, upper, opt);
    rep.evidence.push_back(acc);
    upper = eps;
  }
  rep.verdict = verdict_from(detail::classify_partials(rep.evidence, &rep.note));
  return rep;
}

ConditionReport check_condition_B(const Mechanism& mech) {
  ConditionReport rep;
  rep.condition = "B";

  if (const auto* p = mech.as_stable()) {
    rep.verdict = cond_verdict::holds;
    std::ostringstream note;
    note << "stable: int z ln^2(z) z^{-2-beta} dz converges near 0 for beta="
         << p->beta;
    rep.note = note.str();
    return rep;
  }
  if (mech.as_atoms()) {
    rep.verdict = cond_verdict::holds;
    rep.note = "finite atoms: no mass at 0+";
    return rep;
  }

  // int_eps^z0 z ln^2(z) mu(dz) by parts against the tail:
  //   g(eps) mu_bar(eps) - g(z0) mu_bar(z0) + int g'(z) mu_bar(z) dz,
  // g(z) = z ln^2 z, g'(z) = ln^2 z + 2 ln z.
  const double z0 = 0.25;
  auto gp = [](double z) {
    const double l = std::log(z);
    return l * l + 2.0 * l;
  };
  auto g = [](double z) {
    const double l = std::log(z);
    return z * l * l;
  };
  quad_options opt;
  opt.rel_tol = 1e-8;
  opt.abs_tol = 1e-13;
  double tail_part = 0.0;
  double upper = z0;
  for (double eps = z0 * 0.1; eps > 0.9e-12; eps *= 0.1) {
    tail_part += integrate_or_throw(
        [&](double z) { return gp(z) * mech.mu_bar(z); }, eps, upper, opt);
    rep.evidence.push_back(g(eps) * mech.mu_bar(eps) -
                           g(z0) * mech.mu_bar(z0) + tail_part);
    upper = eps;
  }
  rep.verdict = verdict_from(detail::classify_partials(rep.evidence, &rep.note));
  if (rep.verdict == cond_verdict::holds)
    rep.note += "; sufficient form, implies (B) via the linear renewal bounds";
  return rep;
}

ConditionReport check_condition_C(const Mechanism& mech, double beta, double c,
                                  std::span<const double> lambda_grid) {
  if (!(beta > -1.0 && beta < 0.0) || !(c < 0.0))
    throw std::invalid_argument("check_condition_C: need beta in (-1,0), c<0");

  ConditionReport rep;
  rep.condition = "C";

  std::vector<double> grid(lambda_grid.begin(), lambda_grid.end());
  if (grid.empty()) {
    for (int i = 0; i <= 120; ++i)
      grid.push_back(std::pow(10.0, -6.0 + 0.1 * i));
  }

  const double slack = 1e-9;
  double worst_ratio = 0.0;
  double worst_lambda = 0.0;
  std::vector<double> abs_vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double bound = -c * std::pow(grid[i], 1.0 + beta);
    abs_vals[i] = mech.abs_psi0(grid[i]);
    const double ratio = abs_vals[i] / bound;
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      worst_lambda = grid[i];
    }
  }
  rep.evidence = {worst_ratio, worst_lambda};

  if (worst_ratio > 1.0 + slack) {
    rep.verdict = cond_verdict::fails;
    std::ostringstream note;
    note << "violated at lambda=" << worst_lambda << " with |psi0|/bound="
         << worst_ratio;
    rep.note = note.str();
    return rep;
  }

  // endpoint asymptotic slopes of log|psi0| vs log(lambda)
  auto slope = [&](std::size_t i, std::size_t j) {
    return (std::log(abs_vals[j]) - std::log(abs_vals[i])) /
           (std::log(grid[j]) - std::log(grid[i]));
  };
  const double s0 = slope(0, 1);
  const double s1 = slope(grid.size() - 2, grid.size() - 1);
  std::ostringstream note;
  note << "verified on grid [" << grid.front() << ", " << grid.back()
       << "]; endpoint slopes " << s0 << " (0), " << s1 << " (inf) vs "
       << 1.0 + beta;
  if (s0 < (1.0 + beta) - 0.05) {
    rep.verdict = cond_verdict::fails;
    note << "; asymptotic violation as lambda -> 0";
  } else if (s1 > (1.0 + beta) + 0.05) {
    rep.verdict = cond_verdict::fails;
    note << "; asymptotic violation as lambda -> inf";
  } else {
    rep.verdict = cond_verdict::holds;
  }
  rep.note = note.str();
  return rep;
}

}  // namespace cble
