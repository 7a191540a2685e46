#include <doctest.h>

#include <cmath>
#include <vector>

#include "cble/conditions.hpp"
#include "cble/errors.hpp"
#include "cble/mechanism.hpp"
#include "cble/quadrature.hpp"
#include "cble/rng.hpp"

using namespace cble;

namespace {

// the stable tail wrapped as a generic parametric mechanism: exercises the
// quadrature route against the closed forms
Mechanism stable_as_parametric(double beta, double c) {
  const double coeff = -c / std::tgamma(-beta);
  tail_spec spec;
  spec.tail = [coeff, beta](double y) {
    return coeff * std::pow(y, -(1.0 + beta));
  };
  spec.integrable_certificate = true;
  return Mechanism::parametric_tail(std::move(spec));
}

// mu_bar(y) = 1/(y ln^2(1/y)) below y0, exponential continuation above:
// integrable at 0, infinite mean density ~ y^{-2} ln^{-2}; the boundary case
// that fails the E1-moment and A_xi-weighted integral tests and the
// sufficient form of (B)
Mechanism log_boundary_mech() {
  const double y0 = std::exp(-2.0);
  const double at_y0 = 1.0 / (y0 * 4.0);
  tail_spec spec;
  spec.tail = [y0, at_y0](double y) {
    if (y <= y0) {
      const double l = std::log(1.0 / y);
      return 1.0 / (y * l * l);
    }
    return at_y0 * std::exp(-(y - y0));
  };
  spec.small_tail_integral = [y0](double eps) {
    // int_0^eps dy/(y ln^2(1/y)) = 1/ln(1/eps) for eps <= y0
    if (eps > y0) throw std::invalid_argument("out of closed-form range");
    return 1.0 / std::log(1.0 / eps);
  };
  spec.integrable_certificate = true;
  return Mechanism::parametric_tail(std::move(spec));
}

// mu(dx) = x^{-2} dx on (1, inf): mu_bar(y) = min(1, 1/y); the Grey
// boundary case with |psi0(l)| ~ l log(1/l)
Mechanism log_grey_mech() {
  tail_spec spec;
  spec.tail = [](double y) { return y < 1.0 ? 1.0 : 1.0 / y; };
  spec.integrable_certificate = true;
  return Mechanism::parametric_tail(std::move(spec));
}

}  // namespace

TEST_CASE("psi0 closed forms") {
  const auto st = Mechanism::stable(-0.5, -1.0);
  CHECK(st.psi0(4.0) == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(st.psi0(0.0) == 0.0);

  const auto at = Mechanism::finite_atoms({{1.0, 1.0}});
  CHECK(at.psi0(1.0) ==
        doctest::Approx(-(1.0 - std::exp(-1.0))).epsilon(1e-14));
  CHECK(at.psi0(1.0) == doctest::Approx(-0.632121).epsilon(1e-5));
  CHECK(at.psi0(0.0) == 0.0);
}

TEST_CASE("parametric psi0 matches the stable closed form") {
  const auto gen = stable_as_parametric(-0.5, -1.0);
  const auto st = Mechanism::stable(-0.5, -1.0);
  for (double l : {1e-6, 1e-3, 0.1, 1.0, 4.0, 100.0, 1e5})
    CHECK(gen.psi0(l) == doctest::Approx(st.psi0(l)).epsilon(1e-8));
}

TEST_CASE("psi0 shape invariants on random mechanisms") {
  philox4x32 rng(2024, 0);
  std::vector<Mechanism> mechs;
  mechs.push_back(Mechanism::stable(-0.7, -0.3));
  mechs.push_back(Mechanism::stable(-0.2, -2.0));
  mechs.push_back(Mechanism::finite_atoms({{0.5, 0.2}, {1.5, 2.0}}));
  mechs.push_back(log_grey_mech());
  for (const auto& m : mechs) {
    for (int i = 0; i < 40; ++i) {
      const double a = std::exp(6.0 * rng.next_double() - 3.0);
      const double b = std::exp(6.0 * rng.next_double() - 3.0);
      const double lo = std::min(a, b), hi = std::max(a, b);
      // increasing
      CHECK(m.abs_psi0(hi) >= m.abs_psi0(lo) * (1.0 - 1e-9));
      // midpoint concavity
      CHECK(m.abs_psi0(0.5 * (lo + hi)) >=
            0.5 * (m.abs_psi0(lo) + m.abs_psi0(hi)) * (1.0 - 1e-9));
      // scaling |psi0(theta)| <= k |psi0(theta/k)| for k > 1
      const double k = 1.0 + 9.0 * rng.next_double();
      CHECK(m.abs_psi0(a) <= k * m.abs_psi0(a / k) * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("grey classification") {
  // stable fast path over a parameter sweep
  for (double beta : {-0.9, -0.5, -0.1})
    for (double c : {-0.1, -1.0, -10.0})
      CHECK(grey_classify(Mechanism::stable(beta, c)).verdict ==
            grey_class::explosive);

  CHECK(grey_classify(Mechanism::finite_atoms({{1.0, 1.0}})).verdict ==
        grey_class::conservative);

  // numeric route on the stable tail: I(0) = int_0^1 l^{-1/2} dl = 2
  const auto rep = grey_classify(stable_as_parametric(-0.5, -1.0));
  CHECK(rep.verdict == grey_class::explosive);
  CHECK(rep.evidence.back() == doctest::Approx(2.0).epsilon(1e-5));

  // log-singular boundary case diverges slowly: conservative
  CHECK(grey_classify(log_grey_mech()).verdict == grey_class::conservative);

  // finite-mean parametric tail
  tail_spec exp_tail;
  exp_tail.tail = [](double y) { return std::exp(-y); };
  exp_tail.integrable_certificate = true;
  CHECK(grey_classify(Mechanism::parametric_tail(std::move(exp_tail))).verdict ==
        grey_class::conservative);
}

TEST_CASE("integrability gate rejects mu_bar = 1/y") {
  tail_spec bad;
  bad.tail = [](double y) { return y < 1.0 ? 1.0 / y : 0.0; };
  bad.support_hi = 1.0;
  bad.integrable_certificate = true;  // certificate cannot override divergence
  CHECK_THROWS_AS(Mechanism::parametric_tail(std::move(bad)),
                  std::invalid_argument);
}

TEST_CASE("log-singular tails demand the closed-form small integral") {
  // same tail as log_boundary_mech but without small_tail_integral: the
  // mass below the quadrature floor is unresolvable and must error out
  const double y0 = std::exp(-2.0);
  const double at_y0 = 1.0 / (y0 * 4.0);
  tail_spec spec;
  spec.tail = [y0, at_y0](double y) {
    if (y <= y0) {
      const double l = std::log(1.0 / y);
      return 1.0 / (y * l * l);
    }
    return at_y0 * std::exp(-(y - y0));
  };
  spec.integrable_certificate = true;
  CHECK_THROWS_AS(Mechanism::parametric_tail(std::move(spec)),
                  cble::numeric_error);
}

TEST_CASE("phi_lambda") {
  // mu_bar(y) = e^{-y}: Phi_lambda(u) = 1/(1 + lambda e^u)
  tail_spec exp_tail;
  exp_tail.tail = [](double y) { return std::exp(-y); };
  exp_tail.integrable_certificate = true;
  const auto mech = Mechanism::parametric_tail(std::move(exp_tail));
  CHECK(phi_lambda(mech, 1.0, 0.0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(phi_lambda(mech, 2.0, std::log(3.0)) ==
        doctest::Approx(1.0 / 7.0).epsilon(1e-9));

  // monotone decay in u and lambda
  double prev = 2.0;
  for (double u = -2.0; u <= 40.0; u += 3.0) {
    const double v = phi_lambda(mech, 1.0, u);
    CHECK(v <= prev);
    prev = v;
  }
  CHECK(phi_lambda(mech, 10.0, 0.0) < phi_lambda(mech, 1.0, 0.0));

  // identity Phi_lambda(u) = |psi0(lambda e^u)| / (lambda e^u), quadrature
  // route vs closed form
  const auto gen = stable_as_parametric(-0.5, -1.0);
  const auto st = Mechanism::stable(-0.5, -1.0);
  for (double u : {-1.0, 0.0, 1.0, 3.0})
    for (double lambda : {0.25, 1.0, 8.0}) {
      const double s = lambda * std::exp(u);
      CHECK(phi_lambda(gen, lambda, u) ==
            doctest::Approx(st.abs_psi0(s) / s).epsilon(1e-8));
    }
}

TEST_CASE("a_xi") {
  LevyTriplet t;
  t.drift = -1.0;
  CHECK(a_xi(t, 0.5) == doctest::Approx(1.0));
  CHECK(a_xi(t, 10.0) == doctest::Approx(1.0));

  t.drift = 0.0;
  CHECK(a_xi(t, 3.0) == doctest::Approx(0.0));

  // single negative atom at -2 with rate 1: pi^-( -1) = 1 and the tail
  // integral contributes length of (-2,-1)
  t.jumps.atoms.push_back({1.0, -2.0});
  CHECK(a_xi(t, 3.0) == doctest::Approx(2.0).epsilon(1e-12));
  // piecewise oracle at a second x: int_{-1.5}^{-1} pi^- dy = 0.5
  CHECK(a_xi(t, 1.5) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("condition check: A_xi-weighted tail integral") {
  LevyTriplet env;
  env.drift = -1.0;
  env.sigma = 1.0;

  tail_spec exp_tail;
  exp_tail.tail = [](double y) { return std::exp(-y); };
  exp_tail.integrable_certificate = true;
  const auto mech = Mechanism::parametric_tail(std::move(exp_tail));

  const auto rep = check_condition_Axi(mech, env, 1.0, 1.0);
  CHECK(rep.verdict == cond_verdict::holds);

  // lambda scaled up on a Holds instance stays Holds
  CHECK(check_condition_Axi(mech, env, 2.0, 1.0).verdict ==
        cond_verdict::holds);
  CHECK(check_condition_Axi(mech, env, 10.0, 1.0).verdict ==
        cond_verdict::holds);

  // heavy log weight at 0+ makes the integral diverge
  CHECK(check_condition_Axi(log_boundary_mech(), env, 1.0, 1.0).verdict ==
        cond_verdict::fails);

  // vanishing A_xi is ill-posed
  LevyTriplet flat;
  flat.drift = 0.0;
  CHECK_THROWS_AS(check_condition_Axi(mech, flat, 1.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("condition check: E1 moment of the jump tail") {
  tail_spec exp_tail;
  exp_tail.tail = [](double y) { return std::exp(-y); };
  exp_tail.integrable_certificate = true;
  const auto mech = Mechanism::parametric_tail(std::move(exp_tail));
  const auto rep = check_condition_E1(mech, 1.0);
  CHECK(rep.verdict == cond_verdict::holds);
  // int_0^inf E1(y) e^{-y} dy = ln 2
  CHECK(rep.evidence.back() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-6));

  CHECK(check_condition_E1(Mechanism::stable(-0.5, -1.0), 1.0).verdict ==
        cond_verdict::holds);

  CHECK(check_condition_E1(log_boundary_mech(), 1.0).verdict ==
        cond_verdict::fails);
}

TEST_CASE("condition (B) sufficient form") {
  CHECK(check_condition_B(Mechanism::stable(-0.5, -1.0)).verdict ==
        cond_verdict::holds);
  CHECK(check_condition_B(Mechanism::finite_atoms({{1.0, 0.5}})).verdict ==
        cond_verdict::holds);
  // parametric route agrees with the stable analytic answer
  CHECK(check_condition_B(stable_as_parametric(-0.5, -1.0)).verdict ==
        cond_verdict::holds);
  // density ~ z^{-2} ln^{-2}(1/z): z ln^2 z weight integrates like 1/z
  CHECK(check_condition_B(log_boundary_mech()).verdict ==
        cond_verdict::fails);
}

TEST_CASE("condition (C) lower stable bound") {
  const auto st = Mechanism::stable(-0.5, -1.0);
  CHECK(check_condition_C(st, -0.5, -1.0).verdict == cond_verdict::holds);

  // finite atoms vs the stable bound: 1 - e^{-l} <= l^{1/2}
  const auto at = Mechanism::finite_atoms({{1.0, 1.0}});
  CHECK(check_condition_C(at, -0.5, -1.0).verdict == cond_verdict::holds);

  // wrong exponent ordering fails near 0
  CHECK(check_condition_C(Mechanism::stable(-0.9, -1.0), -0.1, -1.0).verdict ==
        cond_verdict::fails);
}

TEST_CASE("stable jump sampling above a threshold") {
  const auto st = Mechanism::stable(-0.5, -1.0);
  philox4x32 rng(5, 0);
  const double eps = 1e-4;
  // P(X > 4 eps | X > eps) = (4)^{-1/2} = 0.5
  int over = 0;
  const int n = 40000;
  for (int i = 0; i < n; ++i)
    if (st.sample_jump_above(eps, rng) > 4.0 * eps) ++over;
  CHECK(std::abs(over / double(n) - 0.5) < 3.0 * 0.5 / std::sqrt(double(n)));

  // dropped-mass drift correction, stable closed form vs parametric route
  const auto gen = stable_as_parametric(-0.5, -1.0);
  CHECK(gen.small_jump_mean(1e-3) ==
        doctest::Approx(st.small_jump_mean(1e-3)).epsilon(1e-7));
}

TEST_CASE("construction rejects invalid parameters") {
  CHECK_THROWS_AS(Mechanism::stable(0.5, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(Mechanism::stable(-0.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Mechanism::finite_atoms({{1.0, -1.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(Mechanism::stable(-0.5, -1.0, -0.1), std::invalid_argument);
}
