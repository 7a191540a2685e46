#include <doctest.h>

#include <cmath>
#include <vector>

#include "cble/errors.hpp"
#include "cble/math_util.hpp"
#include "cble/quadrature.hpp"

using namespace cble;

TEST_CASE("gauss-kronrod on smooth integrands") {
  auto r = integrate([](double x) { return std::sin(x); }, 0.0, M_PI);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-12));

  r = integrate_half_line([](double x) { return std::exp(-x); }, 0.0);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("integrable endpoint singularities") {
  auto r = integrate_sqrt_singular0(
      [](double x) { return 1.0 / std::sqrt(x); }, 1.0);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-10));

  // Gamma(1/2) = int_0^inf x^{-1/2} e^{-x} dx = sqrt(pi)
  auto near0 = integrate_sqrt_singular0(
      [](double x) { return std::exp(-x) / std::sqrt(x); }, 1.0);
  auto rest = integrate_half_line(
      [](double x) { return std::exp(-x) / std::sqrt(x); }, 1.0);
  CHECK(near0.converged);
  CHECK(rest.converged);
  CHECK(near0.value + rest.value ==
        doctest::Approx(std::sqrt(M_PI)).epsilon(1e-10));
}

TEST_CASE("non-integrable singularity reports failure") {
  quad_options opt;
  opt.max_intervals = 200;
  const auto r = integrate([](double x) { return 1.0 / x; }, 0.0, 1.0, opt);
  CHECK(!r.converged);
  CHECK_THROWS_AS(
      integrate_or_throw([](double x) { return 1.0 / x; }, 0.0, 1.0, opt),
      numeric_error);
}

TEST_CASE("exponential integral E1") {
  // quadrature oracle at tolerance 1e-12
  quad_options tight;
  tight.abs_tol = 1e-13;
  tight.rel_tol = 1e-12;
  for (double w : {0.05, 0.3, 1.0, 2.5, 10.0}) {
    const auto oracle = integrate_half_line(
        [w](double y) { return std::exp(-w * y) / y; }, 1.0, tight);
    REQUIRE(oracle.converged);
    CHECK(expint_e1(w) == doctest::Approx(oracle.value).epsilon(1e-10));
  }
  CHECK(expint_e1(1.0) == doctest::Approx(0.2193839).epsilon(1e-6));
  CHECK(expint_e1(650.0) < 1e-250);
  CHECK_THROWS_AS(expint_e1(0.0), std::invalid_argument);
  CHECK_THROWS_AS(expint_e1(-1.0), std::invalid_argument);

  // paper's bound E1(w) <= e^{-w} log(1 + 1/w)
  for (double w = 0.01; w <= 100.0; w *= 1.8)
    CHECK(expint_e1(w) <= std::exp(-w) * std::log1p(1.0 / w) * (1 + 1e-12));
}

TEST_CASE("weighted line fit") {
  std::vector<double> x, y;
  for (int i = 0; i < 20; ++i) {
    x.push_back(0.3 * i);
    y.push_back(2.0 - 0.7 * x.back());
  }
  const auto f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(-0.7).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("normal cdf sanity") {
  CHECK(norm_cdf(0.0) == doctest::Approx(0.5));
  CHECK(norm_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-12));
}
