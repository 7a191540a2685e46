#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "cble/exp_functional.hpp"

using namespace cble;

namespace {

LevyTriplet brownian(double drift, double sigma) {
  LevyTriplet t;
  t.drift = drift;
  t.sigma = sigma;
  return t;
}

}  // namespace

TEST_CASE("exponential functional on simple paths") {
  const auto zero = sample_path(brownian(0, 0), 0.0, 3.0, 7, 1);
  CHECK(exp_functional(zero, -0.5, 3.0).value == doctest::Approx(3.0));
  CHECK(exp_functional(zero, 2.0, 1.5).value == doctest::Approx(1.5));

  // xi_s = s, beta = -1: int_0^1 e^{s} ds = e - 1
  const auto drift = sample_path(brownian(1, 0), 0.0, 1.0, 2001, 1);
  CHECK(exp_functional(drift, -1.0, 1.0).value ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-3));

  // strictly increasing in t
  const auto p = sample_path(brownian(0, 1), 0.0, 2.0, 101, 5);
  double prev = 0.0;
  for (double t = 0.25; t <= 2.0; t += 0.25) {
    const double v = exp_functional(p, -0.5, t).value;
    CHECK(v > prev);
    prev = v;
  }

  // value bounds from the path extrema
  const auto [sup, inf] = running_extrema(p);
  const double v = exp_functional(p, -0.5, 2.0).value;
  CHECK(v <= 2.0 * std::exp(0.5 * sup.back()) * (1 + 1e-12));
  CHECK(v >= 2.0 * std::exp(0.5 * inf.back()) * (1 - 1e-12));
}

TEST_CASE("pointwise larger paths shrink the functional for beta > 0") {
  const auto base = sample_path(brownian(0, 1), 0.0, 1.0, 101, 8);
  const auto up = base.shifted(-0.7);  // adds 0.7 to every value
  CHECK(exp_functional(up, 0.5, 1.0).value <
        exp_functional(base, 0.5, 1.0).value);
  CHECK(exp_functional(up, -0.5, 1.0).value >
        exp_functional(base, -0.5, 1.0).value);
}

TEST_CASE("degenerate environment annealed estimate is exact") {
  const auto est =
      stable_annealed_nonexplosion(1.0, 1.0, -0.5, -1.0, brownian(0, 0), 64, 9);
  CHECK(est.mean == doctest::Approx(std::exp(-0.25)).epsilon(1e-12));
  CHECK(est.se == 0.0);
  CHECK(est.n == 64);
}

TEST_CASE("z -> 0 sends the estimate to 1") {
  const auto est = stable_annealed_nonexplosion(1e-10, 1.0, -0.5, -1.0,
                                                brownian(0, 1), 200, 4);
  CHECK(est.mean == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("standard error shrinks like 1/sqrt(2) under doubling") {
  const auto t = brownian(0, 1);
  const auto a = stable_annealed_nonexplosion(1.0, 2.0, -0.5, -1.0, t, 4000, 3);
  const auto b = stable_annealed_nonexplosion(1.0, 2.0, -0.5, -1.0, t, 8000, 3);
  const double ratio = b.se / a.se;
  CHECK(ratio == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.2));
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(
      stable_annealed_nonexplosion(1.0, 1.0, -0.5, -1.0, brownian(0, 1), 1, 1),
      std::invalid_argument);
  CHECK_THROWS_AS(
      stable_annealed_nonexplosion(-1.0, 1.0, -0.5, -1.0, brownian(0, 1), 10, 1),
      std::invalid_argument);
  CHECK_THROWS_AS(
      stable_annealed_nonexplosion(1.0, 1.0, 0.5, -1.0, brownian(0, 1), 10, 1),
      std::invalid_argument);
}
