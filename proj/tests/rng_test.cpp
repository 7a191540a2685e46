#include <doctest.h>

#include <cmath>
#include <vector>

#include "cble/math_util.hpp"
#include "cble/rng.hpp"

using cble::philox4x32;

TEST_CASE("philox known-answer vector") {
  // Random123 kat_vectors, philox4x32-10 with zero key and counter
  philox4x32 zero(0, 0);
  CHECK(zero() == 0x6627e8d5u);
  CHECK(zero() == 0xe169c58du);
  CHECK(zero() == 0xbc57ac4cu);
  CHECK(zero() == 0x9b00dbd8u);
}

TEST_CASE("substreams are deterministic and distinct") {
  philox4x32 a(42, 7), b(42, 7), c(42, 8);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 64; ++i) {
    const auto x = a(), y = b(), z = c();
    all_equal = all_equal && (x == y);
    any_diff = any_diff || (x != z);
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("uniform doubles live in (0,1]") {
  philox4x32 rng(1, 0);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.next_double();
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("gaussian moments") {
  philox4x32 rng(3, 0);
  const int n = 200000;
  double s = 0, s2 = 0, s3 = 0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.next_gauss();
    s += g;
    s2 += g * g;
    s3 += g * g * g;
  }
  CHECK(std::abs(s / n) < 5.0 / std::sqrt(double(n)));
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(std::abs(s3 / n) < 0.05);
}

TEST_CASE("poisson sample matches its distribution (chi-square)") {
  philox4x32 rng(11, 0);
  const double mean = 4.5;
  const int n = 100000;
  std::vector<double> observed(12, 0.0);
  for (int i = 0; i < n; ++i) {
    const auto k = rng.next_poisson(mean);
    observed[std::min<std::uint64_t>(k, observed.size() - 1)] += 1.0;
  }
  std::vector<double> expected(observed.size(), 0.0);
  double pmf = std::exp(-mean), cum = 0.0;
  for (std::size_t k = 0; k + 1 < expected.size(); ++k) {
    expected[k] = n * pmf;
    cum += pmf;
    pmf *= mean / static_cast<double>(k + 1);
  }
  expected.back() = n * (1.0 - cum);
  CHECK(cble::chi2_gof_pvalue(observed, expected) > 0.01);
}
