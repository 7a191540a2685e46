#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cble/math_util.hpp"

namespace cble {

// Parallel and serial execution produce bit-identical results: every path
// index writes its own slot (per-path RNG substreams, no shared state) and
// the reduction is a serial compensated sum over the slot buffer. The
// serial mode is the reference implementation the tests compare against.
enum class exec_mode { serial, parallel };

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

namespace detail_mc {
void run_indexed(std::size_t n, exec_mode mode,
                 const std::function<void(std::size_t)>& body);
}

// Evaluate f(path_index) into out[path_index].
template <typename F>
void fill_paths(std::size_t n, exec_mode mode, F&& f, std::span<double> out) {
  const std::function<void(std::size_t)> body = [&](std::size_t i) {
    out[i] = f(i);
  };
  detail_mc::run_indexed(n, mode, body);
}

// Evaluate f(path_index, row) where row is the path's slice of a row-major
// (n_paths x n_cols) buffer.
template <typename F>
void fill_path_rows(std::size_t n, std::size_t n_cols, exec_mode mode, F&& f,
                    std::span<double> buffer) {
  const std::function<void(std::size_t)> body = [&](std::size_t i) {
    f(i, buffer.subspan(i * n_cols, n_cols));
  };
  detail_mc::run_indexed(n, mode, body);
}

// Mean, standard error and 95% CI over the slot buffer; deterministic
// (fixed order, compensated summation).
McEstimate reduce_mean(std::span<const double> values, std::uint64_t seed);

// Column-wise reduction of a row-major (n_rows x n_cols) buffer.
std::vector<McEstimate> reduce_columns(std::span<const double> buffer,
                                       std::size_t n_rows, std::size_t n_cols,
                                       std::uint64_t seed);

template <typename F>
McEstimate mc_estimate(std::size_t n_paths, std::uint64_t seed, exec_mode mode,
                       F&& f) {
  std::vector<double> slots(n_paths);
  fill_paths(n_paths, mode, std::forward<F>(f), slots);
  return reduce_mean(slots, seed);
}

}  // namespace cble
