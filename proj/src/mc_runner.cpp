#include "cble/mc_runner.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cble {

namespace detail_mc {

void run_indexed(std::size_t n, exec_mode mode,
                 const std::function<void(std::size_t)>& body) {
#ifdef _OPENMP
  if (mode == exec_mode::parallel) {
    // an exception may not escape the parallel region: capture the first
    // one and rethrow after the loop
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    const std::int64_t sn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < sn; ++i) {
      if (failed.load(std::memory_order_relaxed)) continue;
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
    return;
  }
#else
  (void)mode;
#endif
  for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace detail_mc

McEstimate reduce_mean(std::span<const double> values, std::uint64_t seed) {
  if (values.size() < 2)
    throw std::invalid_argument("reduce_mean: need at least 2 values");
  kahan_sum sum;
  for (double v : values) sum.add(v);
  const double n = static_cast<double>(values.size());
  const double mean = sum.value() / n;

  kahan_sum sq;
  for (double v : values) sq.add((v - mean) * (v - mean));
  const double var = sq.value() / (n - 1.0);
  const double se = std::sqrt(var / n);

  McEstimate est;
  est.mean = mean;
  est.se = se;
  est.ci_lo = mean - 1.959963984540054 * se;
  est.ci_hi = mean + 1.959963984540054 * se;
  est.n = values.size();
  est.seed = seed;
  return est;
}

std::vector<McEstimate> reduce_columns(std::span<const double> buffer,
                                       std::size_t n_rows, std::size_t n_cols,
                                       std::uint64_t seed) {
  if (buffer.size() != n_rows * n_cols)
    throw std::invalid_argument("reduce_columns: buffer size mismatch");
  std::vector<McEstimate> out(n_cols);
  std::vector<double> col(n_rows);
  for (std::size_t j = 0; j < n_cols; ++j) {
    for (std::size_t i = 0; i < n_rows; ++i) col[i] = buffer[i * n_cols + j];
    out[j] = reduce_mean(col, seed);
  }
  return out;
}

}  // namespace cble
