#include "cble/fluctuation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cble/errors.hpp"

namespace cble {

namespace {

// Lean incremental stepper over the random-walk skeleton of the path
// sampler: fixed step h, jumps merged into the step they land in.
struct skeleton {
  double drift_h;
  double sigma_sqrt_h;
  double jump_mean_h;  // expected jump count per step
  double eps;
  const JumpSpec* jumps;

  skeleton(const LevyTriplet& t, double h)
      : drift_h((t.drift - t.jumps.small_mean_above(t.jumps.eps_env)) * h),
        sigma_sqrt_h(t.sigma * std::sqrt(h)),
        jump_mean_h(t.jumps.rate_above(t.jumps.eps_env) * h),
        eps(t.jumps.eps_env),
        jumps(&t.jumps) {}

  double step(philox4x32& rng) const {
    double inc = drift_h;
    if (sigma_sqrt_h > 0.0) inc += sigma_sqrt_h * rng.next_gauss();
    if (jump_mean_h > 0.0) {
      const std::uint64_t n = rng.next_poisson(jump_mean_h);
      for (std::uint64_t j = 0; j < n; ++j)
        inc += jumps->sample_size_above(eps, rng);
    }
    return inc;
  }
};

std::vector<std::size_t> grid_steps(std::span<const double> t_grid, double h) {
  std::vector<std::size_t> idx(t_grid.size());
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    if (!(t_grid[j] > 0.0) || (j > 0 && t_grid[j] <= t_grid[j - 1]))
      throw std::invalid_argument("t_grid must be positive and increasing");
    idx[j] = static_cast<std::size_t>(std::llround(t_grid[j] / h));
  }
  return idx;
}

}  // namespace

McEstimate spitzer_rho(const LevyTriplet& triplet, double t,
                       std::size_t n_paths, std::uint64_t seed,
                       const fluctuation_options& opt) {
  if (!(t > 0.0)) throw std::invalid_argument("spitzer_rho: t must be > 0");
  triplet.validate();
  const skeleton sk(triplet, opt.grid_dt);
  const std::size_t n_steps =
      static_cast<std::size_t>(std::llround(t / opt.grid_dt));

  return mc_estimate(n_paths, seed, opt.mode, [&](std::size_t i) {
    philox4x32 rng(seed, i);
    double x = 0.0;
    std::size_t occupied = 0;  // left-value occupation of [0, inf)
    for (std::size_t k = 0; k < n_steps; ++k) {
      if (x >= 0.0) ++occupied;
      x += sk.step(rng);
    }
    return static_cast<double>(occupied) / static_cast<double>(n_steps);
  });
}

survival_fit survival_exponent(const LevyTriplet& triplet, double start_x,
                               std::span<const double> t_grid,
                               std::size_t n_paths, std::uint64_t seed,
                               const fluctuation_options& opt) {
  if (!(start_x < 0.0))
    throw std::invalid_argument("survival_exponent: start must be < 0");
  triplet.validate();
  const skeleton sk(triplet, opt.grid_dt);
  const auto idx = grid_steps(t_grid, opt.grid_dt);
  const std::size_t n_cols = t_grid.size();
  const std::size_t n_steps = idx.back();

  std::vector<double> buffer(n_paths * n_cols);
  fill_path_rows(
      n_paths, n_cols, opt.mode,
      [&](std::size_t i, std::span<double> row) {
        philox4x32 rng(seed, i);
        double x = start_x;
        bool alive = x < 0.0;
        std::size_t j = 0;
        for (std::size_t k = 1; k <= n_steps && j < n_cols; ++k) {
          x += sk.step(rng);
          if (x >= 0.0) alive = false;
          while (j < n_cols && idx[j] == k) row[j++] = alive ? 1.0 : 0.0;
        }
        for (; j < n_cols; ++j) row[j] = alive ? 1.0 : 0.0;
      },
      buffer);
  const auto cols = reduce_columns(buffer, n_paths, n_cols, seed);

  survival_fit out;
  out.n_paths = n_paths;
  out.seed = seed;
  std::vector<double> lx, ly, lw;
  for (std::size_t j = 0; j < n_cols; ++j) {
    if (cols[j].mean <= 0.0) {
      out.dropped_t.push_back(t_grid[j]);
      continue;
    }
    out.t.push_back(t_grid[j]);
    out.p.push_back(cols[j].mean);
    out.se.push_back(cols[j].se);
    lx.push_back(std::log(t_grid[j]));
    ly.push_back(std::log(cols[j].mean));
    // delta method: var(log p) = (se/p)^2
    const double rel = cols[j].se / cols[j].mean;
    lw.push_back(rel > 0.0 ? 1.0 / (rel * rel) : 1.0);
  }
  if (lx.size() < 2)
    throw numeric_error("survival_exponent: fewer than 2 usable grid cells");
  out.fit = fit_line(lx, ly, lw);
  out.power_law = out.fit.slope < -0.1;
  return out;
}

renewal_table empirical_renewal(const LevyTriplet& triplet,
                                ladder_direction direction,
                                std::span<const double> x_grid,
                                std::size_t n_chains, std::uint64_t seed,
                                const renewal_options& opt) {
  triplet.validate();
  const skeleton sk(triplet, opt.grid_dt);
  const double floor = 5.0 * std::sqrt(opt.grid_dt) * std::max(triplet.sigma, 1e-12);

  renewal_table out;
  out.n_chains = n_chains;
  out.grid_dt = opt.grid_dt;
  for (double x : x_grid) {
    if (!(x > 0.0))
      throw std::invalid_argument("empirical_renewal: x_grid must be > 0");
    (x < floor ? out.excluded_x : out.x).push_back(x);
  }
  std::sort(out.x.begin(), out.x.end());
  if (out.x.empty())
    throw std::invalid_argument(
        "empirical_renewal: all x below the skeleton resolution floor");
  const double x_max = out.x.back();
  const std::size_t max_steps =
      static_cast<std::size_t>(opt.t_cap / opt.grid_dt);
  const double sign = direction == ladder_direction::ascending ? 1.0 : -1.0;

  // counts matrix: chain-by-x record counts; -1 marks a censored chain
  std::vector<double> buffer(n_chains * out.x.size());
  fill_path_rows(
      n_chains, out.x.size(), opt.mode,
      [&](std::size_t i, std::span<double> row) {
        philox4x32 rng(seed, i);
        double x = 0.0;
        double record = 0.0;
        std::vector<double> records;
        std::size_t k = 0;
        while (record <= x_max && k < max_steps) {
          x += sign * sk.step(rng);
          if (x > record) {
            record = x;
            if (record <= x_max) records.push_back(record);
          }
          ++k;
        }
        if (record <= x_max) {  // censored at the time cap
          for (auto& r : row) r = -1.0;
          return;
        }
        for (std::size_t j = 0; j < out.x.size(); ++j) {
          const auto upto = std::upper_bound(records.begin(), records.end(),
                                             out.x[j]);
          row[j] = 1.0 + static_cast<double>(upto - records.begin());
        }
      },
      buffer);

  // censor-aware column reduction
  const std::size_t n_cols = out.x.size();
  std::vector<double> col;
  col.reserve(n_chains);
  std::size_t censored = 0;
  for (std::size_t j = 0; j < n_cols; ++j) {
    col.clear();
    for (std::size_t i = 0; i < n_chains; ++i) {
      const double v = buffer[i * n_cols + j];
      if (v >= 0.0) col.push_back(v);
    }
    if (j == 0) censored = n_chains - col.size();
    if (col.size() < 2)
      throw numeric_error("empirical_renewal: all chains censored");
    const auto est = reduce_mean(col, seed);
    out.u_hat.push_back(est.mean);
    out.se.push_back(est.se);
  }
  out.censored = censored;

  std::ostringstream caveat;
  caveat << "grid-skeleton ladder estimates are biased for x below "
         << floor << " (5 sqrt(dt) sigma); " << out.excluded_x.size()
         << " x-values excluded; " << censored << "/" << n_chains
         << " chains censored at t_cap=" << opt.t_cap;
  if (triplet.jumps.rate_above(triplet.jumps.eps_env) > 0.0)
    caveat << "; compound-Poisson environments can revisit extrema, counts "
              "use the strict-record convention";
  out.caveat = caveat.str();
  return out;
}

martingale_report martingale_check(const LevyTriplet& triplet, double start_x,
                                   std::span<const double> t_grid,
                                   std::size_t n_paths, std::uint64_t seed,
                                   const fluctuation_options& opt,
                                   std::function<double(double)> renewal_u) {
  if (!(start_x < 0.0))
    throw std::invalid_argument("martingale_check: start must be < 0");
  triplet.validate();
  if (!renewal_u) renewal_u = [](double y) { return std::max(y, 0.0); };
  const skeleton sk(triplet, opt.grid_dt);
  const auto idx = grid_steps(t_grid, opt.grid_dt);
  const std::size_t n_cols = t_grid.size();
  const std::size_t n_steps = idx.back();

  std::vector<double> buffer(n_paths * n_cols);
  fill_path_rows(
      n_paths, n_cols, opt.mode,
      [&](std::size_t i, std::span<double> row) {
        philox4x32 rng(seed, i);
        double x = start_x;
        bool alive = true;
        std::size_t j = 0;
        for (std::size_t k = 1; k <= n_steps && j < n_cols; ++k) {
          x += sk.step(rng);
          if (x >= 0.0) alive = false;
          while (j < n_cols && idx[j] == k)
            row[j++] = alive ? renewal_u(-x) : 0.0;
        }
        for (; j < n_cols; ++j) row[j] = alive ? renewal_u(-x) : 0.0;
      },
      buffer);
  const auto cols = reduce_columns(buffer, n_paths, n_cols, seed);

  martingale_report out;
  double max_dev = 0.0;
  for (std::size_t j = 0; j < n_cols; ++j) {
    out.t.push_back(t_grid[j]);
    out.stat.push_back(cols[j].mean);
    out.se.push_back(cols[j].se);
    if (j > 0) {
      const double dev = std::abs(cols[j].mean - cols[0].mean) /
                         std::sqrt(cols[j].se * cols[j].se +
                                   cols[0].se * cols[0].se);
      max_dev = std::max(max_dev, dev);
    }
  }
  out.max_dev_se = max_dev;
  std::ostringstream note;
  note << "optional-stopping statistic vs t=" << t_grid.front()
       << "; max deviation " << max_dev << " combined SE";
  out.note = note.str();
  return out;
}

}  // namespace cble
