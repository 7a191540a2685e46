#include "cble/quenched_flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "cble/errors.hpp"
#include "cble/exp_functional.hpp"
#include "cble/math_util.hpp"

namespace cble {

namespace {

// One segment of the autonomous flow dW/dtau = e^{x-W} |psi0(e^{W-x})|,
// W = ln v, integrated forward in tau = (segment end) - s with a Cash-Karp
// 4(5) embedded pair. v spans many orders of magnitude near the explosion
// limit, which is why the log variable is integrated.
double advance_segment_generic(const Mechanism& mech, double x, double v_end,
                               double dt, double abs_tol,
                               QuenchedSolution::diagnostics_t& diag) {
  if (v_end == 0.0) return 0.0;  // psi0(0) = 0 fixed point
  if (dt <= 0.0) return v_end;

  auto rate = [&](double w) {
    const double u = std::exp(w - x);
    return std::exp(x - w) * mech.abs_psi0(u);
  };

  double w = std::log(v_end);
  double tau = 0.0;
  double h = dt;
  const double h_min = dt * 1e-14;

  while (tau < dt) {
    h = std::min(h, dt - tau);
    const double k1 = rate(w);
    const double k2 = rate(w + h * (0.2 * k1));
    const double k3 = rate(w + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
    const double k4 =
        rate(w + h * (0.3 * k1 - 0.9 * k2 + 1.2 * k3));
    const double k5 = rate(w + h * (-11.0 / 54.0 * k1 + 2.5 * k2 -
                                    70.0 / 27.0 * k3 + 35.0 / 27.0 * k4));
    const double k6 =
        rate(w + h * (1631.0 / 55296.0 * k1 + 175.0 / 512.0 * k2 +
                      575.0 / 13824.0 * k3 + 44275.0 / 110592.0 * k4 +
                      253.0 / 4096.0 * k5));
    const double w5 =
        w + h * (37.0 / 378.0 * k1 + 250.0 / 621.0 * k3 + 125.0 / 594.0 * k4 +
                 512.0 / 1771.0 * k6);
    const double w4 = w + h * (2825.0 / 27648.0 * k1 + 18575.0 / 48384.0 * k3 +
                               13525.0 / 55296.0 * k4 + 277.0 / 14336.0 * k5 +
                               0.25 * k6);
    const double err = std::abs(w5 - w4);
    ++diag.steps;
    if (err <= abs_tol || h <= h_min) {
      if (h <= h_min && err > abs_tol) {
        std::ostringstream msg;
        msg << "solve_backward: step size underflow at tau=" << tau
            << " (local error " << err << ", partial v=" << std::exp(w) << ")";
        throw numeric_error(msg.str());
      }
      tau += h;
      w = w5;
      diag.max_local_error = std::max(diag.max_local_error, err);
    }
    const double grow =
        err > 0.0 ? 0.9 * std::pow(abs_tol / err, 0.2) : 5.0;
    h *= std::clamp(grow, 0.1, 5.0);
  }
  return std::exp(w);
}

// Stable closed form on a frozen segment: with u = v e^{-x},
// u^{-beta}(s) = u^{-beta}(end) + beta*C*dt.
double advance_segment_stable(const stable_params& p, double x, double v_end,
                              double dt) {
  if (v_end == 0.0) return 0.0;
  const double u_end = v_end * std::exp(-x);
  const double pow_end = std::pow(u_end, -p.beta);
  const double pow_start = pow_end + p.beta * p.c * dt;
  return std::exp(x) * std::pow(pow_start, -1.0 / p.beta);
}

}  // namespace

QuenchedSolution solve_backward(const Mechanism& mech, const EnvPath& path,
                                double t, double lambda,
                                const solve_options& opt) {
  if (!(t > 0.0)) throw std::invalid_argument("solve_backward: t must be > 0");
  if (t > path.horizon() * (1.0 + 1e-12))
    throw std::invalid_argument("solve_backward: path horizon < t");
  if (!(lambda >= 0.0))
    throw std::invalid_argument("solve_backward: lambda must be >= 0");

  QuenchedSolution sol;
  sol.lambda = lambda;
  sol.env_seed = path.seed;

  // s-grid: path times below t plus the terminal point t itself
  for (std::size_t i = 0; i < path.times.size() && path.times[i] < t; ++i)
    sol.s_grid.push_back(path.times[i]);
  sol.s_grid.push_back(t);
  const std::size_t n = sol.s_grid.size();
  sol.v_values.assign(n, 0.0);
  sol.v_values[n - 1] = lambda;

  const stable_params* st = mech.as_stable();
  double v = lambda;
  for (std::size_t i = n - 1; i-- > 0;) {
    const double dt = sol.s_grid[i + 1] - sol.s_grid[i];
    const double x = path.values[i];  // frozen left value of the segment
    if (st != nullptr && !opt.force_generic)
      v = advance_segment_stable(*st, x, v, dt);
    else
      v = advance_segment_generic(mech, x, v, dt, opt.abs_tol,
                                  sol.diagnostics);
    sol.v_values[i] = v;
  }
  return sol;
}

double quenched_v0(const Mechanism& mech, const EnvPath& path, double t,
                   const nonexplosion_options& opt) {
  if (const auto* st = mech.as_stable(); st && !opt.force_lambda_limit) {
    const double i_val = exp_functional(path, st->beta, t).value;
    return std::pow(st->beta * st->c * i_val, -1.0 / st->beta);
  }

  // lambda_k = 2^{-k}; the raw sequence converges like sqrt(lambda) for
  // stable-type mechanisms, so the limit is taken from Aitken delta^2
  // acceleration with the stop rule applied to the accelerated values.
  double lambda = 1.0;
  std::vector<double> vals{
      solve_backward(mech, path, t, lambda, opt.solver).v_at_zero()};
  double prev_acc = std::numeric_limits<double>::quiet_NaN();
  auto finish = [&](double lim) {
    if (lim <= 2.0 * opt.stop_tol) lim = 0.0;  // conservative fixed point
    return std::max(lim, 0.0);
  };
  for (int k = 1; k <= opt.max_halvings; ++k) {
    lambda *= 0.5;
    vals.push_back(
        solve_backward(mech, path, t, lambda, opt.solver).v_at_zero());
    const std::size_t n = vals.size();
    const double d1 = vals[n - 1] - vals[n - 2];
    if (std::abs(d1) < opt.stop_tol * (1.0 + std::abs(vals[n - 1])))
      return finish(vals[n - 1]);
    if (n >= 3) {
      const double d0 = vals[n - 2] - vals[n - 3];
      const double denom = d1 - d0;
      if (denom != 0.0 && std::isfinite(denom)) {
        const double acc = vals[n - 1] - d1 * d1 / denom;
        if (std::isfinite(prev_acc) &&
            std::abs(acc - prev_acc) < opt.stop_tol * (1.0 + std::abs(acc)))
          return finish(acc);
        prev_acc = acc;
      }
    }
  }
  std::ostringstream msg;
  msg << "quenched_v0: lambda->0 sequence did not stabilize after "
      << opt.max_halvings << " halvings; last values " << vals.back()
      << ", " << vals[vals.size() - 2] << " (accelerated " << prev_acc << ")";
  throw numeric_error(msg.str());
}

double nonexplosion_prob_given_env(const Mechanism& mech, const EnvPath& path,
                                   double z, double t,
                                   const nonexplosion_options& opt) {
  if (!(z > 0.0))
    throw std::invalid_argument(
        "nonexplosion_prob_given_env: z must be > 0");
  return std::exp(-z * quenched_v0(mech, path, t, opt));
}

double quenched_laplace(const Mechanism& mech, const EnvPath& path, double z,
                        double x, double lambda, double t) {
  if (!(z > 0.0))
    throw std::invalid_argument("quenched_laplace: z must be > 0");
  const EnvPath shifted = path.shifted(x);
  const double v =
      solve_backward(mech, shifted, t, lambda * std::exp(-x)).v_at_zero();
  return std::exp(-z * v);
}

BoundReport bound_check(const Mechanism& mech, const EnvPath& path,
                        double lambda, double t,
                        std::optional<stable_params> cond_c, double tol) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("bound_check: lambda must be > 0");

  BoundReport rep;
  rep.v0 = solve_backward(mech, path, t, lambda).v_at_zero();
  const double phi_int = integrate_left(
      path, t, [&](double x) { return phi_lambda(mech, lambda, -x); });
  rep.upper = lambda * std::exp(phi_int);
  rep.upper_slack = rep.upper - rep.v0;
  rep.upper_ok = rep.v0 <= rep.upper * (1.0 + tol) + tol;

  if (cond_c) {
    const double v_lim = quenched_v0(mech, path, t);
    const double i_val = exp_functional(path, cond_c->beta, t).value;
    const double lower =
        std::pow(cond_c->c * cond_c->beta * i_val, -1.0 / cond_c->beta);
    rep.v_limit = v_lim;
    rep.lower = lower;
    rep.lower_slack = v_lim - lower;
    rep.lower_ok = v_lim >= lower * (1.0 - tol) - tol;
  }
  return rep;
}

}  // namespace cble
