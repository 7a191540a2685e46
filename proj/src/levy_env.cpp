#include "cble/levy_env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cble/math_util.hpp"

namespace cble {

namespace {

// int_lo^hi z * exp(-eta*z) dz for 0 <= lo <= hi, eta > 0
double moment1_exp(double lo, double hi, double eta) {
  if (hi <= lo) return 0.0;
  auto g = [eta](double z) {
    return (z / eta + 1.0 / (eta * eta)) * std::exp(-eta * z);
  };
  return g(lo) - g(hi);
}

}  // namespace

void JumpSpec::validate() const {
  if (!(eps_env > 0.0))
    throw std::invalid_argument("JumpSpec: eps_env must be > 0");
  for (const auto& a : atoms) {
    if (a.rate < 0.0) throw std::invalid_argument("JumpSpec: atom rate < 0");
    if (a.size == 0.0)
      throw std::invalid_argument("JumpSpec: atom size must be nonzero");
  }
  if (tails) {
    if (tails->amp_pos < 0.0 || tails->amp_neg < 0.0)
      throw std::invalid_argument("JumpSpec: tail amplitude < 0");
    if (!(tails->decay_pos > 0.0) || !(tails->decay_neg > 0.0))
      throw std::invalid_argument("JumpSpec: tail decay must be > 0");
  }
}

double JumpSpec::mass_above(double x) const {
  double m = 0.0;
  for (const auto& a : atoms)
    if (a.size > x) m += a.rate;
  if (tails && tails->amp_pos > 0.0)
    m += tails->amp_pos / tails->decay_pos * std::exp(-tails->decay_pos * x);
  return m;
}

double JumpSpec::neg_tail(double x) const {
  double m = 0.0;
  for (const auto& a : atoms)
    if (a.size < -x) m += a.rate;
  if (tails && tails->amp_neg > 0.0)
    m += tails->amp_neg / tails->decay_neg * std::exp(-tails->decay_neg * x);
  return m;
}

double JumpSpec::rate_above(double eps) const {
  double r = 0.0;
  for (const auto& a : atoms)
    if (std::abs(a.size) > eps) r += a.rate;
  if (tails) {
    r += tails->amp_pos / tails->decay_pos * std::exp(-tails->decay_pos * eps);
    r += tails->amp_neg / tails->decay_neg * std::exp(-tails->decay_neg * eps);
  }
  return r;
}

double JumpSpec::small_mean_above(double eps) const {
  double m = 0.0;
  for (const auto& a : atoms) {
    const double s = std::abs(a.size);
    if (s > eps && s < 1.0) m += a.rate * a.size;
  }
  if (tails && eps < 1.0) {
    m += tails->amp_pos * moment1_exp(eps, 1.0, tails->decay_pos);
    m -= tails->amp_neg * moment1_exp(eps, 1.0, tails->decay_neg);
  }
  return m;
}

double JumpSpec::small_expm1_above(double eps) const {
  double m = 0.0;
  for (const auto& a : atoms) {
    const double s = std::abs(a.size);
    if (s > eps && s < 1.0) m += a.rate * std::expm1(a.size);
  }
  if (tails && eps < 1.0) {
    if (tails->amp_pos > 0.0) {
      const double e = tails->decay_pos;
      // int_eps^1 (e^z - 1) e^{-ez} dz
      const double ee = std::abs(e - 1.0) < 1e-12
                            ? 1.0 - eps
                            : (std::exp((1.0 - e) * 1.0) -
                               std::exp((1.0 - e) * eps)) /
                                  (1.0 - e);
      const double one = (std::exp(-e * eps) - std::exp(-e)) / e;
      m += tails->amp_pos * (ee - one);
    }
    if (tails->amp_neg > 0.0) {
      const double e = tails->decay_neg;
      // int_eps^1 (e^{-w} - 1) e^{-ew} dw (w = -z)
      const double ee = (std::exp(-(1.0 + e) * eps) -
                         std::exp(-(1.0 + e))) /
                        (1.0 + e);
      const double one = (std::exp(-e * eps) - std::exp(-e)) / e;
      m += tails->amp_neg * (ee - one);
    }
  }
  return m;
}

double JumpSpec::mean_big_jumps() const {
  double m = 0.0;
  for (const auto& a : atoms)
    if (std::abs(a.size) >= 1.0) m += a.rate * a.size;
  if (tails) {
    const double ep = tails->decay_pos;
    const double en = tails->decay_neg;
    m += tails->amp_pos * (1.0 / ep + 1.0 / (ep * ep)) * std::exp(-ep);
    m -= tails->amp_neg * (1.0 / en + 1.0 / (en * en)) * std::exp(-en);
  }
  return m;
}

double JumpSpec::compensator_expm1() const {
  double c = 0.0;
  for (const auto& a : atoms)
    if (std::abs(a.size) < 1.0) c += a.rate * (std::expm1(a.size) - a.size);
  if (tails) {
    if (tails->amp_pos > 0.0) {
      const double e = tails->decay_pos;
      const double A = std::abs(e - 1.0) < 1e-12
                           ? 1.0
                           : (std::exp(1.0 - e) - 1.0) / (1.0 - e);
      const double B = (1.0 - std::exp(-e)) / e;
      const double C = moment1_exp(0.0, 1.0, e);
      c += tails->amp_pos * (A - B - C);
    }
    if (tails->amp_neg > 0.0) {
      const double e = tails->decay_neg;
      const double A = (1.0 - std::exp(-(1.0 + e))) / (1.0 + e);
      const double B = (1.0 - std::exp(-e)) / e;
      const double C = moment1_exp(0.0, 1.0, e);
      c += tails->amp_neg * (A - B + C);
    }
  }
  return c;
}

double JumpSpec::neg_tail_integral(double x) const {
  if (!(x > 0.0))
    throw std::invalid_argument("neg_tail_integral: x must be > 0");
  // J(a,b) = int_a^b pi(-inf, y) dy over a <= b <= 0
  auto J = [this](double a, double b) {
    double v = 0.0;
    for (const auto& at : atoms) {
      if (at.size >= 0.0) continue;
      v += at.rate * std::max(0.0, b - std::max(a, at.size));
    }
    if (tails && tails->amp_neg > 0.0) {
      const double e = tails->decay_neg;
      v += tails->amp_neg / (e * e) * (std::exp(e * b) - std::exp(e * a));
    }
    return v;
  };
  return x >= 1.0 ? J(-x, -1.0) : -J(-1.0, -x);
}

double JumpSpec::sample_size_above(double eps, philox4x32& rng) const {
  const double total = rate_above(eps);
  if (!(total > 0.0))
    throw std::invalid_argument("sample_size_above: no mass above eps");
  double pick = rng.next_double() * total;
  for (const auto& a : atoms) {
    if (std::abs(a.size) <= eps) continue;
    pick -= a.rate;
    if (pick <= 0.0) return a.size;
  }
  if (tails) {
    const double rp =
        tails->amp_pos / tails->decay_pos * std::exp(-tails->decay_pos * eps);
    if (pick <= rp && tails->amp_pos > 0.0)
      return eps + rng.next_exponential() / tails->decay_pos;
    return -(eps + rng.next_exponential() / tails->decay_neg);
  }
  return atoms.back().size;  // numerical round-off fallback
}

void LevyTriplet::validate() const {
  if (!(sigma >= 0.0))
    throw std::invalid_argument("LevyTriplet: sigma must be >= 0");
  if (!std::isfinite(drift))
    throw std::invalid_argument("LevyTriplet: drift must be finite");
  jumps.validate();
}

LevyTriplet env_from_sde_params(double alpha, double delta, double sigma,
                                const JumpSpec& pi) {
  if (!(delta >= 0.0))
    throw std::invalid_argument("env_from_sde_params: delta must be >= 0");
  if (!(sigma >= 0.0))
    throw std::invalid_argument("env_from_sde_params: sigma must be >= 0");
  pi.validate();
  LevyTriplet out;
  out.drift = alpha + delta - 0.5 * sigma * sigma - pi.compensator_expm1();
  out.sigma = sigma;
  out.jumps = pi;
  return out;
}

EnvPath EnvPath::shifted(double x) const {
  EnvPath p = *this;
  for (double& v : p.values) v -= x;
  return p;
}

EnvPath sample_path(const LevyTriplet& triplet, double start, double horizon,
                    int grid_n, std::uint64_t seed, const path_options& opt) {
  triplet.validate();
  if (grid_n < 2) throw std::invalid_argument("sample_path: grid_n >= 2");
  if (!(horizon > 0.0))
    throw std::invalid_argument("sample_path: horizon must be > 0");

  philox4x32 rng(seed, opt.stream);
  const double eps = triplet.jumps.eps_env;

  // Draw order is fixed (count, times, sizes, Gaussians) so a path is a
  // pure function of (seed, stream).
  const double rate = triplet.jumps.rate_above(eps);
  const std::uint64_t n_jumps = rng.next_poisson(rate * horizon);
  std::vector<jump_record> jumps(n_jumps);
  for (auto& j : jumps) j.time = rng.next_double() * horizon;
  std::sort(jumps.begin(), jumps.end(),
            [](const jump_record& a, const jump_record& b) {
              return a.time < b.time;
            });
  for (auto& j : jumps) j.size = triplet.jumps.sample_size_above(eps, rng);

  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(grid_n) + n_jumps);
  for (int i = 0; i < grid_n; ++i)
    times.push_back(horizon * static_cast<double>(i) / (grid_n - 1));
  for (auto& j : jumps) {
    // keep times strictly increasing under (measure-zero) collisions
    while (std::binary_search(times.begin(), times.end(), j.time))
      j.time = std::nextafter(j.time, 0.0);
    times.insert(std::upper_bound(times.begin(), times.end(), j.time), j.time);
  }

  const double drift_eff =
      triplet.drift - triplet.jumps.small_mean_above(eps);

  EnvPath path;
  path.times = std::move(times);
  path.values.resize(path.times.size());
  path.values[0] = start;
  path.jump_records = jumps;
  path.seed = seed;

  std::size_t jump_idx = 0;
  for (std::size_t i = 0; i + 1 < path.times.size(); ++i) {
    const double dt = path.times[i + 1] - path.times[i];
    double inc = drift_eff * dt;
    if (triplet.sigma > 0.0) {
      double g = rng.next_gauss();
      if (opt.flip_gaussians) g = -g;
      inc += triplet.sigma * std::sqrt(dt) * g;
    }
    if (jump_idx < jumps.size() && jumps[jump_idx].time == path.times[i + 1]) {
      inc += jumps[jump_idx].size;
      ++jump_idx;
    }
    path.values[i + 1] = path.values[i] + inc;
  }
  return path;
}

std::pair<std::vector<double>, std::vector<double>> running_extrema(
    const EnvPath& path) {
  std::vector<double> sup(path.values.size()), inf(path.values.size());
  double mx = path.values.front(), mn = path.values.front();
  for (std::size_t i = 0; i < path.values.size(); ++i) {
    mx = std::max(mx, path.values[i]);
    mn = std::min(mn, path.values[i]);
    sup[i] = mx;
    inf[i] = mn;
  }
  return {sup, inf};
}

std::optional<double> first_passage_below(const EnvPath& path, double level) {
  for (std::size_t i = 0; i < path.values.size(); ++i)
    if (path.values[i] <= level) return path.times[i];
  return std::nullopt;
}

double integrate_left(const EnvPath& path, double t,
                      const std::function<double(double)>& f) {
  if (!(t >= 0.0) || t > path.horizon() * (1.0 + 1e-12))
    throw std::invalid_argument("integrate_left: t outside path horizon");
  kahan_sum acc;
  for (std::size_t i = 0; i + 1 < path.times.size(); ++i) {
    if (path.times[i] >= t) break;
    const double hi = std::min(path.times[i + 1], t);
    acc.add((hi - path.times[i]) * f(path.values[i]));
  }
  return acc.value();
}

}  // namespace cble
