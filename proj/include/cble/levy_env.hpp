#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "cble/rng.hpp"

namespace cble {

// One weighted atom of the environment jump measure, in xi coordinates.
struct jump_atom {
  double rate = 0.0;
  double size = 0.0;
};

// Two-sided exponential jump density: amp_pos*exp(-decay_pos*z) on z > 0
// and amp_neg*exp(-decay_neg*|z|) on z < 0. Finite activity, all the
// integrals the samplers and condition checkers need stay closed-form.
struct exp_tails {
  double amp_pos = 0.0;
  double decay_pos = 1.0;
  double amp_neg = 0.0;
  double decay_neg = 1.0;
};

struct JumpSpec {
  std::vector<jump_atom> atoms;
  std::optional<exp_tails> tails;
  double eps_env = 1e-3;  // jumps with |z| <= eps_env are dropped

  bool empty() const { return atoms.empty() && !tails; }
  void validate() const;

  // pi((x, inf)) for x >= 0
  double mass_above(double x) const;
  // pi((-inf, -x)) for x >= 0, the paper's negative tail at -x
  double neg_tail(double x) const;
  // total retained rate pi({|z| > eps})
  double rate_above(double eps) const;
  // int over {eps < |z| < 1} of z pi(dz): compensator drift of retained
  // small jumps
  double small_mean_above(double eps) const;
  // int over {|z| >= 1} of z pi(dz)
  double mean_big_jumps() const;
  // int over {eps < |z| < 1} of (e^z - 1) pi(dz): compensator drift of the
  // retained small jumps of S
  double small_expm1_above(double eps) const;
  // int over (-1,1) of (e^z - 1 - z) pi(dz), closed form per variant
  double compensator_expm1() const;
  // int_{-x}^{-1} of neg_tail(-y) dy (signed when x < 1)
  double neg_tail_integral(double x) const;

  // one jump size conditioned on |z| > eps; pre: rate_above(eps) > 0
  double sample_size_above(double eps, philox4x32& rng) const;
};

// Characteristics (drift, sigma, jumps) of the auxiliary environment xi.
struct LevyTriplet {
  double drift = 0.0;  // per unit time
  double sigma = 0.0;
  JumpSpec jumps;

  void validate() const;
  // E[xi_1] = drift + int over {|z| >= 1} of z pi(dz)
  double mean() const { return drift + jumps.mean_big_jumps(); }
};

// xi triplet from the SDE parameters (alpha, delta, sigma, pi):
// drift = alpha + delta - sigma^2/2 - int_(-1,1) (e^z - 1 - z) pi(dz),
// jump sizes already in xi coordinates.
LevyTriplet env_from_sde_params(double alpha, double delta, double sigma,
                                const JumpSpec& pi);

struct jump_record {
  double time = 0.0;
  double size = 0.0;
};

// One sampled trajectory of xi on a grid with jump times inserted. Values
// are cadlag: at a jump time the stored value includes the jump. Path
// integrals use the piecewise-constant (left value) policy throughout.
struct EnvPath {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<jump_record> jump_records;
  std::uint64_t seed = 0;

  double horizon() const { return times.back(); }
  EnvPath shifted(double x) const;  // xi - x
};

struct path_options {
  std::uint64_t stream = 0;     // substream (path) index under the seed
  bool flip_gaussians = false;  // antithetic Brownian increments
};

EnvPath sample_path(const LevyTriplet& triplet, double start, double horizon,
                    int grid_n, std::uint64_t seed,
                    const path_options& opt = {});

// Pointwise running supremum/infimum over the stored skeleton.
std::pair<std::vector<double>, std::vector<double>> running_extrema(
    const EnvPath& path);

// First stored time with value <= level, if any.
std::optional<double> first_passage_below(const EnvPath& path, double level);

// int_0^t f(xi_s) ds under the left-value policy; pre: t <= horizon.
double integrate_left(const EnvPath& path, double t,
                      const std::function<double(double)>& f);

}  // namespace cble
