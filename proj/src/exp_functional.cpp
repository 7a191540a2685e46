#include "cble/exp_functional.hpp"

#include <cmath>
#include <stdexcept>

#include "cble/math_util.hpp"

namespace cble {

ExpFunctionalValue exp_functional(const EnvPath& path, double beta, double t) {
  ExpFunctionalValue out;
  out.beta = beta;
  out.t = t;
  out.value = integrate_left(
      path, t, [beta](double x) { return std::exp(-beta * x); });
  return out;
}

McEstimate stable_annealed_nonexplosion(double z, double t, double beta,
                                        double c, const LevyTriplet& triplet,
                                        std::size_t n_paths,
                                        std::uint64_t seed,
                                        const annealed_options& opt) {
  if (!(z > 0.0) || !(t > 0.0))
    throw std::invalid_argument(
        "stable_annealed_nonexplosion: z and t must be > 0");
  if (!(beta > -1.0 && beta < 0.0) || !(c < 0.0))
    throw std::invalid_argument(
        "stable_annealed_nonexplosion: beta in (-1,0), c < 0 required");
  if (n_paths < 2)
    throw std::invalid_argument(
        "stable_annealed_nonexplosion: n_paths must be >= 2");

  const int grid_n =
      std::max(2, 1 + static_cast<int>(std::ceil(t / opt.grid_dt)));
  const double bc = beta * c;  // > 0

  auto one = [&](std::uint64_t stream, bool flip) {
    path_options po;
    po.stream = stream;
    po.flip_gaussians = flip;
    const EnvPath path = sample_path(triplet, 0.0, t, grid_n, seed, po);
    const double i_val = exp_functional(path, beta, t).value;
    return std::exp(-z * std::pow(bc * i_val, -1.0 / beta));
  };

  return mc_estimate(n_paths, seed, opt.mode, [&](std::size_t i) {
    if (!opt.antithetic) return one(i, false);
    return 0.5 * (one(i, false) + one(i, true));
  });
}

}  // namespace cble
