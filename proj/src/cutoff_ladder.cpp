#include "cutoff_ladder.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace cble::detail {

ladder_class classify_partials(std::span<const double> partials,
                               std::string* note) {
  auto put = [&](const std::string& s) {
    if (note) *note = s;
  };
  if (partials.size() < 4) {
    put("ladder too short");
    return ladder_class::inconclusive;
  }

  const double scale = 1.0 + std::abs(partials.back());
  std::vector<double> inc;
  for (std::size_t i = 0; i + 1 < partials.size(); ++i)
    inc.push_back(partials[i + 1] - partials[i]);

  // Already flat: the remaining mass is below resolution.
  std::size_t last = inc.size();
  while (last > 0 && inc[last - 1] <= 1e-12 * scale) --last;
  if (last == 0) {
    put("increments vanished; integral stabilized");
    return ladder_class::converges;
  }

  std::vector<double> ratios;
  for (std::size_t i = 0; i + 1 < last; ++i)
    if (inc[i] > 1e-14 * scale) ratios.push_back(inc[i + 1] / inc[i]);
  if (ratios.size() < 3) {
    put("not enough usable increment ratios");
    return ladder_class::inconclusive;
  }

  const std::size_t k = ratios.size();
  const double r0 = ratios[k - 3], r1 = ratios[k - 2], r2 = ratios[k - 1];
  const double rmax = std::max({r0, r1, r2});
  const double rmin = std::min({r0, r1, r2});

  std::ostringstream msg;
  msg << "last increment ratios " << r0 << ", " << r1 << ", " << r2;
  put(msg.str());

  if (rmax < 0.82) return ladder_class::converges;
  if (rmin > 0.88) return ladder_class::diverges;
  return ladder_class::inconclusive;
}

}  // namespace cble::detail
