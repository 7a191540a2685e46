#pragma once

#include <span>
#include <string>

namespace cble::detail {

enum class ladder_class { converges, diverges, inconclusive };

// Classify a sequence of nondecreasing partial integrals taken along a
// geometric refinement ladder (cutoff -> 0 or range -> inf). Convergence
// evidence is geometric decay of the increments; divergence evidence is
// increments whose successive ratios stay near or above 1 (covers both
// bounded-away-from-zero increments and slowly varying decay like 1/k).
ladder_class classify_partials(std::span<const double> partials,
                               std::string* note = nullptr);

}  // namespace cble::detail
