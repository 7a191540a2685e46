#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "cble/levy_env.hpp"
#include "cble/mc_runner.hpp"
#include "cble/mechanism.hpp"

namespace cble {

// Driver increments of the environment S aligned to a time grid.
struct SPath {
  std::vector<double> times;
  std::vector<double> seg_ds;   // continuous S increment over [t_i, t_{i+1})
  std::vector<double> jump_ds;  // S jump applied at t_{i+1} (0 if none)

  static SPath zero(double horizon, int grid_n);
  // Rebuild S from a sampled xi path: same Brownian increments, jump sizes
  // mapped through z -> e^z - 1, S drift recovered from the xi drift and
  // the branching linear part delta.
  static SPath from_env(const EnvPath& env, const LevyTriplet& triplet,
                        double delta);
};

struct ZPath {
  std::vector<double> times;
  std::vector<double> z;  // +inf from the explosion time on
  bool exploded = false;
  double explosion_time = std::numeric_limits<double>::infinity();
  double sup_z = 0.0;  // running sup including the crossing value
  double eps_b = 0.0;
  std::uint64_t env_seed = 0;
  int clipped_steps = 0;
  bool jump_budget_exceeded = false;
};

struct sde_options {
  std::uint64_t stream = 0;
  // Above z_accel the thinning threshold grows as rel_trunc * Z and the
  // folded band enters through its exact mean; keeps the cost of the
  // super-cap climb bounded without touching the sub-accel law.
  double z_accel = 1e6;
  double rel_trunc = 1e-2;
  double max_expected_jumps_per_chunk = 64.0;
  long max_jumps_per_path = 20000000;
};

// Euler scheme for Z_t = z0 + delta int Z ds + branching jumps + int Z dS
// with Poisson thinning of branching jumps above eps_b and the dropped
// small-jump mean added back as deterministic drift.
ZPath simulate_z(const Mechanism& mech, const SPath& driver, double z0,
                 double eps_b, double cap_m, std::uint64_t seed,
                 const sde_options& opt = {});

struct crosscheck_options {
  double grid_dt = 0.005;
  std::size_t n_quenched_paths = 0;  // 0: same as n_paths
  std::vector<double> cap_sweep = {1e9, 1e12, 1e15};
  double tol_abs = 0.02;  // verdict: |diff| < tol_abs + 3 * combined SE
  sde_options sde;
  exec_mode mode = exec_mode::parallel;
};

struct crosscheck_report {
  McEstimate direct;    // non-explosion fraction at cap_m
  McEstimate quenched;  // annealed quenched-route estimate
  double difference = 0.0;
  double combined_se = 0.0;
  bool within_tolerance = false;
  std::vector<std::pair<double, double>> cap_fractions;
  bool verdict_stable_across_caps = false;
  std::size_t budget_exceeded_paths = 0;
  std::string bias_note;
};

crosscheck_report crosscheck_nonexplosion(const Mechanism& mech,
                                          const LevyTriplet& triplet,
                                          double z0, double t,
                                          std::size_t n_paths, double eps_b,
                                          double cap_m, std::uint64_t seed,
                                          const crosscheck_options& opt = {});

// CSV export (time,z); exploded values render as inf.
std::string to_csv(const ZPath& path);

}  // namespace cble
