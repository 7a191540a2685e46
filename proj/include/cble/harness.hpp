#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cble/fluctuation.hpp"
#include "cble/json_io.hpp"
#include "cble/quenched_flow.hpp"
#include "cble/sde_direct.hpp"

namespace cble {

struct ExperimentConfig {
  json raw;  // echoed verbatim into every output sidecar
  std::optional<Mechanism> mech;
  LevyTriplet triplet;
  std::string kind;  // subcritical|critical|grey|conditions|crosscheck|...
  double z = 1.0;
  std::vector<double> t_grid;
  std::size_t n_paths = 1000;
  std::uint64_t seed = 1;
  double grid_dt = 0.125;
  bool antithetic = false;
  exec_mode mode = exec_mode::parallel;

  // crosscheck
  double z0 = 1.0;
  double eps_b = 1e-4;
  double cap_m = 1e12;

  // fluctuation / sampling
  double start_x = -1.0;
  double fluct_dt = 0.01;
  double t_max = 100.0;
  std::vector<double> x_grid;
  std::vector<std::string> estimators;

  // sample-env / solve-quenched
  double start = 0.0;
  double horizon = 1.0;
  int grid_n = 1001;
  double lambda = 1.0;
  double t = 1.0;

  static ExperimentConfig from_json(const json& j);
};

// Annealed non-explosion estimates P_z(Z_t < inf) over a t-grid; one
// environment ensemble evaluated at every grid time (stable fast path) or
// the lambda->0 quenched limit per (path, t) otherwise.
std::vector<McEstimate> annealed_nonexplosion_series(
    const Mechanism& mech, const LevyTriplet& triplet, double z,
    std::span<const double> t_grid, std::size_t n_paths, double grid_dt,
    std::uint64_t seed, exec_mode mode, bool antithetic = false);

// Weighted log-log rate fit; weights from the delta method, w = (p/se)^2.
line_fit fit_rate(std::span<const double> t, std::span<const double> p,
                  std::span<const double> se = {});

struct regime_result {
  std::vector<double> t;
  std::vector<McEstimate> estimates;
  json preamble;  // hypothesis checks run before the experiment
  bool hypotheses_met = true;
  // critical regime
  line_fit fit;
  double rho_used = 0.5;
  double compensated_spread = 0.0;  // max/min of p*t^rho over top half
  // subcritical regime
  bool plateau = false;

  json to_json() const;
  std::string series_csv() const;  // columns t,estimate,se,n_effective
};

regime_result run_subcritical(const ExperimentConfig& cfg);
regime_result run_critical(const ExperimentConfig& cfg);

json run_grey(const ExperimentConfig& cfg);
json run_conditions(const ExperimentConfig& cfg);
json run_crosscheck(const ExperimentConfig& cfg);
FluctuationStats run_fluctuation(const ExperimentConfig& cfg);

json fluctuation_to_json(const FluctuationStats& st);

// All numeric output goes through one formatter (%.17g) so reruns with the
// same config and seed are byte-identical.
std::string format_double(double v);
void write_file(const std::string& path, const std::string& content);

}  // namespace cble
