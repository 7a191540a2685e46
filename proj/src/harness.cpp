#include "cble/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cble/errors.hpp"
#include "cble/exp_functional.hpp"

namespace cble {

namespace {

std::vector<double> parse_t_grid(const json& j) {
  std::vector<double> grid;
  if (j.is_array()) {
    for (const auto& v : j) grid.push_back(v.get<double>());
  } else {
    const double start = j.at("start").get<double>();
    const double stop = j.at("stop").get<double>();
    const double ratio = j.value("ratio", 2.0);
    if (!(start > 0.0) || !(stop >= start) || !(ratio > 1.0))
      throw std::invalid_argument("t_grid: need 0 < start <= stop, ratio > 1");
    for (double t = start; t <= stop * (1.0 + 1e-12); t *= ratio)
      grid.push_back(t);
  }
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (grid[i] <= grid[i - 1])
      throw std::invalid_argument("t_grid must be increasing");
  return grid;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig cfg;
  cfg.raw = j;
  cfg.kind = j.value("experiment", "");
  if (j.contains("mechanism")) cfg.mech = mechanism_from_json(j.at("mechanism"));
  if (j.contains("environment"))
    cfg.triplet = triplet_from_json(j.at("environment"));
  else if (j.contains("environment_sde")) {
    const auto& e = j.at("environment_sde");
    JumpSpec pi;
    if (e.contains("jumps")) pi = jumpspec_from_json(e.at("jumps"));
    cfg.triplet = env_from_sde_params(
        e.at("alpha").get<double>(), e.value("delta", 0.0),
        e.at("sigma").get<double>(), pi);
  }
  cfg.z = j.value("z", 1.0);
  if (j.contains("t_grid")) cfg.t_grid = parse_t_grid(j.at("t_grid"));
  cfg.n_paths = j.value("n_paths", std::size_t{1000});
  cfg.seed = j.value("seed", std::uint64_t{1});
  cfg.grid_dt = j.value("grid_dt", 0.125);
  cfg.antithetic = j.value("antithetic", false);
  if (j.value("serial", false)) cfg.mode = exec_mode::serial;

  cfg.z0 = j.value("z0", cfg.z);
  cfg.eps_b = j.value("eps_b", 1e-4);
  cfg.cap_m = j.value("cap_m", 1e12);

  cfg.start_x = j.value("start_x", -1.0);
  cfg.fluct_dt = j.value("fluct_dt", 0.01);
  cfg.t_max = j.value("t_max", 100.0);
  if (j.contains("x_grid"))
    for (const auto& v : j.at("x_grid")) cfg.x_grid.push_back(v.get<double>());
  if (j.contains("estimators"))
    for (const auto& v : j.at("estimators"))
      cfg.estimators.push_back(v.get<std::string>());

  cfg.start = j.value("start", 0.0);
  cfg.horizon = j.value("horizon", 1.0);
  cfg.grid_n = j.value("grid_n", 1001);
  cfg.lambda = j.value("lambda", 1.0);
  cfg.t = j.value("t", 1.0);
  return cfg;
}

std::vector<McEstimate> annealed_nonexplosion_series(
    const Mechanism& mech, const LevyTriplet& triplet, double z,
    std::span<const double> t_grid, std::size_t n_paths, double grid_dt,
    std::uint64_t seed, exec_mode mode, bool antithetic) {
  if (t_grid.empty())
    throw std::invalid_argument("annealed series: empty t_grid");
  if (!(z > 0.0)) throw std::invalid_argument("annealed series: z must be > 0");
  const double t_max = t_grid.back();
  const int grid_n =
      std::max(2, 1 + static_cast<int>(std::ceil(t_max / grid_dt)));
  const std::size_t n_cols = t_grid.size();
  const stable_params* st = mech.as_stable();

  auto row_for = [&](std::uint64_t stream, bool flip, std::span<double> row) {
    path_options po;
    po.stream = stream;
    po.flip_gaussians = flip;
    const EnvPath path = sample_path(triplet, 0.0, t_max, grid_n, seed, po);
    if (st != nullptr) {
      // prefix accumulation of I_{0,t}(beta xi) at every grid time
      kahan_sum acc;
      auto emit = [&](std::size_t j, double partial) {
        const double i_val = acc.value() + partial;
        const double v0 =
            std::pow(st->beta * st->c * i_val, -1.0 / st->beta);
        row[j] = std::exp(-z * v0);
      };
      std::size_t j = 0;
      for (std::size_t i = 0; i + 1 < path.times.size() && j < n_cols; ++i) {
        const double w = std::exp(-st->beta * path.values[i]);
        while (j < n_cols && t_grid[j] <= path.times[i + 1]) {
          emit(j, (t_grid[j] - path.times[i]) * w);
          ++j;
        }
        acc.add((path.times[i + 1] - path.times[i]) * w);
      }
      for (; j < n_cols; ++j) emit(j, 0.0);
      return;
    }
    for (std::size_t j = 0; j < n_cols; ++j)
      row[j] = nonexplosion_prob_given_env(mech, path, z, t_grid[j]);
  };

  std::vector<double> buffer(n_paths * n_cols);
  fill_path_rows(
      n_paths, n_cols, mode,
      [&](std::size_t i, std::span<double> row) {
        row_for(i, false, row);
        if (antithetic) {
          std::vector<double> other(n_cols);
          row_for(i, true, other);
          for (std::size_t j = 0; j < n_cols; ++j)
            row[j] = 0.5 * (row[j] + other[j]);
        }
      },
      buffer);
  return reduce_columns(buffer, n_paths, n_cols, seed);
}

line_fit fit_rate(std::span<const double> t, std::span<const double> p,
                  std::span<const double> se) {
  if (t.size() != p.size() || t.size() < 2)
    throw std::invalid_argument("fit_rate: need >= 2 matching points");
  std::vector<double> lx, ly, lw;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(p[i] > 0.0))
      throw std::invalid_argument("fit_rate: probabilities must be > 0");
    lx.push_back(std::log(t[i]));
    ly.push_back(std::log(p[i]));
    if (!se.empty() && se[i] > 0.0) {
      const double rel = se[i] / p[i];
      lw.push_back(1.0 / (rel * rel));
    } else {
      lw.push_back(1.0);
    }
  }
  return fit_line(lx, ly, lw);
}

namespace {

json condition_preamble(const ExperimentConfig& cfg, bool subcritical) {
  const Mechanism& mech = *cfg.mech;
  json pre;
  pre["environment_mean"] = cfg.triplet.mean();
  pre["grey"] = to_json(grey_classify(mech));
  if (subcritical) {
    pre["condition_E1"] = to_json(check_condition_E1(mech, 1.0));
  } else {
    pre["condition_B"] = to_json(check_condition_B(mech));
    if (const auto* st = mech.as_stable())
      pre["condition_C"] = to_json(check_condition_C(mech, st->beta, st->c));
    const std::size_t n_rho = std::min<std::size_t>(cfg.n_paths, 4000);
    fluctuation_options fo;
    fo.grid_dt = 0.05;
    fo.mode = cfg.mode;
    pre["spitzer_rho"] =
        to_json(spitzer_rho(cfg.triplet, 100.0, n_rho, cfg.seed + 7, fo));
  }
  return pre;
}

bool verdict_is(const json& rep, const char* want) {
  return rep.at("verdict").get<std::string>() == want;
}

}  // namespace

regime_result run_subcritical(const ExperimentConfig& cfg) {
  if (!cfg.mech) throw std::invalid_argument("run_subcritical: no mechanism");
  if (cfg.t_grid.empty())
    throw std::invalid_argument("run_subcritical: no t_grid");
  if (cfg.n_paths < 100)
    throw std::invalid_argument("run_subcritical: n_paths >= 100 required");

  regime_result res;
  res.preamble = condition_preamble(cfg, true);
  const double mean = res.preamble["environment_mean"].get<double>();
  res.hypotheses_met = mean < 0.0 &&
                       !verdict_is(res.preamble["grey"], "Conservative") &&
                       verdict_is(res.preamble["condition_E1"], "Holds");

  res.t = cfg.t_grid;
  res.estimates = annealed_nonexplosion_series(
      *cfg.mech, cfg.triplet, cfg.z, cfg.t_grid, cfg.n_paths, cfg.grid_dt,
      cfg.seed, cfg.mode, cfg.antithetic);

  const std::size_t m = res.estimates.size();
  if (m >= 2) {
    const auto& a = res.estimates[m - 2];
    const auto& b = res.estimates[m - 1];
    const double comb = std::sqrt(a.se * a.se + b.se * b.se);
    res.plateau = std::abs(b.mean - a.mean) < 2.0 * comb && b.mean > 0.0;
  }
  return res;
}

regime_result run_critical(const ExperimentConfig& cfg) {
  if (!cfg.mech) throw std::invalid_argument("run_critical: no mechanism");
  if (cfg.t_grid.size() < 4)
    throw std::invalid_argument("run_critical: need a t_grid of >= 4 points");
  if (cfg.n_paths < 100)
    throw std::invalid_argument("run_critical: n_paths >= 100 required");

  regime_result res;
  res.preamble = condition_preamble(cfg, false);
  const double mean = res.preamble["environment_mean"].get<double>();
  const double rho = res.preamble["spitzer_rho"]["mean"].get<double>();
  res.rho_used = rho;
  res.hypotheses_met = std::abs(mean) < 1e-9 &&
                       !verdict_is(res.preamble["grey"], "Conservative") &&
                       verdict_is(res.preamble["condition_B"], "Holds") &&
                       rho > 0.05 && rho < 0.95;
  if (res.preamble.contains("condition_C"))
    res.hypotheses_met = res.hypotheses_met &&
                         verdict_is(res.preamble["condition_C"], "Holds");

  res.t = cfg.t_grid;
  res.estimates = annealed_nonexplosion_series(
      *cfg.mech, cfg.triplet, cfg.z, cfg.t_grid, cfg.n_paths, cfg.grid_dt,
      cfg.seed, cfg.mode, cfg.antithetic);

  std::vector<double> tv, pv, sev;
  for (std::size_t i = 0; i < res.t.size(); ++i) {
    if (res.estimates[i].mean <= 0.0) continue;
    tv.push_back(res.t[i]);
    pv.push_back(res.estimates[i].mean);
    sev.push_back(res.estimates[i].se);
  }
  if (tv.size() < 2) throw numeric_error("run_critical: series collapsed to 0");
  res.fit = fit_rate(tv, pv, sev);

  double lo = 1e300, hi = 0.0;
  for (std::size_t i = tv.size() / 2; i < tv.size(); ++i) {
    const double comp = pv[i] * std::pow(tv[i], rho);
    lo = std::min(lo, comp);
    hi = std::max(hi, comp);
  }
  res.compensated_spread = hi / lo;
  return res;
}

json run_grey(const ExperimentConfig& cfg) {
  if (!cfg.mech) throw std::invalid_argument("run_grey: no mechanism");
  json out;
  out["grey"] = to_json(grey_classify(*cfg.mech));
  return out;
}

json run_conditions(const ExperimentConfig& cfg) {
  if (!cfg.mech) throw std::invalid_argument("run_conditions: no mechanism");
  const Mechanism& mech = *cfg.mech;
  const double lambda = cfg.lambda;
  json out;
  out["grey"] = to_json(grey_classify(mech));
  out["condition_E1"] = to_json(check_condition_E1(mech, lambda));
  out["condition_B"] = to_json(check_condition_B(mech));
  if (const auto* st = mech.as_stable())
    out["condition_C"] = to_json(check_condition_C(mech, st->beta, st->c));
  if (cfg.raw.contains("environment") || cfg.raw.contains("environment_sde"))
    out["condition_Axi"] =
        to_json(check_condition_Axi(mech, cfg.triplet, lambda, 1.0));
  return out;
}

json run_crosscheck(const ExperimentConfig& cfg) {
  if (!cfg.mech) throw std::invalid_argument("run_crosscheck: no mechanism");
  crosscheck_options opt;
  opt.grid_dt = cfg.raw.value("grid_dt", 0.005);
  opt.mode = cfg.mode;
  const crosscheck_report rep = crosscheck_nonexplosion(
      *cfg.mech, cfg.triplet, cfg.z0, cfg.t, cfg.n_paths, cfg.eps_b, cfg.cap_m,
      cfg.seed, opt);
  json out;
  out["direct"] = to_json(rep.direct);
  out["quenched"] = to_json(rep.quenched);
  out["difference"] = rep.difference;
  out["combined_se"] = rep.combined_se;
  out["within_tolerance"] = rep.within_tolerance;
  out["verdict_stable_across_caps"] = rep.verdict_stable_across_caps;
  out["budget_exceeded_paths"] = rep.budget_exceeded_paths;
  out["bias_note"] = rep.bias_note;
  out["cap_fractions"] = json::array();
  for (const auto& [cap, frac] : rep.cap_fractions)
    out["cap_fractions"].push_back({{"cap", cap}, {"fraction", frac}});
  return out;
}

FluctuationStats run_fluctuation(const ExperimentConfig& cfg) {
  FluctuationStats st;
  st.n_paths = cfg.n_paths;
  st.seed = cfg.seed;
  auto wants = [&](const char* name) {
    if (cfg.estimators.empty()) return true;
    for (const auto& e : cfg.estimators)
      if (e == name) return true;
    return false;
  };
  fluctuation_options fo;
  fo.grid_dt = cfg.fluct_dt;
  fo.mode = cfg.mode;
  if (wants("rho"))
    st.rho_hat = spitzer_rho(cfg.triplet, cfg.t_max, cfg.n_paths, cfg.seed, fo);
  if (wants("survival")) {
    std::vector<double> grid = cfg.t_grid;
    if (grid.empty())
      for (double t = 4.0; t <= 256.0; t *= 2.0) grid.push_back(t);
    fluctuation_options so = fo;
    so.grid_dt = std::max(fo.grid_dt, 0.05);
    st.exponent = survival_exponent(cfg.triplet, cfg.start_x, grid,
                                    cfg.n_paths, cfg.seed + 1, so);
  }
  if (wants("renewal")) {
    std::vector<double> xg = cfg.x_grid;
    if (xg.empty())
      for (double x = 0.2; x <= 3.0 + 1e-9; x += 0.2) xg.push_back(x);
    renewal_options ro;
    ro.mode = cfg.mode;
    st.renewal =
        empirical_renewal(cfg.triplet, ladder_direction::ascending, xg,
                          std::min<std::size_t>(cfg.n_paths, 2000),
                          cfg.seed + 2, ro);
  }
  if (wants("martingale")) {
    std::vector<double> grid;
    for (double t = 1.0; t <= 16.0; t *= 2.0) grid.push_back(t);
    st.martingale = martingale_check(cfg.triplet, cfg.start_x, grid,
                                     cfg.n_paths, cfg.seed + 3, fo);
  }
  return st;
}

json fluctuation_to_json(const FluctuationStats& st) {
  json out;
  out["rho_hat"] = to_json(st.rho_hat);
  out["survival"] = {{"t", st.exponent.t},
                     {"p", st.exponent.p},
                     {"se", st.exponent.se},
                     {"dropped_t", st.exponent.dropped_t},
                     {"slope", st.exponent.fit.slope},
                     {"intercept", st.exponent.fit.intercept},
                     {"r2", st.exponent.fit.r2},
                     {"power_law", st.exponent.power_law}};
  out["renewal"] = {{"x", st.renewal.x},
                    {"u_hat", st.renewal.u_hat},
                    {"se", st.renewal.se},
                    {"censored", st.renewal.censored},
                    {"caveat", st.renewal.caveat}};
  out["martingale"] = {{"t", st.martingale.t},
                       {"stat", st.martingale.stat},
                       {"se", st.martingale.se},
                       {"max_dev_se", st.martingale.max_dev_se},
                       {"note", st.martingale.note}};
  out["n_paths"] = st.n_paths;
  out["seed"] = st.seed;
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string regime_result::series_csv() const {
  std::ostringstream os;
  os << "t,estimate,se,n_effective\n";
  for (std::size_t i = 0; i < t.size(); ++i)
    os << format_double(t[i]) << ',' << format_double(estimates[i].mean) << ','
       << format_double(estimates[i].se) << ',' << estimates[i].n << '\n';
  return os.str();
}

json regime_result::to_json() const {
  json out;
  out["preamble"] = preamble;
  out["hypotheses_met"] = hypotheses_met;
  out["t"] = t;
  json series = json::array();
  for (const auto& e : estimates) series.push_back(cble::to_json(e));
  out["estimates"] = series;
  out["fit"] = {{"slope", fit.slope},
                {"intercept", fit.intercept},
                {"r2", fit.r2},
                {"slope_se", fit.slope_se}};
  out["rho_used"] = rho_used;
  out["compensated_spread"] = compensated_spread;
  out["plateau"] = plateau;
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << content;
}

}  // namespace cble
