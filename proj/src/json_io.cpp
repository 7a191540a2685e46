#include "cble/json_io.hpp"

#include <cmath>
#include <stdexcept>

namespace cble {

json to_json(const JumpSpec& spec) {
  json j;
  j["eps_env"] = spec.eps_env;
  j["atoms"] = json::array();
  for (const auto& a : spec.atoms)
    j["atoms"].push_back({{"rate", a.rate}, {"size", a.size}});
  if (spec.tails)
    j["exp_tails"] = {{"amp_pos", spec.tails->amp_pos},
                      {"decay_pos", spec.tails->decay_pos},
                      {"amp_neg", spec.tails->amp_neg},
                      {"decay_neg", spec.tails->decay_neg}};
  return j;
}

JumpSpec jumpspec_from_json(const json& j) {
  JumpSpec spec;
  spec.eps_env = j.value("eps_env", 1e-3);
  if (j.contains("atoms"))
    for (const auto& a : j.at("atoms"))
      spec.atoms.push_back({a.at("rate").get<double>(),
                            a.at("size").get<double>()});
  if (j.contains("exp_tails")) {
    const auto& t = j.at("exp_tails");
    exp_tails tails;
    tails.amp_pos = t.value("amp_pos", 0.0);
    tails.decay_pos = t.value("decay_pos", 1.0);
    tails.amp_neg = t.value("amp_neg", 0.0);
    tails.decay_neg = t.value("decay_neg", 1.0);
    spec.tails = tails;
  }
  spec.validate();
  return spec;
}

json to_json(const LevyTriplet& triplet) {
  return {{"drift", triplet.drift},
          {"sigma", triplet.sigma},
          {"jumps", to_json(triplet.jumps)}};
}

LevyTriplet triplet_from_json(const json& j) {
  LevyTriplet t;
  t.drift = j.at("drift").get<double>();
  t.sigma = j.at("sigma").get<double>();
  if (j.contains("jumps") && !j.at("jumps").is_null() &&
      !(j.at("jumps").is_array() && j.at("jumps").empty()))
    t.jumps = jumpspec_from_json(j.at("jumps"));
  t.validate();
  return t;
}

Mechanism mechanism_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const double delta = j.value("delta", 0.0);
  if (kind == "stable")
    return Mechanism::stable(j.at("beta").get<double>(),
                             j.at("c").get<double>(), delta);
  if (kind == "atoms") {
    std::vector<mass_atom> atoms;
    for (const auto& a : j.at("atoms"))
      atoms.push_back({a.at("mass").get<double>(),
                       a.at("size").get<double>()});
    return Mechanism::finite_atoms(std::move(atoms), delta);
  }
  if (kind == "exp_tail") {
    const double amp = j.at("amplitude").get<double>();
    const double dec = j.at("decay").get<double>();
    if (!(amp > 0.0) || !(dec > 0.0))
      throw std::invalid_argument("exp_tail mechanism: amplitude, decay > 0");
    tail_spec spec;
    spec.tail = [amp, dec](double y) { return amp * std::exp(-dec * y); };
    spec.small_tail_integral = [amp, dec](double eps) {
      return amp / dec * (-std::expm1(-dec * eps));
    };
    spec.integrable_certificate = true;  // bounded tail at 0
    return Mechanism::parametric_tail(std::move(spec), delta);
  }
  throw std::invalid_argument("mechanism_from_json: unknown kind '" + kind +
                              "'");
}

json to_json(const McEstimate& est) {
  return {{"mean", est.mean},
          {"se", est.se},
          {"ci95", {est.ci_lo, est.ci_hi}},
          {"n", est.n},
          {"seed", est.seed}};
}

json to_json(const ConditionReport& rep) {
  return {{"condition", rep.condition},
          {"verdict", to_string(rep.verdict)},
          {"evidence", rep.evidence},
          {"note", rep.note}};
}

json to_json(const grey_report& rep) {
  const char* v = rep.verdict == grey_class::conservative ? "Conservative"
                  : rep.verdict == grey_class::explosive  ? "Explosive"
                                                          : "Inconclusive";
  return {{"condition", "grey"},
          {"verdict", v},
          {"evidence", rep.evidence},
          {"note", rep.note}};
}

}  // namespace cble
