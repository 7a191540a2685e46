#pragma once

#include <json.hpp>

#include "cble/conditions.hpp"
#include "cble/levy_env.hpp"
#include "cble/mc_runner.hpp"
#include "cble/mechanism.hpp"

namespace cble {

using json = nlohmann::json;

// JumpSpec <-> {"eps_env":..., "atoms":[{"rate","size"}...],
//               "exp_tails":{"amp_pos","decay_pos","amp_neg","decay_neg"}}
json to_json(const JumpSpec& spec);
JumpSpec jumpspec_from_json(const json& j);

// LevyTriplet <-> {"drift":..., "sigma":..., "jumps": <JumpSpec>}
json to_json(const LevyTriplet& triplet);
LevyTriplet triplet_from_json(const json& j);

// Mechanism from {"kind":"stable","beta","c"[,"delta"]} |
// {"kind":"atoms","atoms":[{"mass","size"}...][,"delta"]} |
// {"kind":"exp_tail","amplitude","decay"[,"delta"]} with
// mu_bar(y) = amplitude * exp(-decay y).
Mechanism mechanism_from_json(const json& j);

json to_json(const McEstimate& est);
json to_json(const ConditionReport& rep);
json to_json(const grey_report& rep);

}  // namespace cble
