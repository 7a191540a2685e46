#pragma once

#include <string>
#include <vector>

#include "cble/levy_env.hpp"
#include "cble/mechanism.hpp"

namespace cble {

enum class cond_verdict { holds, fails, inconclusive };

struct ConditionReport {
  std::string condition;
  cond_verdict verdict = cond_verdict::inconclusive;
  std::vector<double> evidence;  // partial integrals along the ladder
  std::string note;
};

const char* to_string(cond_verdict v);

// A_xi(x) = -drift + pi(-inf,-1) + int_{-x}^{-1} pi(-inf,y) dy, x > 0.
double a_xi(const LevyTriplet& triplet, double x);

// Integral test int_(a,inf) y/A_xi(y) |dPhi_lambda(y)| < inf, evaluated on a
// geometrically growing range with tail extrapolation.
ConditionReport check_condition_Axi(const Mechanism& mech,
                                    const LevyTriplet& triplet, double lambda,
                                    double a);

// Equivalent form int_0^inf E1(lambda y) mu_bar(y) dy < inf; the log
// singularity at 0 is resolved on a shrinking cutoff ladder.
ConditionReport check_condition_E1(const Mechanism& mech, double lambda);

// Sufficient form of (B): int_{0+} z ln^2(z) mu(dz) < inf.
ConditionReport check_condition_B(const Mechanism& mech);

// psi0(lambda) >= c * lambda^{1+beta} verified on a log grid plus endpoint
// slope checks; Holds is a verified-on-grid verdict, never a proof.
ConditionReport check_condition_C(const Mechanism& mech, double beta, double c,
                                  std::span<const double> lambda_grid = {});

}  // namespace cble
