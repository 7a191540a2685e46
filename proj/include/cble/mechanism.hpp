#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cble/rng.hpp"

namespace cble {

// psi0(lambda) = c * lambda^{1+beta}; tail mu_bar(x) = (|c|/Gamma(-beta)) *
// x^{-(1+beta)}.
struct stable_params {
  double beta = -0.5;  // in (-1, 0)
  double c = -1.0;     // < 0
};

struct mass_atom {
  double mass = 0.0;
  double size = 0.0;  // > 0
};

// User-supplied tail mu_bar(y) = mu((y, inf)). The caller certifies
// int_0^1 x mu(dx) < inf analytically; construction additionally screens
// the small-x integral on a cutoff ladder and rejects clear divergence.
struct tail_spec {
  std::function<double(double)> tail;
  // optional closed form of int_0^eps mu_bar(y) dy; required for tails whose
  // mass near 0 accumulates slower than any power (a log-singular tail is
  // unresolvable by quadrature in double precision without it)
  std::function<double(double)> small_tail_integral;
  double support_hi = std::numeric_limits<double>::infinity();
  bool integrable_certificate = false;
};

enum class grey_class { conservative, explosive, inconclusive };

struct grey_report {
  grey_class verdict = grey_class::inconclusive;
  std::vector<double> evidence;  // partial integrals I(eps_k)
  std::string note;
};

// Subordinator-type branching data: psi(l) = -delta*l - int (1-e^{-lx}) mu(dx),
// psi0 = psi + delta*l.
class Mechanism {
 public:
  static Mechanism stable(double beta, double c, double delta = 0.0);
  static Mechanism finite_atoms(std::vector<mass_atom> atoms,
                                double delta = 0.0);
  static Mechanism parametric_tail(tail_spec spec, double delta = 0.0);

  double delta() const { return delta_; }

  // psi0(lambda) <= 0; closed form for stable/atoms, adaptive quadrature of
  // lambda * int e^{-lambda x} mu_bar(x) dx otherwise.
  double psi0(double lambda) const;
  double abs_psi0(double lambda) const { return -psi0(lambda); }

  double mu_bar(double y) const;
  // mu((eps, inf)); thinning intensity per unit population
  double mass_above(double eps) const { return mu_bar(eps); }
  // int_0^eps x mu(dx); drift correction for dropped branching jumps
  double small_jump_mean(double eps) const;
  // one branching jump size conditioned on x > eps
  double sample_jump_above(double eps, philox4x32& rng) const;

  // int y^moment e^{-s y} mu_bar(y) dy for moment in {0,1}
  double tail_laplace(double s, int moment) const;

  const stable_params* as_stable() const {
    return std::get_if<stable_params>(&kind_);
  }
  const std::vector<mass_atom>* as_atoms() const {
    auto* a = std::get_if<atoms_kind>(&kind_);
    return a ? &a->atoms : nullptr;
  }
  bool is_parametric() const {
    return std::holds_alternative<tail_spec>(kind_);
  }

 private:
  struct atoms_kind {
    std::vector<mass_atom> atoms;
  };
  using kind_variant = std::variant<stable_params, atoms_kind, tail_spec>;

  Mechanism(kind_variant kind, double delta);
  void validate_parametric() const;

  kind_variant kind_;
  double delta_ = 0.0;
};

// Grey's conservativeness test via I(eps) = int_eps^1 d(lambda)/|psi0|.
// Analytic fast paths for the stable and finite-atom variants; otherwise a
// numerical verdict from the cutoff ladder (default 1e-2 .. 1e-12), with
// Inconclusive as a first-class outcome.
grey_report grey_classify(const Mechanism& mech,
                          std::span<const double> cutoffs = {});

// Phi_lambda(u) = int_0^inf exp(-lambda e^u y) mu_bar(y) dy, lambda > 0.
double phi_lambda(const Mechanism& mech, double lambda, double u);

// E1(w) = int_1^inf e^{-w y}/y dy, w > 0.
double exp_integral_E1(double w);

}  // namespace cble
