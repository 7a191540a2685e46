#include "cble/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cble/errors.hpp"
#include "cble/math_util.hpp"
#include "cble/quadrature.hpp"
#include "cutoff_ladder.hpp"

namespace cble {

namespace {

double stable_tail_coeff(const stable_params& p) {
  return -p.c / std::tgamma(-p.beta);
}

// int_0^{y_hi} y^m e^{-sy} mu_bar(y) dy for a parametric tail, integrated in
// u = ln y coordinates. The mass below the quadrature floor comes from the
// closed-form small_tail_integral when supplied; otherwise a cutoff-doubling
// check guards against silently dropping it (log-singular tails accumulate
// mass slower than any power and are unresolvable without the closed form).
double tail_near0(const tail_spec& spec, int m, double s, double y_hi,
                  const quad_options& opt) {
  // extended precision: exp((1+m)u) can underflow while the product with a
  // large tail value is still representable
  auto g = [&](double u) {
    const double y = std::exp(u);
    long double v = std::exp(static_cast<long double>((1.0L + m) * u - (s > 0.0 ? s * y : 0.0)));
    v *= static_cast<long double>(spec.tail(y));
    return static_cast<double>(v);
  };
  const double u_hi = std::log(y_hi);

  if (m == 0 && spec.small_tail_integral) {
    if (s == 0.0) return spec.small_tail_integral(y_hi);
    const double y_star = std::min(1e-12 / s, y_hi);  // e^{-sy} = 1 + O(1e-12)
    double out = spec.small_tail_integral(y_star);
    if (y_star < y_hi)
      out += integrate_or_throw(g, std::log(y_star), u_hi, opt);
    return out;
  }

  const double u_mid = std::min(-340.0, u_hi - 40.0);
  const double base = integrate_or_throw(g, u_mid, u_hi, opt);
  const double ext = integrate(g, std::max(u_mid - 340.0, -680.0), u_mid, opt).value;
  const double tol = std::max(opt.abs_tol, opt.rel_tol * std::abs(base + ext));
  if (std::abs(ext) > tol) {
    std::ostringstream msg;
    msg << "parametric tail: mass near 0 not resolvable by quadrature "
           "(cutoff extension contributes "
        << ext << "); supply small_tail_integral";
    throw numeric_error(msg.str());
  }
  return base + ext;
}

}  // namespace

Mechanism::Mechanism(kind_variant kind, double delta)
    : kind_(std::move(kind)), delta_(delta) {
  if (!(delta_ >= 0.0))
    throw std::invalid_argument("Mechanism: delta must be >= 0");
}

Mechanism Mechanism::stable(double beta, double c, double delta) {
  if (!(beta > -1.0 && beta < 0.0))
    throw std::invalid_argument("Mechanism::stable: beta must be in (-1,0)");
  if (!(c < 0.0))
    throw std::invalid_argument("Mechanism::stable: c must be < 0");
  return Mechanism(stable_params{beta, c}, delta);
}

Mechanism Mechanism::finite_atoms(std::vector<mass_atom> atoms, double delta) {
  for (const auto& a : atoms) {
    if (a.mass < 0.0)
      throw std::invalid_argument("Mechanism::finite_atoms: mass < 0");
    if (!(a.size > 0.0))
      throw std::invalid_argument("Mechanism::finite_atoms: size must be > 0");
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const mass_atom& a, const mass_atom& b) {
              return a.size < b.size;
            });
  return Mechanism(atoms_kind{std::move(atoms)}, delta);
}

Mechanism Mechanism::parametric_tail(tail_spec spec, double delta) {
  if (!spec.tail)
    throw std::invalid_argument("Mechanism::parametric_tail: tail required");
  if (!(spec.support_hi > 0.0))
    throw std::invalid_argument("Mechanism::parametric_tail: bad support");
  Mechanism m(std::move(spec), delta);
  m.validate_parametric();
  return m;
}

void Mechanism::validate_parametric() const {
  const auto& spec = std::get<tail_spec>(kind_);
  const double hi = std::min(1.0, spec.support_hi);
  const double at_hi = spec.tail(hi * 0.999999);
  if (!std::isfinite(at_hi) || at_hi < 0.0)
    throw std::invalid_argument("parametric_tail: tail not finite near 1");

  // (1 ^ x)-integrability gate: int_0^1 mu_bar must be finite, screened on a
  // cutoff ladder. Certified mechanisms pass unless the evidence clearly
  // diverges (e.g. mu_bar(y) = 1/y gives constant increments per decade).
  std::vector<double> partials;
  double acc = 0.0;
  double upper = hi;
  quad_options opt;
  opt.rel_tol = 1e-9;
  opt.abs_tol = 1e-13;
  auto in_log = [&](double u) {
    const double y = std::exp(u);
    return y * spec.tail(y);
  };
  for (double lo = 0.1 * hi; lo > 1e-11 * hi; lo *= 0.1) {
    acc += integrate_or_throw(in_log, std::log(lo), std::log(upper), opt);
    partials.push_back(acc);
    upper = lo;
  }
  std::string note;
  const auto cls = detail::classify_partials(partials, &note);
  if (cls == detail::ladder_class::diverges) {
    std::ostringstream msg;
    msg << "parametric_tail: int_0^1 mu_bar diverges (" << note
        << "); (1 ^ x) mu integrability violated";
    throw std::invalid_argument(msg.str());
  }
  if (cls == detail::ladder_class::inconclusive &&
      !spec.integrable_certificate) {
    throw std::invalid_argument(
        "parametric_tail: integrability screening inconclusive and no "
        "certificate supplied (" + note + ")");
  }

  // spot-check |psi0| increasing on a log grid
  double prev = 0.0;
  for (double l : {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3}) {
    const double cur = abs_psi0(l);
    if (cur < prev * (1.0 - 1e-9))
      throw std::invalid_argument(
          "parametric_tail: |psi0| not increasing; tail is not a valid "
          "nonincreasing jump tail");
    prev = cur;
  }
}

double Mechanism::tail_laplace(double s, int moment) const {
  if (!(s > 0.0)) throw std::invalid_argument("tail_laplace: s must be > 0");
  if (std::isinf(s)) return 0.0;
  if (const auto* p = std::get_if<stable_params>(&kind_)) {
    // Gamma integrals: int y^{-1-beta} e^{-sy} dy = Gamma(-beta) s^beta and
    // int y^{-beta} e^{-sy} dy = Gamma(1-beta) s^{beta-1}
    if (moment == 0) return -p->c * std::pow(s, p->beta);
    return -p->c * (-p->beta) * std::pow(s, p->beta - 1.0);
  }
  if (const auto* a = std::get_if<atoms_kind>(&kind_)) {
    double sum = 0.0;
    for (const auto& at : a->atoms) {
      const double sx = s * at.size;
      if (moment == 0)
        sum += at.mass * (-std::expm1(-sx)) / s;
      else
        sum += at.mass * (1.0 - (1.0 + sx) * std::exp(-sx)) / (s * s);
    }
    return sum;
  }
  const auto& spec = std::get<tail_spec>(kind_);
  quad_options opt;
  opt.rel_tol = 1e-10;
  opt.abs_tol = 1e-14;
  const double split = std::min({1.0 / s, spec.support_hi, 1.0});
  const double near0 = tail_near0(spec, moment, s, split, opt);

  // rest of the range in log coordinates: the e^{-s e^u} layer sits at
  // u = ln(1/s) with O(1) width there, and s*split <= 1 keeps the left end
  // resolved from the first panel on
  double rest = 0.0;
  const double u_lo = std::log(split);
  double u_hi = std::max(u_lo + 2.0, std::log(1.0 / s) + 45.0);
  if (std::isfinite(spec.support_hi))
    u_hi = std::min(u_hi, std::log(spec.support_hi));
  if (u_hi > u_lo) {
    auto g = [&](double u) {
      const double y = std::exp(u);
      const long double w = std::exp(static_cast<long double>((1.0L + moment) * u - s * y));
      return static_cast<double>(w * static_cast<long double>(spec.tail(y)));
    };
    rest = integrate_or_throw(g, u_lo, u_hi, opt);
  }
  return near0 + rest;
}

double Mechanism::psi0(double lambda) const {
  if (!(lambda >= 0.0))
    throw std::invalid_argument("psi0: lambda must be >= 0");
  if (lambda == 0.0) return 0.0;
  if (const auto* p = std::get_if<stable_params>(&kind_))
    return p->c * std::pow(lambda, 1.0 + p->beta);
  if (const auto* a = std::get_if<atoms_kind>(&kind_)) {
    double sum = 0.0;
    for (const auto& at : a->atoms)
      sum += at.mass * (-std::expm1(-lambda * at.size));
    return -sum;
  }
  // |psi0(lambda)| = lambda * int_0^inf e^{-lambda x} mu_bar(x) dx
  return -lambda * tail_laplace(lambda, 0);
}

double Mechanism::mu_bar(double y) const {
  if (!(y >= 0.0)) throw std::invalid_argument("mu_bar: y must be >= 0");
  if (const auto* p = std::get_if<stable_params>(&kind_)) {
    if (y == 0.0) return std::numeric_limits<double>::infinity();
    return stable_tail_coeff(*p) * std::pow(y, -(1.0 + p->beta));
  }
  if (const auto* a = std::get_if<atoms_kind>(&kind_)) {
    double m = 0.0;
    for (const auto& at : a->atoms)
      if (at.size > y) m += at.mass;
    return m;
  }
  const auto& spec = std::get<tail_spec>(kind_);
  if (y >= spec.support_hi) return 0.0;
  return std::max(0.0, spec.tail(y));
}

double Mechanism::small_jump_mean(double eps) const {
  if (!(eps > 0.0))
    throw std::invalid_argument("small_jump_mean: eps must be > 0");
  if (const auto* p = std::get_if<stable_params>(&kind_)) {
    const double K = stable_tail_coeff(*p);
    return K * (1.0 + p->beta) / (-p->beta) * std::pow(eps, -p->beta);
  }
  if (const auto* a = std::get_if<atoms_kind>(&kind_)) {
    double m = 0.0;
    for (const auto& at : a->atoms)
      if (at.size <= eps) m += at.mass * at.size;
    return m;
  }
  // int_0^eps x mu(dx) = int_0^eps mu_bar - eps*mu_bar(eps)
  const auto& spec = std::get<tail_spec>(kind_);
  const double hi = std::min(eps, spec.support_hi);
  quad_options opt;
  opt.rel_tol = 1e-9;
  opt.abs_tol = 1e-14;
  return tail_near0(spec, 0, 0.0, hi, opt) - eps * mu_bar(eps);
}

double Mechanism::sample_jump_above(double eps, philox4x32& rng) const {
  const double total = mu_bar(eps);
  if (!(total > 0.0))
    throw std::invalid_argument("sample_jump_above: no mass above eps");
  if (const auto* p = std::get_if<stable_params>(&kind_)) {
    // tail inverse: P(X > x | X > eps) = (x/eps)^{-(1+beta)}
    const double u = rng.next_double();
    return eps * std::pow(u, -1.0 / (1.0 + p->beta));
  }
  if (const auto* a = std::get_if<atoms_kind>(&kind_)) {
    double pick = rng.next_double() * total;
    for (const auto& at : a->atoms) {
      if (at.size <= eps) continue;
      pick -= at.mass;
      if (pick <= 0.0) return at.size;
    }
    return a->atoms.back().size;
  }
  // generic tail: invert mu_bar by bisection on the monotone tail
  const auto& spec = std::get<tail_spec>(kind_);
  const double target = rng.next_double() * total;
  double lo = eps;
  double hi = std::isfinite(spec.support_hi) ? spec.support_hi : eps;
  if (!std::isfinite(spec.support_hi)) {
    hi = std::max(2.0 * eps, 1.0);
    while (mu_bar(hi) > target && hi < 1e300) hi *= 2.0;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (mu_bar(mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

grey_report grey_classify(const Mechanism& mech,
                          std::span<const double> cutoffs) {
  grey_report rep;
  if (mech.as_stable()) {
    rep.verdict = grey_class::explosive;
    rep.note = "stable fast path: int_0 dl/|c|l^{1+beta} < inf for beta<0";
    return rep;
  }
  if (const auto* atoms = mech.as_atoms()) {
    double m1 = 0.0;
    for (const auto& a : *atoms) m1 += a.mass * a.size;
    rep.verdict = grey_class::conservative;
    std::ostringstream note;
    note << "finite-atom fast path: |psi0(l)| <= l * " << m1
         << " near 0 forces divergence";
    rep.note = note.str();
    return rep;
  }

  std::vector<double> eps(cutoffs.begin(), cutoffs.end());
  if (eps.empty()) eps = [] {
    std::vector<double> e;
    for (double x = 1e-2; x > 0.9e-12; x *= 0.1) e.push_back(x);
    return e;
  }();
  if (eps.size() < 4 || !std::is_sorted(eps.rbegin(), eps.rend()))
    throw std::invalid_argument(
        "grey_classify: cutoffs must be a decreasing sequence, length >= 4");

  // I(eps) = int_eps^1 dl/|psi0(l)|, accumulated decade by decade in
  // u = ln(lambda) coordinates
  quad_options opt;
  opt.rel_tol = 1e-7;
  opt.abs_tol = 1e-12;
  auto integrand = [&](double u) {
    const double l = std::exp(u);
    return l / mech.abs_psi0(l);
  };
  double acc = 0.0;
  double upper = 1.0;
  rep.evidence.clear();
  for (const double e : eps) {
    acc += integrate_or_throw(integrand, std::log(e), std::log(upper), opt);
    rep.evidence.push_back(acc);
    upper = e;
  }
  std::string note;
  switch (detail::classify_partials(rep.evidence, &note)) {
    case detail::ladder_class::converges:
      rep.verdict = grey_class::explosive;
      break;
    case detail::ladder_class::diverges:
      rep.verdict = grey_class::conservative;
      break;
    case detail::ladder_class::inconclusive:
      rep.verdict = grey_class::inconclusive;
      break;
  }
  rep.note = note;
  return rep;
}

double phi_lambda(const Mechanism& mech, double lambda, double u) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("phi_lambda: lambda must be > 0");
  const double s = lambda * std::exp(u);
  if (std::isinf(s)) return 0.0;
  return mech.tail_laplace(s, 0);
}

double exp_integral_E1(double w) { return expint_e1(w); }

}  // namespace cble
