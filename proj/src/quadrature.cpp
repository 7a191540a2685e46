#include "cble/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

#include "cble/errors.hpp"

namespace cble {

namespace {

// Kronrod-15 abscissae and weights on [-1,1]; the embedded Gauss-7 rule
// uses the odd-indexed abscissae. QUADPACK constants.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct interval {
  double a, b;
  double value;
  double error;
  bool operator<(const interval& o) const { return error < o.error; }
};

interval gk15(const quad_fn& f, double a, double b, int& evals) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double resk = 0.0, resg = 0.0;

  const double fc = f(c);
  evals += 1;
  resk += kWgk[7] * fc;
  resg += kWg[3] * fc;

  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    evals += 2;
    resk += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  interval iv;
  iv.a = a;
  iv.b = b;
  iv.value = resk * h;
  iv.error = std::abs((resk - resg) * h);
  return iv;
}

}  // namespace

quad_result integrate(const quad_fn& f, double a, double b,
                      const quad_options& opt) {
  quad_result out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }

  std::priority_queue<interval> heap;
  heap.push(gk15(f, a, b, out.evaluations));
  double total = heap.top().value;
  double total_err = heap.top().error;
  int n_iv = 1;

  auto tol = [&](double v) {
    return std::max(opt.abs_tol, opt.rel_tol * std::abs(v));
  };

  while (total_err > tol(total) && n_iv < opt.max_intervals) {
    const interval worst = heap.top();
    heap.pop();
    const double m = 0.5 * (worst.a + worst.b);
    if (m <= worst.a || m >= worst.b) {
      // interval no longer splittable in double precision
      heap.push(worst);
      break;
    }
    const interval left = gk15(f, worst.a, m, out.evaluations);
    const interval right = gk15(f, m, worst.b, out.evaluations);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++n_iv;
  }

  out.value = sign * total;
  out.error = total_err;
  out.converged = total_err <= tol(total) && std::isfinite(total);
  return out;
}

quad_result integrate_half_line(const quad_fn& f, double a,
                                const quad_options& opt) {
  auto g = [&f, a](double u) {
    const double om = 1.0 - u;
    const double x = a + u / om;
    return f(x) / (om * om);
  };
  return integrate(g, 0.0, 1.0, opt);
}

quad_result integrate_sqrt_singular0(const quad_fn& f, double b,
                                     const quad_options& opt) {
  const double s = std::sqrt(b);
  auto g = [&f](double u) { return 2.0 * u * f(u * u); };
  return integrate(g, 0.0, s, opt);
}

double integrate_or_throw(const quad_fn& f, double a, double b,
                          const quad_options& opt) {
  const quad_result r = integrate(f, a, b, opt);
  if (!r.converged) {
    std::ostringstream msg;
    msg << "quadrature did not converge on [" << a << ", " << b
        << "]: value=" << r.value << " residual=" << r.error;
    throw numeric_error(msg.str());
  }
  return r.value;
}

}  // namespace cble
