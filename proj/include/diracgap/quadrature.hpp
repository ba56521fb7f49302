#ifndef DIRACGAP_QUADRATURE_HPP
#define DIRACGAP_QUADRATURE_HPP

#include <cmath>
#include <vector>

#include "diracgap/errors.hpp"

namespace diracgap {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule (Newton iteration on P_n).
const GaussRule& gauss_legendre(int n);

/// Composite Gauss-Legendre over `panels` equal panels of [a, b].
template <typename F>
double gl_composite(F&& f, double a, double b, int panels, int order = 20) {
  const GaussRule& r = gauss_legendre(order);
  double w = (b - a) / panels;
  double sum = 0;
  for (int k = 0; k < panels; ++k) {
    double c = a + (k + 0.5) * w;
    double part = 0;
    for (std::size_t j = 0; j < r.nodes.size(); ++j)
      part += r.weights[j] * f(c + 0.5 * w * r.nodes[j]);
    sum += part;
  }
  return 0.5 * w * sum;
}

struct QuadratureResult {
  double value;
  double estimate_change;
  int panels;
};

/// Doubles the panel count until successive estimates differ by less than
/// rel_tol (relative) or abs_tol.
template <typename F>
QuadratureResult integrate(F&& f, double a, double b, double rel_tol = 1e-12,
                           double abs_tol = 1e-300, int start_panels = 8,
                           int max_panels = 1 << 16) {
  int panels = start_panels;
  double prev = gl_composite(f, a, b, panels);
  while (panels < max_panels) {
    panels *= 2;
    double cur = gl_composite(f, a, b, panels);
    double change = std::abs(cur - prev);
    if (change <= rel_tol * std::abs(cur) || change <= abs_tol)
      return {cur, change, panels};
    prev = cur;
  }
  throw NumericalError("integrate: panel doubling did not converge");
}

/// Minimizes f on [a, b]: coarse scan followed by golden-section refinement.
template <typename F>
std::pair<double, double> minimize_scalar(F&& f, double a, double b,
                                          int scan = 400, double xtol = 1e-12) {
  double best_x = a, best_f = f(a);
  double step = (b - a) / scan;
  for (int i = 1; i <= scan; ++i) {
    double x = a + i * step;
    double fx = f(x);
    if (fx < best_f) {
      best_f = fx;
      best_x = x;
    }
  }
  double lo = std::max(a, best_x - step), hi = std::min(b, best_x + step);
  const double r = 0.5 * (std::sqrt(5.0) - 1);
  double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > xtol * (1 + std::abs(lo) + std::abs(hi))) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = f(x2);
    }
  }
  double x = 0.5 * (lo + hi);
  double fx = f(x);
  if (best_f < fx) return {best_x, best_f};
  return {x, fx};
}

}  // namespace diracgap

#endif
