#include "diracgap/closed_forms.hpp"

#include <sstream>

#include "diracgap/quadrature.hpp"

namespace diracgap {

double c_inf_closed_form(const ModelParams& P) {
  double pre = 1 / (4 * P.omega * P.omega);
  if (P.omega <= P.m / 2) return pre * (P.m * P.m - 2 * P.omega * P.omega) / 2;
  return pre * (P.m - P.omega) * (P.m - P.omega);
}

double E_delta(const ModelParams& P, double delta) {
  double X = 40 / P.kappa;
  auto f = [&](double x) {
    return std::exp(-2 * delta * x) * energy_density(P, x);
  };
  // |psi_inf| increases on [0, inf); at X it equals its supremum to
  // double precision.
  double sup = resonance_state(P, X).norm();
  return 2 * integrate(f, 0, X, 1e-13).value / (sup * sup);
}

ConstantsReport constants(const ModelParams& P) {
  if (P.p != 1) throw DomainError("constants: defined for p = 1 only");
  ConstantsReport r;
  double X = 40 / P.kappa;
  auto norm2 = [&](double x) { return resonance_state(P, x).squaredNorm(); };
  auto [xmin, fmin] = minimize_scalar(norm2, 0.0, X, 4000);
  r.c_inf = fmin;
  r.c_inf_argmin = xmin;
  auto [xmax, negmax] =
      minimize_scalar([&](double x) { return -norm2(x); }, 0.0, X, 4000);
  (void)xmax;
  r.psi_inf_sup = std::sqrt(-negmax);
  r.E_l1 = 2 * integrate([&](double x) { return energy_density(P, x); }, 0, X,
                         1e-13)
                   .value;
  r.E_star = r.E_l1 / (r.psi_inf_sup * r.psi_inf_sup);

  double m = P.m, w = P.omega, k = P.kappa;
  double lg = std::log((m + k) / w);
  r.closed_form_c_inf = c_inf_closed_form(P);
  r.closed_form_psi_sup = k / (2 * w);
  r.closed_form_E_l1 = (k * k / (4 * w * w)) * lg;
  r.closed_form_E_star = (k / (2 * w)) * lg;
  r.ratio_of_closed_forms =
      r.closed_form_E_l1 / (r.closed_form_psi_sup * r.closed_form_psi_sup);
  r.E_l1_closed_form_supported =
      std::abs(r.E_l1 - r.closed_form_E_l1) <= 1e-8 * r.E_l1;
  r.E_star_closed_form_supported =
      std::abs(r.E_star - r.closed_form_E_star) <= 1e-8 * r.E_star;
  std::ostringstream s;
  s << "quadrature " << (r.E_l1_closed_form_supported ? "supports" : "rejects")
    << " the closed-form ||E||_1 form; "
    << (r.E_star_closed_form_supported ? "supports" : "rejects")
    << " the closed-form E_star form";
  if (std::abs(r.E_star - r.ratio_of_closed_forms) <= 1e-8 * r.E_star)
    s << "; E_star = ln((m+kappa)/omega)";
  r.supported_form = s.str();
  return r;
}

}  // namespace diracgap
