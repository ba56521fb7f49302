#ifndef DIRACGAP_CLOSED_FORMS_HPP
#define DIRACGAP_CLOSED_FORMS_HPP

#include <cmath>
#include <string>

#include <Eigen/Core>

#include "diracgap/errors.hpp"
#include "diracgap/model.hpp"

namespace diracgap {

template <typename Scalar>
using Spinor = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar>
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;

enum class Side { plus, minus };

namespace detail {

// tanh(y) and sech^2(y) from exp(-2|y|); no cancellation and no overflow.
template <typename Scalar>
struct Hyperbolic {
  Scalar t;
  Scalar s;
};

template <typename Scalar>
Hyperbolic<Scalar> hyperbolic(const Scalar& y) {
  using std::abs;
  using std::exp;
  using std::expm1;
  Scalar a = abs(y);
  Scalar e = exp(-2 * a);
  Scalar t = -expm1(-2 * a) / (1 + e);
  if (y < 0) t = -t;
  Scalar s = 4 * e / ((1 + e) * (1 + e));
  return {t, s};
}

template <typename Scalar>
Scalar sign_of(const Scalar& x) {
  return x > 0 ? Scalar(1) : (x < 0 ? Scalar(-1) : Scalar(0));
}

}  // namespace detail

/// g(x) = (m-w)(1 - tanh^2 kx)/(1 - nu tanh^2 kx); independent of p.
template <typename Scalar>
Scalar g_profile(const ModelParamsT<Scalar>& P, const Scalar& x) {
  auto h = detail::hyperbolic(P.kappa * x);
  return (P.m - P.omega) * h.s / ((1 - P.nu) + P.nu * h.s);
}

/// dg/dx.
template <typename Scalar>
Scalar g_prime(const ModelParamsT<Scalar>& P, const Scalar& x) {
  auto h = detail::hyperbolic(P.kappa * x);
  Scalar D = (1 - P.nu) + P.nu * h.s;
  return -2 * P.kappa * (P.m - P.omega) * (1 - P.nu) * h.s * h.t / (D * D);
}

// g'/g, finite everywhere.
template <typename Scalar>
Scalar g_log_derivative(const ModelParamsT<Scalar>& P, const Scalar& x) {
  auto h = detail::hyperbolic(P.kappa * x);
  Scalar D = (1 - P.nu) + P.nu * h.s;
  return -2 * P.kappa * (1 - P.nu) * h.t / D;
}

template <typename Scalar>
Scalar potential_W(const ModelParamsT<Scalar>& P, const Scalar& x) {
  return P.m - g_profile(P, x);
}

/// M(x) = m - (p+1) g(px), with g supplied by the caller.
template <typename Scalar, typename GFun>
Scalar M_via_g(const ModelParamsT<Scalar>& P, const Scalar& x, GFun&& g) {
  return P.m - (P.p + 1) * g(P.p * x);
}

template <typename Scalar>
Scalar M_profile(const ModelParamsT<Scalar>& P, const Scalar& x) {
  return M_via_g(P, x, [&](const Scalar& y) { return g_profile(P, y); });
}

/// The tanh form of M, evaluated literally.
template <typename Scalar>
Scalar M_closed_form(const ModelParamsT<Scalar>& P, const Scalar& x) {
  using std::tanh;
  Scalar t = tanh(P.p * P.kappa * x);
  Scalar t2 = t * t;
  return P.m - 2 * P.m * (P.p + 1) * (P.nu / (1 + P.nu)) * (1 - t2) /
                   (1 - P.nu * t2);
}

template <typename Scalar>
struct MEvaluation {
  Scalar from_g;
  Scalar closed;
};

/// Both evaluations of M; throws if they differ by more than 1e-12 m.
template <typename Scalar>
MEvaluation<Scalar> potential_M(const ModelParamsT<Scalar>& P, const Scalar& x,
                                const Scalar& tol = Scalar(1e-12)) {
  using std::abs;
  MEvaluation<Scalar> r{M_profile(P, x), M_closed_form(P, x)};
  if (abs(r.from_g - r.closed) > tol * P.m)
    throw ConsistencyError("potential_M: g-based and tanh-based forms disagree");
  return r;
}

/// dM/dx = -p (p+1) g'(px).
template <typename Scalar>
Scalar M_prime(const ModelParamsT<Scalar>& P, const Scalar& x) {
  return -P.p * (P.p + 1) * g_prime(P, P.p * x);
}

/// Derivative formula without the chain-rule factor p*kappa.
template <typename Scalar>
Scalar M_prime_naive(const ModelParamsT<Scalar>& P, const Scalar& x) {
  using std::tanh;
  Scalar t = tanh(P.p * P.kappa * x);
  Scalar D = 1 - P.nu * t * t;
  return 4 * P.m * (P.p + 1) * P.nu * ((1 - P.nu) / (1 + P.nu)) *
         ((1 - t * t) / D) * (t / D);
}

/// Solitary wave (v, u) rebuilt from S = v^2 - u^2 = ((p+1) g(px))^{1/p}
/// and uv = -S'/(4w).
template <typename Scalar>
Spinor<Scalar> solitary_wave(const ModelParamsT<Scalar>& P, const Scalar& x) {
  using std::isfinite;
  using std::pow;
  using std::sqrt;
  Scalar G = (P.p + 1) * g_profile(P, P.p * x);
  Scalar S = pow(G, 1 / P.p);
  // uv / S, from S'/S = (p+1) g'(px) / G.
  Scalar q = -g_log_derivative(P, P.p * x) / (4 * P.omega);
  Scalar root = sqrt(1 + 4 * q * q);
  Scalar v = sqrt(S * (1 + root) / 2);
  Scalar u = v > 0 ? S * q / v : Scalar(0);
  if (!isfinite(v) || !isfinite(u))
    throw NumericalError("solitary_wave: reconstruction failed");
  return Spinor<Scalar>(v, u);
}

/// Q = p S^{p-1} [[v^2, -uv], [-uv, u^2]], evaluated as p S^p times a
/// bounded matrix.
template <typename Scalar>
Mat2<Scalar> q_matrix(const ModelParamsT<Scalar>& P, const Scalar& x) {
  using std::sqrt;
  Scalar G = (P.p + 1) * g_profile(P, P.p * x);
  Scalar q = -g_log_derivative(P, P.p * x) / (4 * P.omega);
  Scalar root = sqrt(1 + 4 * q * q);
  Scalar vv = (1 + root) / 2;
  Scalar uu = 2 * q * q / (1 + root);
  Mat2<Scalar> Q;
  Q << vv, -q, -q, uu;
  return P.p * G * Q;
}

/// psi_{+inf} (side plus) or sigma_1 psi_{+inf} (side minus); p must be 1.
template <typename Scalar>
Spinor<Scalar> resonance_state(const ModelParamsT<Scalar>& P, const Scalar& x,
                               Side side = Side::plus) {
  using std::sqrt;
  if (P.p != Scalar(1))
    throw DomainError("resonance_state: defined for p = 1 only");
  auto h = detail::hyperbolic(P.kappa * x);
  Scalar D = (1 - P.nu) + P.nu * h.s;
  Scalar psi1 = sqrt(P.nu) * h.t / D;
  Scalar psi2 = -(P.nu / (1 - P.nu)) * h.s / D;
  if (side == Side::plus) return Spinor<Scalar>(psi1, psi2);
  return Spinor<Scalar>(psi2, psi1);
}

/// psi_delta = sqrt(delta) exp(-delta |x|) psi_inf.
template <typename Scalar>
Spinor<Scalar> trial_state(const ModelParamsT<Scalar>& P, const Scalar& delta,
                           const Scalar& x) {
  using std::abs;
  using std::exp;
  using std::sqrt;
  if (!(delta > 0)) throw DomainError("trial_state: need delta > 0");
  return sqrt(delta) * exp(-delta * abs(x)) * resonance_state(P, x);
}

/// d/dx psi_inf, used by quadrature checks.
template <typename Scalar>
Spinor<Scalar> resonance_state_prime(const ModelParamsT<Scalar>& P,
                                     const Scalar& x) {
  using std::sqrt;
  if (P.p != Scalar(1))
    throw DomainError("resonance_state_prime: defined for p = 1 only");
  auto h = detail::hyperbolic(P.kappa * x);
  Scalar D = (1 - P.nu) + P.nu * h.s;
  // t' = k s, s' = -2 k s t, D' = -2 nu k s t.
  Scalar tp = P.kappa * h.s;
  Scalar sp = -2 * P.kappa * h.s * h.t;
  Scalar Dp = P.nu * sp;
  Scalar psi1p = sqrt(P.nu) * (tp * D - h.t * Dp) / (D * D);
  Scalar psi2p = -(P.nu / (1 - P.nu)) * (sp * D - h.s * Dp) / (D * D);
  return Spinor<Scalar>(psi1p, psi2p);
}

template <typename Scalar>
struct EnergyDensity {
  Scalar defining;
  Scalar expanded;
};

/// Both forms of the threshold energy density; throws on disagreement.
template <typename Scalar>
EnergyDensity<Scalar> energy_density_forms(const ModelParamsT<Scalar>& P,
                                           const Scalar& x) {
  using std::abs;
  Spinor<Scalar> psi = resonance_state(P, x);
  Scalar g = g_profile(P, x);
  Scalar W = P.m - g;
  Scalar n2 = psi.squaredNorm();
  Scalar s3 = psi(0) * psi(0) - psi(1) * psi(1);
  EnergyDensity<Scalar> e{P.m * n2 - W * s3,
                          (2 * P.m - g) * psi(1) * psi(1) + g * psi(0) * psi(0)};
  Scalar scale = P.m * n2 + abs(W * s3);
  if (abs(e.defining - e.expanded) > Scalar(1e-12) * scale)
    throw ConsistencyError("energy_density: the two forms disagree");
  return e;
}

template <typename Scalar>
Scalar energy_density(const ModelParamsT<Scalar>& P, const Scalar& x) {
  return energy_density_forms(P, x).expanded;
}

/// (A_1 - m) W sigma_3 psi_inf in closed form.
template <typename Scalar>
Spinor<Scalar> hat_psi(const ModelParamsT<Scalar>& P, const Scalar& x) {
  Spinor<Scalar> psi = resonance_state(P, x);
  Scalar g = g_profile(P, x);
  Scalar gp = g_prime(P, x);
  Scalar W = P.m - g;
  Scalar c1 = gp * psi(1) - 4 * g * W * psi(0);
  Scalar c2 = gp * psi(0) + 4 * P.m * W * psi(1) - 4 * g * W * psi(1);
  return Spinor<Scalar>(c1, c2);
}

struct ConstantsReport {
  double c_inf = 0;
  double c_inf_argmin = 0;
  double psi_inf_sup = 0;
  double E_l1 = 0;
  double E_star = 0;
  double closed_form_c_inf = 0;
  double closed_form_psi_sup = 0;
  double closed_form_E_l1 = 0;
  double closed_form_E_star = 0;
  // ln((m + kappa)/w): the ratio of the closed-form E_l1 and psi_sup^2.
  double ratio_of_closed_forms = 0;
  bool E_l1_closed_form_supported = false;
  bool E_star_closed_form_supported = false;
  std::string supported_form;
};

/// Constants of the resonance state by minimization, maximization and
/// quadrature, next to their closed forms. p must be 1.
ConstantsReport constants(const ModelParams& P);

/// Closed-form piecewise formula for inf |psi_inf|^2.
double c_inf_closed_form(const ModelParams& P);

/// E_delta = int exp(-2 delta |x|) E(x) dx / sup|psi_inf|^2.
double E_delta(const ModelParams& P, double delta);

}  // namespace diracgap

#endif
