#include "diracgap/minmax.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "diracgap/closed_forms.hpp"
#include "diracgap/errors.hpp"
#include "diracgap/quadrature.hpp"
#include "diracgap/spectral.hpp"

namespace diracgap {

namespace {

void require_A1(const DiscreteOperator& A1) {
  if (A1.kind != OperatorKind::A_p || A1.params.p != 1.0)
    throw DomainError("min-max: operator must be A_p with p = 1");
}

void require_trial_params(const ModelParams& P, double eps, double alpha) {
  if (!(alpha > 0 && alpha < 0.5)) throw DomainError("min-max: need 0 < alpha < 1/2");
  if (!(eps > 0)) throw DomainError("min-max: need eps > 0");
  if (!(P.omega + eps * (P.m - P.omega) < (1 - 2 * eps) * P.m))
    throw DomainError("min-max: eps outside the smallness regime");
}

Eigen::VectorXd sampled_trial_state(const DiscreteOperator& A1, double delta) {
  const ModelParams& P = A1.params;
  return sample_staggered(A1.grid,
                          [&](double x) { return trial_state(P, delta, x); });
}

}  // namespace

DiscreteOperator perturbed_operator(const DiscreteOperator& A1, double eps) {
  require_A1(A1);
  DiscreteOperator B = A1;
  B.params.p = 1 - eps;
  B.matrix.diag *= 1 - eps;
  B.matrix.off *= 1 - eps;
  for (Eigen::Index i = 0; i < A1.grid.n; ++i) {
    B.matrix.diag(2 * i) += eps * potential_W(A1.params, upper_position(A1.grid, i));
    B.matrix.diag(2 * i + 1) -= eps * potential_W(A1.params, lower_position(A1.grid, i));
  }
  return B;
}

ThirdLevelCheck third_level_check(const DiscreteOperator& A1, double eps) {
  DiscreteOperator B = perturbed_operator(A1, eps);
  const Eigen::Index k = sturm_count(B.matrix, 0.0);
  if (k + 3 > B.matrix.size()) throw NumericalError("third_level_check: grid too small");
  ThirdLevelCheck c;
  c.gamma0 = eigenvalue_by_index(B.matrix, k);
  c.gamma1 = eigenvalue_by_index(B.matrix, k + 1);
  c.gamma2 = eigenvalue_by_index(B.matrix, k + 2);
  c.margin = B.suspect_margin();
  c.pass = c.gamma2 >= A1.params.m - c.margin;
  return c;
}

ProjectorBases minmax_projectors(const DiscreteOperator& A1) {
  require_A1(A1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(A1.matrix.diag, A1.matrix.off, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success)
    throw NumericalError("minmax_projectors: eigendecomposition incomplete");
  ProjectorBases out;
  out.split = 0.5 * (A1.params.omega + A1.params.m);
  const Eigen::VectorXd& ev = es.eigenvalues();
  Eigen::Index k = 0;
  while (k < ev.size() && ev(k) <= out.split) ++k;
  out.minus = es.eigenvectors().leftCols(k);
  out.plus = es.eigenvectors().rightCols(ev.size() - k);
  out.minus_eigenvalues = ev.head(k);
  out.plus_eigenvalues = ev.tail(ev.size() - k);
  if (out.minus.cols() + out.plus.cols() != A1.matrix.size())
    throw NumericalError("minmax_projectors: rank deficiency");
  return out;
}

NegativeProjector::NegativeProjector(const DiscreteOperator& A1, double tol) {
  require_A1(A1);
  const SymTridiagonal& T = A1.matrix;
  split_ = 0.5 * (A1.params.omega + A1.params.m);
  Eigen::Index k = sturm_count(T, split_);
  if (k <= 0 || k >= T.size())
    throw NumericalError("NegativeProjector: split point outside the spectrum");
  double below = eigenvalue_by_index(T, k - 1);
  double above = eigenvalue_by_index(T, k);
  gap_ = 0.999 * std::min(split_ - below, above - split_);
  sign_ = std::make_unique<SpectralSign>(T, split_, gap_, tol);
}

Eigen::VectorXd NegativeProjector::apply(const Eigen::VectorXd& v) const {
  return 0.5 * (v - sign_->apply(v));
}

Grid minmax_grid(const ModelParams& P, double eps, double alpha, double h, double c) {
  double delta = std::pow(eps, 1 + 2 * alpha);
  double L = std::max(40 / P.kappa, c / delta);
  Eigen::Index n = static_cast<Eigen::Index>(std::ceil(2 * L / h)) + 1;
  if (n % 2) ++n;
  return build_grid(L, std::max<Eigen::Index>(n, 16));
}

namespace {

struct Compressed {
  const SymTridiagonal& B;
  const NegativeProjector& Lm;
  TridiagonalLU pre;

  Eigen::VectorXd precondition(const Eigen::VectorXd& r) const {
    // (c - A_1)^{-1} is positive definite on F_- and commutes with Lambda_-.
    return Lm.apply(-pre.solve(r));
  }
};

// Top eigenpair of Lambda_- B Lambda_- on F_- by a preconditioned
// three-term Rayleigh-Ritz iteration.
double top_of_minus_block(const Compressed& C, Eigen::VectorXd x, int& iters) {
  x = C.Lm.apply(x);
  x.normalize();
  Eigen::VectorXd p;
  double theta = 0;
  double r_prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 300; ++it) {
    ++iters;
    if (it % 10 == 9) {
      x = C.Lm.apply(x);
      x.normalize();
    }
    Eigen::VectorXd Bx = apply(C.B, x);
    theta = x.dot(Bx);
    Eigen::VectorXd r = C.Lm.apply(Bx) - theta * x;
    // The residual floors at the projector's accuracy; stop once it stalls there.
    double rn = r.norm();
    if (rn < 1e-12 || (rn < 1e-8 && rn > 0.5 * r_prev)) return theta;
    r_prev = rn;
    Eigen::VectorXd w = C.precondition(r);
    std::vector<Eigen::VectorXd> basis{x, w};
    if (p.size()) basis.push_back(p);
    std::vector<Eigen::VectorXd> q;
    for (auto v : basis) {
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& u : q) v -= u.dot(v) * u;
      double nv = v.norm();
      if (nv > 1e-10) q.push_back(v / nv);
    }
    const Eigen::Index k = static_cast<Eigen::Index>(q.size());
    Eigen::MatrixXd G(k, k);
    std::vector<Eigen::VectorXd> Bq;
    for (const auto& v : q) Bq.push_back(apply(C.B, v));
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j) G(i, j) = 0.5 * (q[i].dot(Bq[j]) + q[j].dot(Bq[i]));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    Eigen::VectorXd y = es.eigenvectors().col(k - 1);
    Eigen::VectorXd xn = Eigen::VectorXd::Zero(x.size());
    for (Eigen::Index i = 0; i < k; ++i) xn += y(i) * q[i];
    p = xn - x.dot(xn) * x;
    x = xn.normalized();
  }
  throw NumericalError("gamma_bound: F_- eigen-iteration did not converge");
}

// Solves (gamma - Lambda_- B) x = b on F_- by preconditioned CG.
Eigen::VectorXd solve_shifted(const Compressed& C, double gamma, const Eigen::VectorXd& b,
                              Eigen::VectorXd x, int& iters) {
  auto op = [&](const Eigen::VectorXd& y) {
    return (gamma * y - C.Lm.apply(apply(C.B, y))).eval();
  };
  Eigen::VectorXd r = b - op(x);
  Eigen::VectorXd z = C.precondition(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  const double target = 1e-13 * b.norm();
  std::vector<double> history;
  for (int it = 0; it < 500; ++it) {
    double rel = r.norm() / b.norm();
    if (r.norm() <= target) return x;
    // Stalled at the projector's accuracy.
    if (history.size() >= 5 && rel < 1e-9 && rel > 0.5 * history[history.size() - 5]) return x;
    history.push_back(rel);
    ++iters;
    Eigen::VectorXd Ap = op(p);
    double pAp = p.dot(Ap);
    if (!(pAp > 0)) throw NumericalError("gamma_bound: shifted operator not positive");
    double a = rz / pAp;
    x += a * p;
    r -= a * Ap;
    z = C.precondition(r);
    double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  throw NumericalError("gamma_bound: inner solve did not converge");
}

}  // namespace

MinMaxReport gamma_bound(const DiscreteOperator& A1, double eps, double alpha) {
  require_A1(A1);
  const ModelParams& P = A1.params;
  require_trial_params(P, eps, alpha);
  MinMaxReport rep;
  rep.epsilon = eps;
  rep.alpha = alpha;
  rep.delta = std::pow(eps, 1 + 2 * alpha);
  rep.domain_factor = A1.grid.half_length * rep.delta;

  DiscreteOperator B = perturbed_operator(A1, eps);
  NegativeProjector Lm(A1);
  Eigen::VectorXd psi = sampled_trial_state(A1, rep.delta);
  Eigen::VectorXd lm = Lm.apply(psi);
  rep.lambda_lower_check = lm.norm() / (rep.delta / (P.m + P.omega) * psi.norm());
  Eigen::VectorXd e = psi - lm;
  if (e.norm() < 1e-12 * psi.norm())
    throw NumericalError("gamma_bound: Lambda_+ psi_delta vanishes");
  e.normalize();

  Compressed C{B.matrix, Lm, TridiagonalLU(A1.matrix, Lm.split())};
  Eigen::VectorXd start = Eigen::VectorXd::Ones(psi.size());
  Eigen::VectorXd top = eigenvalues_in(A1.matrix, -P.m, Lm.split());
  if (top.size() > 0) start = inverse_iteration(A1.matrix, top(top.size() - 1));
  int iters = 0;
  rep.gamma0 = top_of_minus_block(C, start, iters);

  Eigen::VectorXd Be = apply(B.matrix, e);
  double beta = e.dot(Be);
  Eigen::VectorXd b = Lm.apply(Be);
  double gamma = beta;
  if (!(gamma > rep.gamma0))
    throw NumericalError("gamma_bound: trial quotient below the F_- level");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  for (int step = 0; step < 60; ++step) {
    ++rep.newton_steps;
    x = solve_shifted(C, gamma, b, x, iters);
    double f = gamma - beta - b.dot(x);
    double fp = 1 + x.squaredNorm();
    double dg = f / fp;
    gamma -= dg;
    if (!(gamma > rep.gamma0)) throw NumericalError("gamma_bound: secular iteration failed");
    if (std::abs(dg) <= 1e-15 * std::max(1.0, std::abs(gamma))) break;
  }
  rep.inner_iterations = iters;
  rep.gamma1_upper = gamma;
  rep.drop = P.m - gamma;
  return rep;
}

MinMaxReport gamma_bound_dense(const DiscreteOperator& A1, double eps, double alpha) {
  require_A1(A1);
  const ModelParams& P = A1.params;
  require_trial_params(P, eps, alpha);
  MinMaxReport rep;
  rep.epsilon = eps;
  rep.alpha = alpha;
  rep.delta = std::pow(eps, 1 + 2 * alpha);
  rep.domain_factor = A1.grid.half_length * rep.delta;

  ProjectorBases pb = minmax_projectors(A1);
  DiscreteOperator B = perturbed_operator(A1, eps);
  Eigen::VectorXd psi = sampled_trial_state(A1, rep.delta);
  Eigen::VectorXd lm = pb.minus * (pb.minus.transpose() * psi);
  rep.lambda_lower_check = lm.norm() / (rep.delta / (P.m + P.omega) * psi.norm());
  Eigen::VectorXd e = psi - lm;
  if (e.norm() < 1e-12 * psi.norm())
    throw NumericalError("gamma_bound: Lambda_+ psi_delta vanishes");
  e.normalize();
  const Eigen::Index k = pb.minus.cols();
  Eigen::MatrixXd Q(psi.size(), k + 1);
  Q.leftCols(k) = pb.minus;
  Q.col(k) = e;
  Eigen::MatrixXd BQ(psi.size(), k + 1);
  for (Eigen::Index j = 0; j <= k; ++j) BQ.col(j) = apply(B.matrix, Q.col(j));
  Eigen::MatrixXd G = Q.transpose() * BQ;
  G = 0.5 * (G + G.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full(G, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> minus(G.topLeftCorner(k, k),
                                                       Eigen::EigenvaluesOnly);
  rep.gamma1_upper = full.eigenvalues()(k);
  rep.gamma0 = minus.eigenvalues()(k - 1);
  rep.drop = P.m - rep.gamma1_upper;
  return rep;
}

EnergyDropCheck energy_drop_check(const ModelParams& P, double eps, double delta) {
  if (P.p != 1.0) throw DomainError("energy_drop_check: p must be 1");
  if (!(delta > 0)) throw DomainError("energy_drop_check: need delta > 0");
  const double X = 40 / delta + 40 / P.kappa;
  auto eta2 = [&](double x) { return delta * std::exp(-2 * delta * x); };
  auto lhs_density = [&](double x) {
    Spinor<double> f = resonance_state(P, x);
    Spinor<double> fp = resonance_state_prime(P, x);
    double kinetic = f(0) * fp(1) - f(1) * fp(0);
    double mass = P.m - (2 - eps) * g_profile(P, x);
    return eta2(x) * ((1 - eps) * kinetic + mass * (f(0) * f(0) - f(1) * f(1)));
  };
  auto norm_density = [&](double x) {
    return eta2(x) * resonance_state(P, x).squaredNorm();
  };
  EnergyDropCheck r{};
  r.lhs = 2 * integrate(lhs_density, 0, X, 1e-13, 1e-300, 64).value;
  double norm2 = 2 * integrate(norm_density, 0, X, 1e-13, 1e-300, 64).value;
  double sup = resonance_state(P, 40 / P.kappa).norm();
  r.E_delta = E_delta(P, delta);
  r.drop = eps * delta * r.E_delta * sup * sup;
  r.rhs = P.m * norm2 - r.drop;
  r.relative_gap = std::abs(r.lhs - r.rhs) / std::abs(r.rhs);
  return r;
}

DropThreshold locate_drop_threshold(const ModelParams& P, double alpha, int samples,
                                    double h) {
  DropThreshold out;
  out.analytic_bound = (P.m - P.omega) / (3 * P.m - P.omega);
  auto drop_at = [&](double eps) {
    DiscreteOperator A1 = assemble_A(with_p(P, 1.0), minmax_grid(P, eps, alpha, h));
    return gamma_bound(A1, eps, alpha).drop;
  };
  double last_pos = 0;
  for (int k = 1; k <= samples; ++k) {
    double eps = 0.98 * out.analytic_bound * k / samples;
    out.eps_max_checked = eps;
    if (drop_at(eps) > 0) {
      last_pos = eps;
      continue;
    }
    double lo = last_pos, hi = eps;
    for (int it = 0; it < 12; ++it) {
      double mid = 0.5 * (lo + hi);
      if (mid > 0 && drop_at(mid) > 0)
        lo = mid;
      else
        hi = mid;
    }
    out.sign_change_found = true;
    out.eps_estimate = 0.5 * (lo + hi);
    return out;
  }
  return out;
}

}  // namespace diracgap
