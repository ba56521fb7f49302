#include "diracgap/spectral.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <complex>
#include <numbers>

#include "diracgap/errors.hpp"

namespace diracgap {

std::string to_string(Parity p) {
  switch (p) {
    case Parity::even: return "+";
    case Parity::odd: return "-";
    case Parity::mixed: return "mixed";
  }
  return "mixed";
}

GridSpinor to_grid_spinor(const DiscreteOperator& op, const Eigen::VectorXd& v) {
  GridSpinor s;
  s.grid = op.grid;
  const Eigen::Index n = op.grid.n;
  if (!op.spinor()) {
    s.c1 = v.cast<std::complex<double>>();
    s.c2 = Eigen::VectorXcd::Zero(n);
    s.staggered = false;
    return s;
  }
  s.c1.resize(n);
  s.c2.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::complex<double> a = v(2 * i), b = v(2 * i + 1);
    if (op.phases.size() == 2 * n) {
      a *= std::polar(1.0, op.phases(2 * i));
      b *= std::polar(1.0, op.phases(2 * i + 1));
    }
    s.c1(i) = a;
    s.c2(i) = b;
  }
  s.staggered = true;
  return s;
}

namespace {

// Value at fractional index t from an 8-point Lagrange stencil.
std::complex<double> lagrange8(const Eigen::VectorXcd& f, double t) {
  const Eigen::Index n = f.size();
  Eigen::Index j0 = static_cast<Eigen::Index>(std::floor(t)) - 3;
  j0 = std::clamp<Eigen::Index>(j0, 0, n - 8);
  std::complex<double> sum = 0;
  for (int a = 0; a < 8; ++a) {
    double w = 1;
    for (int b = 0; b < 8; ++b)
      if (b != a) w *= (t - static_cast<double>(j0 + b)) / static_cast<double>(a - b);
    sum += w * f(j0 + a);
  }
  return sum;
}

Eigen::VectorXcd shift_to_nodes(const Eigen::VectorXcd& f, double offset) {
  Eigen::VectorXcd out(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i)
    out(i) = lagrange8(f, static_cast<double>(i) + offset);
  return out;
}

}  // namespace

ParityResiduals parity_residuals(const GridSpinor& psi) {
  Eigen::VectorXcd a = psi.c1, b = psi.c2;
  if (psi.staggered) {
    // c1 sits a quarter cell left of the node, c2 a quarter cell right.
    a = shift_to_nodes(psi.c1, 0.25);
    b = shift_to_nodes(psi.c2, -0.25);
  }
  const Eigen::Index n = a.size();
  Eigen::VectorXcd ra = a.reverse(), rb = b.reverse();
  double norm = std::sqrt(a.squaredNorm() + b.squaredNorm());
  if (norm == 0) return {1.0, 1.0};
  double plus = std::sqrt((a - ra).squaredNorm() + (b + rb).squaredNorm());
  double minus = std::sqrt((a + ra).squaredNorm() + (b - rb).squaredNorm());
  (void)n;
  return {plus / (2 * norm), minus / (2 * norm)};
}

Parity classify_parity(const GridSpinor& psi, double tol) {
  ParityResiduals r = parity_residuals(psi);
  if (r.plus < tol) return Parity::even;
  if (r.minus < tol) return Parity::odd;
  return Parity::mixed;
}

Eigen::VectorXd SpectrumReport::trusted() const {
  std::vector<double> keep;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
    if (!suspect[i]) keep.push_back(eigenvalues(i));
  return Eigen::Map<Eigen::VectorXd>(keep.data(), static_cast<Eigen::Index>(keep.size()));
}

namespace {

double purity(const DiscreteOperator& op, const Eigen::VectorXd& v) {
  ParityResiduals r = parity_residuals(to_grid_spinor(op, v));
  return std::min(r.plus, r.minus);
}

// Rotates a degenerate pair so that both members are as close to a pure
// parity as possible.
void rotate_pair(const DiscreteOperator& op, Eigen::VectorXd& v1, Eigen::VectorXd& v2) {
  double best = purity(op, v1) + purity(op, v2);
  Eigen::VectorXd b1 = v1, b2 = v2;
  for (int k = 1; k < 180; ++k) {
    double th = std::numbers::pi * k / 180.0;
    Eigen::VectorXd w1 = std::cos(th) * v1 + std::sin(th) * v2;
    Eigen::VectorXd w2 = -std::sin(th) * v1 + std::cos(th) * v2;
    double score = purity(op, w1) + purity(op, w2);
    if (score < best) {
      best = score;
      b1 = w1;
      b2 = w2;
    }
  }
  v1 = b1;
  v2 = b2;
}

}  // namespace

SpectrumReport window_eigs(const DiscreteOperator& op, double lo, double hi) {
  SpectrumReport rep;
  rep.suspect_margin = op.suspect_margin();
  rep.eigenvalues = eigenvalues_in(op.matrix, lo, hi);
  const Eigen::Index k = rep.eigenvalues.size();
  rep.residuals.resize(k);
  double scale = std::max(std::abs(op.gap_lower), std::abs(op.gap_upper));
  for (Eigen::Index i = 0; i < k; ++i) {
    double lam = rep.eigenvalues(i);
    std::vector<Eigen::VectorXd> cluster;
    for (Eigen::Index j = 0; j < i; ++j)
      if (std::abs(rep.eigenvalues(j) - lam) < 1e-6 * scale)
        cluster.push_back(rep.eigenvectors[j]);
    rep.eigenvectors.push_back(inverse_iteration(op.matrix, lam, cluster));
  }
  for (Eigen::Index i = 0; i + 1 < k; ++i)
    if (std::abs(rep.eigenvalues(i + 1) - rep.eigenvalues(i)) < 1e-8 * scale)
      rotate_pair(op, rep.eigenvectors[i], rep.eigenvectors[i + 1]);
  bool lower_threshold = op.spinor();
  for (Eigen::Index i = 0; i < k; ++i) {
    double lam = rep.eigenvalues(i);
    rep.residuals(i) = residual(op.matrix, lam, rep.eigenvectors[i]);
    bool sus = lam > op.gap_upper - rep.suspect_margin ||
               (lower_threshold && lam < op.gap_lower + rep.suspect_margin);
    rep.suspect.push_back(sus);
    rep.parities.push_back(classify_parity(to_grid_spinor(op, rep.eigenvectors[i])));
    if (!sus && !(rep.residuals(i) <= 1e-6))
      throw NumericalError("gap_eigs: eigenpair did not converge");
  }
  return rep;
}

SpectrumReport gap_eigs(const DiscreteOperator& op) {
  double lo = op.gap_lower;
  if (!op.spinor()) lo = gershgorin(op.matrix).first - 1;
  return window_eigs(op, lo, op.gap_upper);
}

HellmannFeynman hellmann_feynman(const ModelParams& P, const Grid& grid, double mu,
                                 Eigen::Index which, double fd_step) {
  DiscreteOperator op = assemble_Lmu(with_mu(P, mu), grid);
  SpectrumReport rep = gap_eigs(op);
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < rep.eigenvalues.size(); ++i)
    if (!rep.suspect[i]) idx.push_back(i);
  if (which < 0 || which >= static_cast<Eigen::Index>(idx.size()))
    throw DomainError("hellmann_feynman: eigenvalue index out of range");
  Eigen::Index i = idx[which];
  double lam = rep.eigenvalues(i);
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < rep.eigenvalues.size(); ++j)
    if (j != i) gap = std::min(gap, std::abs(rep.eigenvalues(j) - lam));
  gap = std::min({gap, op.gap_upper - lam, lam - op.gap_lower});
  if (gap < 1e-6) throw NumericalError("hellmann_feynman: eigenvalue not isolated");

  // The assembled matrix is affine in mu; its mu-derivative is -Q.
  DiscreteOperator q1 = assemble_Lmu(with_mu(P, 1.0), grid);
  DiscreteOperator q0 = assemble_Lmu(with_mu(P, 0.0), grid);
  SymTridiagonal dQ{q1.matrix.diag - q0.matrix.diag, q1.matrix.off - q0.matrix.off};
  const Eigen::VectorXd& v = rep.eigenvectors[i];
  double slope = v.dot(apply(dQ, v)) / v.squaredNorm();

  auto eig_near = [&](double m2) {
    DiscreteOperator o = assemble_Lmu(with_mu(P, m2), grid);
    double w = 0.5 * gap;
    Eigen::VectorXd e = eigenvalues_in(o.matrix, lam - w, lam + w);
    if (e.size() != 1) throw NumericalError("hellmann_feynman: lost eigenvalue");
    return e(0);
  };
  double fd = (eig_near(mu + fd_step) - eig_near(mu - fd_step)) / (2 * fd_step);
  HellmannFeynman r{lam, slope, fd, 0, false};
  r.relative_gap = std::abs(fd - slope) / std::max(std::abs(slope), 1e-300);
  r.agrees = r.relative_gap < 1e-4;
  return r;
}

}  // namespace diracgap
