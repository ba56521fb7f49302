#include "diracgap/tridiagonal.hpp"

#include <cmath>
#include <limits>

#include "diracgap/errors.hpp"

namespace diracgap {

Eigen::VectorXd apply(const SymTridiagonal& T, const Eigen::VectorXd& x) {
  const Eigen::Index n = T.size();
  Eigen::VectorXd y = T.diag.cwiseProduct(x);
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    y(k) += T.off(k) * x(k + 1);
    y(k + 1) += T.off(k) * x(k);
  }
  return y;
}

Eigen::Index sturm_count(const SymTridiagonal& T, double sigma) {
  const Eigen::Index n = T.size();
  const double pivmin = std::numeric_limits<double>::min() * 1e10;
  Eigen::Index count = 0;
  double q = T.diag(0) - sigma;
  if (std::abs(q) < pivmin) q = -pivmin;
  if (q < 0) ++count;
  for (Eigen::Index k = 1; k < n; ++k) {
    double b = T.off(k - 1);
    q = (T.diag(k) - sigma) - b * b / q;
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0) ++count;
  }
  return count;
}

std::pair<double, double> gershgorin(const SymTridiagonal& T) {
  const Eigen::Index n = T.size();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Eigen::Index k = 0; k < n; ++k) {
    double r = (k > 0 ? std::abs(T.off(k - 1)) : 0.0) +
               (k + 1 < n ? std::abs(T.off(k)) : 0.0);
    lo = std::min(lo, T.diag(k) - r);
    hi = std::max(hi, T.diag(k) + r);
  }
  return {lo, hi};
}

namespace {

double bisect(const SymTridiagonal& T, Eigen::Index k, double lo, double hi) {
  const double eps = std::numeric_limits<double>::epsilon();
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (hi - lo <= 2 * eps * std::max(std::abs(lo), std::abs(hi)) + 1e-300 ||
        mid == lo || mid == hi)
      return mid;
    if (sturm_count(T, mid) > k)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double eigenvalue_by_index(const SymTridiagonal& T, Eigen::Index k) {
  if (k < 0 || k >= T.size())
    throw DomainError("eigenvalue_by_index: index out of range");
  auto [lo, hi] = gershgorin(T);
  double pad = 1e-12 * (std::abs(lo) + std::abs(hi)) + 1e-300;
  return bisect(T, k, lo - pad, hi + pad);
}

Eigen::VectorXd eigenvalues_in(const SymTridiagonal& T, double lo, double hi) {
  Eigen::Index k0 = sturm_count(T, lo);
  Eigen::Index k1 = sturm_count(T, hi);
  Eigen::VectorXd out(std::max<Eigen::Index>(k1 - k0, 0));
  for (Eigen::Index k = k0; k < k1; ++k) out(k - k0) = bisect(T, k, lo, hi);
  return out;
}

TridiagonalLU::TridiagonalLU(const SymTridiagonal& T, double sigma) {
  const Eigen::Index n = T.size();
  d_ = T.diag.array() - sigma;
  if (n > 1) {
    dl_ = T.off;
    du_ = T.off;
  } else {
    dl_.resize(0);
    du_.resize(0);
  }
  du2_ = Eigen::VectorXd::Zero(std::max<Eigen::Index>(n - 2, 0));
  swapped_.assign(std::max<Eigen::Index>(n - 1, 0), 0);
  const double tiny = std::numeric_limits<double>::epsilon() *
                      (T.diag.cwiseAbs().maxCoeff() +
                       (n > 1 ? T.off.cwiseAbs().maxCoeff() : 0.0) + 1.0);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (std::abs(d_(i)) >= std::abs(dl_(i))) {
      if (d_(i) == 0) d_(i) = tiny;
      double f = dl_(i) / d_(i);
      dl_(i) = f;
      d_(i + 1) -= f * du_(i);
    } else {
      swapped_[i] = 1;
      double f = d_(i) / dl_(i);
      d_(i) = dl_(i);
      dl_(i) = f;
      double t = du_(i);
      du_(i) = d_(i + 1);
      d_(i + 1) = t - f * d_(i + 1);
      if (i + 2 < n) {
        du2_(i) = du_(i + 1);
        du_(i + 1) = -f * du_(i + 1);
      }
    }
  }
  if (n > 0 && d_(n - 1) == 0) d_(n - 1) = tiny;
}

Eigen::VectorXd TridiagonalLU::solve(const Eigen::VectorXd& b) const {
  const Eigen::Index n = d_.size();
  Eigen::VectorXd x = b;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (swapped_[i]) {
      double t = x(i);
      x(i) = x(i + 1);
      x(i + 1) = t - dl_(i) * x(i);
    } else {
      x(i + 1) -= dl_(i) * x(i);
    }
  }
  x(n - 1) /= d_(n - 1);
  if (n > 1) x(n - 2) = (x(n - 2) - du_(n - 2) * x(n - 1)) / d_(n - 2);
  for (Eigen::Index i = n - 3; i >= 0; --i)
    x(i) = (x(i) - du_(i) * x(i + 1) - du2_(i) * x(i + 2)) / d_(i);
  return x;
}

double TridiagonalLU::min_pivot() const { return d_.cwiseAbs().minCoeff(); }

Eigen::VectorXd inverse_iteration(const SymTridiagonal& T, double lambda,
                                  const std::vector<Eigen::VectorXd>& against) {
  const Eigen::Index n = T.size();
  TridiagonalLU lu(T, lambda);
  Eigen::VectorXd v(n);
  // Deterministic start vector with no special symmetry.
  for (Eigen::Index i = 0; i < n; ++i)
    v(i) = 1.0 + 0.5 * std::sin(0.7 * static_cast<double>(i) + 0.3);
  v.normalize();
  for (int it = 0; it < 4; ++it) {
    for (const auto& w : against) v -= w.dot(v) * w;
    v = lu.solve(v);
    for (const auto& w : against) v -= w.dot(v) * w;
    double nv = v.norm();
    if (!std::isfinite(nv) || nv == 0)
      throw NumericalError("inverse_iteration: breakdown");
    v /= nv;
  }
  return v;
}

double residual(const SymTridiagonal& T, double lambda, const Eigen::VectorXd& v) {
  return (apply(T, v) - lambda * v).norm() / v.norm();
}

Eigen::MatrixXd to_dense(const SymTridiagonal& T) {
  const Eigen::Index n = T.size();
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  D.diagonal() = T.diag;
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    D(k, k + 1) = T.off(k);
    D(k + 1, k) = T.off(k);
  }
  return D;
}

}  // namespace diracgap
