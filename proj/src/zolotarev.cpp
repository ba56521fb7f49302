#include "diracgap/zolotarev.hpp"

#include <cmath>
#include <numbers>

#include "diracgap/errors.hpp"

namespace diracgap {

namespace {

struct Agm {
  std::vector<double> a, c;
};

// Arithmetic-geometric mean of (1, kc), keeping the a_n and c_n sequences.
Agm agm(double kc) {
  Agm r;
  double a = 1, b = kc;
  r.a.push_back(a);
  r.c.push_back(std::sqrt((1 - kc) * (1 + kc)));
  for (int i = 0; i < 60; ++i) {
    double an = 0.5 * (a + b);
    double cn = 0.5 * (a - b);
    b = std::sqrt(a * b);
    a = an;
    r.a.push_back(a);
    r.c.push_back(cn);
    if (std::abs(cn) <= 1e-17 * a) break;
  }
  return r;
}

}  // namespace

double elliptic_K_from_complement(double kc) {
  Agm r = agm(kc);
  return std::numbers::pi / (2 * r.a.back());
}

JacobiSnCn jacobi_sn_cn(double u, double kc) {
  Agm r = agm(kc);
  const std::size_t N = r.a.size() - 1;
  double phi = std::ldexp(r.a[N] * u, static_cast<int>(N));
  for (std::size_t n = N; n >= 1; --n)
    phi = 0.5 * (phi + std::asin(r.c[n] * std::sin(phi) / r.a[n]));
  return {std::sin(phi), std::cos(phi)};
}

ZolotarevSign::ZolotarevSign(double ell, double tol) : ell_(ell) {
  if (!(ell > 0 && ell < 1)) throw DomainError("ZolotarevSign: need 0 < ell < 1");
  for (int r = 1; r <= 60; ++r) {
    build(r);
    if (max_error_ < tol) return;
  }
  throw NumericalError("ZolotarevSign: tolerance not reached");
}

void ZolotarevSign::build(int r) {
  const double kc = ell_;  // modulus ell' = sqrt(1 - ell^2)
  const double K = elliptic_K_from_complement(kc);
  std::vector<double> c(2 * r + 1);
  for (int i = 1; i <= 2 * r; ++i) {
    if (2 * i <= 2 * r + 1) {
      JacobiSnCn j = jacobi_sn_cn(i * K / (2 * r + 1), kc);
      c[i] = ell_ * ell_ * (j.sn * j.sn) / (j.cn * j.cn);
    } else {
      // cn is tiny near K; reflect: sn(K - v) = cd(v), cn(K - v) = ell sd(v).
      JacobiSnCn j = jacobi_sn_cn((2 * r + 1 - i) * K / (2 * r + 1), kc);
      c[i] = (j.cn * j.cn) / (j.sn * j.sn);
    }
  }
  poles_.assign(r, 0);
  residues_.assign(r, 0);
  for (int j = 1; j <= r; ++j) {
    double pole = c[2 * j - 1];
    double num = 1, den = 1;
    for (int k = 1; k <= r; ++k) {
      num *= c[2 * k] - pole;
      if (k != j) den *= c[2 * k - 1] - pole;
    }
    poles_[j - 1] = pole;
    residues_[j - 1] = num / den;
  }
  // Fix the scale by equioscillation, then measure the error.
  scale_ = 1;
  const int samples = 6000;
  double lo = 1e300, hi = -1e300;
  std::vector<double> vals(samples + 1);
  for (int s = 0; s <= samples; ++s) {
    double x = std::exp(std::log(ell_) * (1.0 - static_cast<double>(s) / samples));
    vals[s] = (*this)(x);
    lo = std::min(lo, vals[s]);
    hi = std::max(hi, vals[s]);
  }
  scale_ = 2 / (lo + hi);
  max_error_ = 0;
  for (double v : vals) max_error_ = std::max(max_error_, std::abs(1 - scale_ * v));
}

double ZolotarevSign::operator()(double x) const {
  double x2 = x * x;
  double s = 1;
  for (std::size_t j = 0; j < poles_.size(); ++j) s += residues_[j] / (x2 + poles_[j]);
  return scale_ * x * s;
}

PentaCholesky::PentaCholesky(const Eigen::VectorXd& d0, const Eigen::VectorXd& d1,
                             const Eigen::VectorXd& d2) {
  const Eigen::Index n = d0.size();
  d_.resize(n);
  l1_ = Eigen::VectorXd::Zero(n);  // l1_(i) = L(i, i-1)
  l2_ = Eigen::VectorXd::Zero(n);  // l2_(i) = L(i, i-2)
  for (Eigen::Index i = 0; i < n; ++i) {
    double d = d0(i);
    if (i >= 1) d -= l1_(i) * l1_(i) * d_(i - 1);
    if (i >= 2) d -= l2_(i) * l2_(i) * d_(i - 2);
    if (!(d > 0)) throw NumericalError("PentaCholesky: matrix not positive definite");
    d_(i) = d;
    if (i + 1 < n) {
      double a = d1(i);
      if (i >= 1) a -= l2_(i + 1) * l1_(i) * d_(i - 1);
      l1_(i + 1) = a / d;
    }
    if (i + 2 < n) l2_(i + 2) = d2(i) / d;
  }
}

Eigen::VectorXd PentaCholesky::solve(const Eigen::VectorXd& b) const {
  const Eigen::Index n = d_.size();
  Eigen::VectorXd x = b;
  for (Eigen::Index i = 1; i < n; ++i) {
    x(i) -= l1_(i) * x(i - 1);
    if (i >= 2) x(i) -= l2_(i) * x(i - 2);
  }
  x.array() /= d_.array();
  for (Eigen::Index i = n - 2; i >= 0; --i) {
    x(i) -= l1_(i + 1) * x(i + 1);
    if (i + 2 < n) x(i) -= l2_(i + 2) * x(i + 2);
  }
  return x;
}

namespace {

double spectral_radius_about(const SymTridiagonal& T, double shift) {
  auto [lo, hi] = gershgorin(T);
  return std::max(std::abs(hi - shift), std::abs(lo - shift)) * (1 + 1e-12);
}

double relative_gap(const SymTridiagonal& T, double shift, double gap) {
  double radius = spectral_radius_about(T, shift);
  if (!(gap > 0 && gap < radius)) throw DomainError("SpectralSign: invalid gap");
  return gap / radius;
}

}  // namespace

SpectralSign::SpectralSign(const SymTridiagonal& T, double shift, double gap, double tol)
    : zolo_(relative_gap(T, shift, gap), tol) {
  double radius = spectral_radius_about(T, shift);
  X_.diag = (T.diag.array() - shift) / radius;
  X_.off = T.off / radius;
  const Eigen::Index n = X_.size();
  Eigen::VectorXd a = X_.diag, b = X_.off;
  Eigen::VectorXd d0(n), d1 = Eigen::VectorXd::Zero(std::max<Eigen::Index>(n - 1, 0)),
      d2 = Eigen::VectorXd::Zero(std::max<Eigen::Index>(n - 2, 0));
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = a(i) * a(i);
    if (i >= 1) s += b(i - 1) * b(i - 1);
    if (i + 1 < n) s += b(i) * b(i);
    d0(i) = s;
    if (i + 1 < n) d1(i) = b(i) * (a(i) + a(i + 1));
    if (i + 2 < n) d2(i) = b(i) * b(i + 1);
  }
  for (std::size_t j = 0; j < zolo_.poles().size(); ++j)
    factors_.emplace_back((d0.array() + zolo_.poles()[j]).matrix(), d1, d2);
}

Eigen::VectorXd SpectralSign::apply(const Eigen::VectorXd& v) const {
  Eigen::VectorXd w = v;
  for (std::size_t j = 0; j < factors_.size(); ++j)
    w += zolo_.residues()[j] * factors_[j].solve(v);
  return zolo_.scale() * diracgap::apply(X_, w);
}

}  // namespace diracgap
