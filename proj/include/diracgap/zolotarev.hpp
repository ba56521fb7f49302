#ifndef DIRACGAP_ZOLOTAREV_HPP
#define DIRACGAP_ZOLOTAREV_HPP

#include <vector>

#include <Eigen/Core>

#include "diracgap/tridiagonal.hpp"

namespace diracgap {

/// Jacobi sn and cn of argument u for modulus k, given the complementary
/// modulus kc = sqrt(1 - k^2) (accurate when k is close to 1).
struct JacobiSnCn {
  double sn;
  double cn;
};
JacobiSnCn jacobi_sn_cn(double u, double kc);

/// Complete elliptic integral K(k) from the complementary modulus.
double elliptic_K_from_complement(double kc);

/// Best uniform rational approximation of sign(x) on [-1,-ell] U [ell,1]:
/// x * scale * (1 + sum_j residue_j / (x^2 + pole_j)).
class ZolotarevSign {
 public:
  explicit ZolotarevSign(double ell, double tol = 1e-14);

  double operator()(double x) const;
  double max_error() const { return max_error_; }
  int order() const { return static_cast<int>(poles_.size()); }
  const std::vector<double>& poles() const { return poles_; }
  const std::vector<double>& residues() const { return residues_; }
  double scale() const { return scale_; }

 private:
  void build(int r);
  double ell_;
  double scale_ = 1;
  double max_error_ = 1;
  std::vector<double> poles_, residues_;
};

/// LDL^T factorization of a symmetric positive definite pentadiagonal matrix.
class PentaCholesky {
 public:
  PentaCholesky() = default;
  PentaCholesky(const Eigen::VectorXd& d0, const Eigen::VectorXd& d1,
                const Eigen::VectorXd& d2);
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

 private:
  Eigen::VectorXd d_, l1_, l2_;
};

/// sign(T - shift) applied to vectors through a Zolotarev rational filter.
/// Requires the spectrum of T to avoid (shift - gap, shift + gap).
class SpectralSign {
 public:
  SpectralSign(const SymTridiagonal& T, double shift, double gap, double tol = 1e-14);
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  const ZolotarevSign& approximant() const { return zolo_; }

 private:
  SymTridiagonal X_;
  ZolotarevSign zolo_;
  std::vector<PentaCholesky> factors_;
};

}  // namespace diracgap

#endif
