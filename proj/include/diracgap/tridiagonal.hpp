#ifndef DIRACGAP_TRIDIAGONAL_HPP
#define DIRACGAP_TRIDIAGONAL_HPP

#include <vector>

#include <Eigen/Core>

namespace diracgap {

/// Real symmetric tridiagonal matrix: diag(0..N-1), off(k) couples k, k+1.
struct SymTridiagonal {
  Eigen::VectorXd diag;
  Eigen::VectorXd off;

  Eigen::Index size() const { return diag.size(); }
};

/// y = T x.
Eigen::VectorXd apply(const SymTridiagonal& T, const Eigen::VectorXd& x);

/// Number of eigenvalues strictly below sigma.
Eigen::Index sturm_count(const SymTridiagonal& T, double sigma);

/// Interval containing the whole spectrum.
std::pair<double, double> gershgorin(const SymTridiagonal& T);

/// The k-th smallest eigenvalue (0-based) by bisection.
double eigenvalue_by_index(const SymTridiagonal& T, Eigen::Index k);

/// All eigenvalues in the open interval (lo, hi), ascending.
Eigen::VectorXd eigenvalues_in(const SymTridiagonal& T, double lo, double hi);

/// Unit eigenvector for a (converged) eigenvalue by inverse iteration,
/// orthogonalized against `against`.
Eigen::VectorXd inverse_iteration(const SymTridiagonal& T, double lambda,
                                  const std::vector<Eigen::VectorXd>& against = {});

/// ||T v - lambda v|| / ||v||.
double residual(const SymTridiagonal& T, double lambda, const Eigen::VectorXd& v);

/// Dense matrix, for small problems and tests.
Eigen::MatrixXd to_dense(const SymTridiagonal& T);

/// LU factorization with partial pivoting of T - sigma I.
class TridiagonalLU {
 public:
  TridiagonalLU() = default;
  TridiagonalLU(const SymTridiagonal& T, double sigma);
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  double min_pivot() const;

 private:
  Eigen::VectorXd dl_, d_, du_, du2_;
  std::vector<char> swapped_;
};

}  // namespace diracgap

#endif
