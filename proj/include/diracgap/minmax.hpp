#ifndef DIRACGAP_MINMAX_HPP
#define DIRACGAP_MINMAX_HPP

#include <memory>

#include <Eigen/Core>

#include "diracgap/discretization.hpp"
#include "diracgap/zolotarev.hpp"

namespace diracgap {

/// Orthonormal bases of the spectral subspaces of A_1 below and above the
/// split point (w + m)/2. Dense; meant for small grids.
struct ProjectorBases {
  Eigen::MatrixXd minus;
  Eigen::MatrixXd plus;
  Eigen::VectorXd minus_eigenvalues;
  Eigen::VectorXd plus_eigenvalues;
  double split = 0;
};

ProjectorBases minmax_projectors(const DiscreteOperator& A1);

/// Matrix-free Lambda_- of A_1 (spectral projector onto eigenvalues <= w).
class NegativeProjector {
 public:
  explicit NegativeProjector(const DiscreteOperator& A1, double tol = 1e-14);
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  double split() const { return split_; }
  double gap() const { return gap_; }
  int filter_order() const { return sign_->approximant().order(); }

 private:
  double split_ = 0;
  double gap_ = 0;
  std::unique_ptr<SpectralSign> sign_;
};

struct MinMaxReport {
  double epsilon = 0;
  double delta = 0;
  double alpha = 0;
  double gamma0 = 0;         // sup of the quotient of A_{1-eps} over F_-
  double gamma1_upper = 0;   // sup over span{Lambda_+ psi_delta} + F_-
  double drop = 0;           // m - gamma1_upper
  double lambda_lower_check = 0;  // ||Lambda_- psi_d|| / (d/(m+w) ||psi_d||)
  double domain_factor = 0;  // L * delta
  int newton_steps = 0;
  int inner_iterations = 0;
};

/// Grid for the trial-state computation: L = max(40/kappa, c/delta).
Grid minmax_grid(const ModelParams& P, double eps, double alpha, double h = 0.1,
                 double c = 6.0);

/// Matrix-free sup over span{Lambda_+ psi_delta} + F_- of the Rayleigh
/// quotient of A_{1-eps}, via the secular equation of the compression.
MinMaxReport gamma_bound(const DiscreteOperator& A1, double eps, double alpha);

/// Same quantity from an explicit dense compression; small grids only.
MinMaxReport gamma_bound_dense(const DiscreteOperator& A1, double eps, double alpha);

/// A_{1-eps} built as (1-eps) A_1 + eps W sigma_3 on the grid of A_1.
DiscreteOperator perturbed_operator(const DiscreteOperator& A1, double eps);

struct ThirdLevelCheck {
  double gamma0 = 0;    // lowest positive eigenvalue of A_{1-eps} (the ground level)
  double gamma1 = 0;
  double gamma2 = 0;
  double margin = 0;    // suspect margin 10 h^2 m^3
  bool pass = false;    // gamma2 >= m - margin
};

/// Third min-max level of A_{1-eps} above the negative branch. At fixed
/// resolution the continuum is discrete, so the bound is m minus the margin.
ThirdLevelCheck third_level_check(const DiscreteOperator& A1, double eps);

struct EnergyDropCheck {
  double lhs;      // <psi_d, A_{1-eps} psi_d>
  double rhs;      // m ||psi_d||^2 - eps d E_d ||psi_inf||_inf^2
  double drop;     // eps d E_d ||psi_inf||_inf^2
  double E_delta;
  double relative_gap;
};

/// Both sides of the first-term identity by independent quadratures.
EnergyDropCheck energy_drop_check(const ModelParams& P, double eps, double delta);

struct DropThreshold {
  bool sign_change_found = false;
  double eps_estimate = 0;     // where the drop changes sign, if found
  double eps_max_checked = 0;
  double analytic_bound = 0;   // (m - w)/(3m - w)
};

/// Scans eps below the smallness bound and bisects on the sign of the drop.
DropThreshold locate_drop_threshold(const ModelParams& P, double alpha,
                                    int samples = 6, double h = 0.2);

}  // namespace diracgap

#endif
