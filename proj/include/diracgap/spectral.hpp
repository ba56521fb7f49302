#ifndef DIRACGAP_SPECTRAL_HPP
#define DIRACGAP_SPECTRAL_HPP

#include <string>
#include <vector>

#include <Eigen/Core>

#include "diracgap/discretization.hpp"

namespace diracgap {

/// Sampled two-component field. If `staggered`, c1 lives at x_i - h/4 and
/// c2 at x_i + h/4; otherwise both live on the nodes.
struct GridSpinor {
  Grid grid;
  Eigen::VectorXcd c1;
  Eigen::VectorXcd c2;
  bool staggered = false;
};

/// Eigenvector of a spinor operator as a field on its grid.
GridSpinor to_grid_spinor(const DiscreteOperator& op, const Eigen::VectorXd& v);

/// Samples a closed-form spinor at the positions used by `op`, in the
/// interleaved order of its matrix.
template <typename F>
Eigen::VectorXd sample_staggered(const Grid& g, F&& f) {
  Eigen::VectorXd v(2 * g.n);
  for (Eigen::Index i = 0; i < g.n; ++i) {
    v(2 * i) = f(upper_position(g, i))(0);
    v(2 * i + 1) = f(lower_position(g, i))(1);
  }
  return v;
}

enum class Parity { even, odd, mixed };

std::string to_string(Parity p);

struct ParityResiduals {
  double plus;   // c1 even, c2 odd
  double minus;  // c1 odd, c2 even
};

/// Relative reflection residuals, after interpolating a staggered field to
/// the symmetric nodes.
ParityResiduals parity_residuals(const GridSpinor& psi);

/// even (+): c1 even and c2 odd; odd (-): c1 odd and c2 even.
Parity classify_parity(const GridSpinor& psi, double tol = 1e-6);

struct SpectrumReport {
  Eigen::VectorXd eigenvalues;
  Eigen::VectorXd residuals;
  std::vector<Parity> parities;
  std::vector<bool> suspect;
  std::vector<Eigen::VectorXd> eigenvectors;
  double suspect_margin = 0;

  /// Eigenvalues not flagged as discretization-suspect.
  Eigen::VectorXd trusted() const;
};

/// Eigenpairs strictly inside the gap window. Eigenvalues closer than the
/// suspect margin to a threshold are flagged, not dropped.
SpectrumReport gap_eigs(const DiscreteOperator& op);

/// Eigenpairs of `op` inside an arbitrary open window.
SpectrumReport window_eigs(const DiscreteOperator& op, double lo, double hi);

struct HellmannFeynman {
  double eigenvalue;
  double slope;     // -<psi, Q psi>/||psi||^2
  double fd_slope;  // centered difference in mu
  double relative_gap;
  bool agrees;
};

/// d lambda / d mu for the `which`-th trusted gap eigenvalue of L_mu.
HellmannFeynman hellmann_feynman(const ModelParams& P, const Grid& grid, double mu,
                                 Eigen::Index which, double fd_step = 1e-4);

}  // namespace diracgap

#endif
