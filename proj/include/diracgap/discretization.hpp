#ifndef DIRACGAP_DISCRETIZATION_HPP
#define DIRACGAP_DISCRETIZATION_HPP

#include <complex>
#include <functional>
#include <iosfwd>
#include <string>

#include <Eigen/Core>

#include "diracgap/model.hpp"
#include "diracgap/tridiagonal.hpp"

namespace diracgap {

struct Grid {
  double half_length = 0;
  Eigen::Index n = 0;
  double h = 0;
  Eigen::VectorXd nodes;
};

/// Uniform grid -L + i h, h = 2L/(n-1); n even, n >= 16.
Grid build_grid(double L, Eigen::Index n);

/// Staggered positions: the upper spinor component lives at x_i - h/4, the
/// lower one at x_i + h/4, so reflection maps one set onto the other.
inline double upper_position(const Grid& g, Eigen::Index i) {
  return g.nodes(i) - 0.25 * g.h;
}
inline double lower_position(const Grid& g, Eigen::Index i) {
  return g.nodes(i) + 0.25 * g.h;
}

enum class OperatorKind { A_p, L_mu, schrodinger_minus, schrodinger_plus, dirac_general };

std::string to_string(OperatorKind kind);

/// Real symmetric tridiagonal representation. Spinor kinds use the
/// interleaved order (upper_0, lower_0, upper_1, lower_1, ...).
struct DiscreteOperator {
  SymTridiagonal matrix;
  OperatorKind kind = OperatorKind::A_p;
  double gap_lower = 0;
  double gap_upper = 0;
  ModelParams params{};
  Grid grid;
  bool domain_warning = false;
  // Phases removed when a complex Hermitian matrix was reduced to real form;
  // empty when the assembled matrix was real.
  Eigen::VectorXd phases;

  bool spinor() const { return kind != OperatorKind::schrodinger_minus &&
                               kind != OperatorKind::schrodinger_plus; }
  /// Width of the band next to each threshold whose eigenvalues are
  /// flagged as discretization-suspect.
  double suspect_margin() const;
};

/// Half-length on which bound states have decayed by exp(-40): eigenfunctions
/// of A_p decay at rate kappa/p, those of L_mu (and its Schrodinger
/// partners) at rate kappa, while g(p x) decays at rate 2 p kappa.
double default_half_length(const ModelParams& P, OperatorKind kind);

/// A_p = i p sigma_2 d/dx + (m - (p+1) g(x)) sigma_3.
DiscreteOperator assemble_A(const ModelParams& P, const Grid& grid);

/// Free Dirac operator i sigma_2 d/dx + m sigma_3 (A_p with g = 0, p = 1).
DiscreteOperator assemble_free(const ModelParams& P, const Grid& grid);

/// L_mu = D_m - w - (v^2 - u^2)^p sigma_3 - mu Q.
DiscreteOperator assemble_Lmu(const ModelParams& P, const Grid& grid);

enum class SchrodingerSign { minus, plus };

/// -d^2/dx^2 + M^2 -/+ M' on the scalar grid.
DiscreteOperator assemble_schrodinger(const ModelParams& P, const Grid& grid,
                                      SchrodingerSign sign);

/// Pauli coefficients of a Hermitian potential (all real).
struct PauliField {
  std::function<double(double)> a0, a1, a2, a3;
};

/// D_m + V for V = a0 + a1 sigma_1 + a2 sigma_2 + a3 sigma_3. The sigma_2
/// part enters as link phases exp(i int a2), which keeps the scheme exactly
/// gauge covariant; the Hermitian result is reduced to real form.
DiscreteOperator assemble_dirac(double m, const PauliField& V, const Grid& grid);

/// (row, col, value) triplets of the full matrix, one per line.
void dump_triplets(const DiscreteOperator& op, std::ostream& out);

}  // namespace diracgap

#endif
