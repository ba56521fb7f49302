#ifndef DIRACGAP_THRESHOLD_HPP
#define DIRACGAP_THRESHOLD_HPP

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "diracgap/discretization.hpp"
#include "diracgap/model.hpp"

namespace diracgap {

using Mat2c = Eigen::Matrix2cd;
using Vec2c = Eigen::Vector2cd;

/// 2x2 complex potential V(x) for D_m + V, D_m = i sigma_2 d/dx + m sigma_3.
class MatrixPotential {
 public:
  /// Soler linearization in the L-frame shifted by w:
  /// V = -(p+1) g(px) sigma_3 - mu Q.
  static MatrixPotential soler(const ModelParams& P);
  /// Closed-form potential negligible outside [-extent, extent].
  static MatrixPotential from_function(double m, std::function<Mat2c(double)> f,
                                       double extent, std::string label = "function");
  /// Uniformly spaced samples; cubic (4-point) interpolation between them,
  /// zero outside the sampled range.
  static MatrixPotential sampled(double m, Eigen::VectorXd x, std::vector<Mat2c> V);

  Mat2c operator()(double x) const { return f_(x); }
  double mass() const { return m_; }
  double extent() const { return extent_; }
  const std::string& label() const { return label_; }
  bool is_sampled() const { return xs_.size() > 0; }
  const Eigen::VectorXd& sample_positions() const { return xs_; }

  /// -sigma_1 V sigma_1: the potential whose +m problem mirrors the -m one.
  MatrixPotential sigma1_conjugate() const;

  /// Smallest X with int_{|x|>X} |V| < tol (Frobenius norm).
  double tail_cutoff(double tol = 1e-12) const;

 private:
  double m_ = 1;
  double extent_ = 0;
  std::string label_;
  std::function<Mat2c(double)> f_;
  Eigen::VectorXd xs_;
};

/// Reads x, Re V11, Im V11, Re V12, Im V12, Re V21, Im V21, Re V22, Im V22.
MatrixPotential load_potential_csv(const std::string& path, double m);

struct PauliCoefficients {
  Eigen::VectorXd x;
  Eigen::VectorXcd a0, a1, a2, a3;
  bool alpha2_real = true;
  double alpha2_max_imag = 0;
};

/// a_j = tr(V sigma_j)/2 at the given positions.
PauliCoefficients pauli_decompose(const MatrixPotential& V, const Eigen::VectorXd& x);

/// Pauli coefficients on a default sampling of the potential's support.
PauliCoefficients pauli_decompose(const MatrixPotential& V);

struct GaugeResult {
  MatrixPotential symmetric;
  std::function<double(double)> phase;  // theta(x) = int_0^x a2
};

/// Removes the sigma_2 part: D_m + V_sym = e^{-i theta} (D_m + V) e^{i theta}.
GaugeResult gauge_symmetrize(const MatrixPotential& V);

/// Real Pauli coefficients of a potential that passed the assumption check.
PauliField pauli_field(const MatrixPotential& V);

enum class ShootSide { left, right };

struct ShootingSolution {
  double lambda = 0;
  ShootSide side = ShootSide::right;
  double X = 0;
  double step = 0;
  Eigen::VectorXd x;
  Eigen::VectorXcd c1, c2;

  Vec2c at(Eigen::Index i) const { return Vec2c(c1(i), c2(i)); }
  Eigen::Index origin() const;
};

struct ShootOptions {
  double tolerance = 1e-10;  // step-halving acceptance, relative to sup norm
  double X = 0;              // 0: use the potential's tail cutoff
  double max_step = 0.02;
  bool secular = false;      // start on the growing branch instead
};

/// RK4 over the whole window [-X, X], starting at the `side` end with the
/// threshold data (1, 0) for lambda = +m or (0, 1) for lambda = -m.
ShootingSolution shoot_threshold(const MatrixPotential& V, ShootSide side, double lambda,
                                 const ShootOptions& opt = {});

/// Same integrator at an arbitrary energy and start vector.
ShootingSolution shoot(const MatrixPotential& V, ShootSide side, double lambda,
                       const Vec2c& start, double X, double step);

enum class ThresholdClass { none, resonance, eigenvalue };

std::string to_string(ThresholdClass c);

struct ThresholdReport {
  double lambda = 0;
  std::complex<double> l_minus, l_plus;
  double decay_exponent = 0;
  double decay_r2 = 0;
  ThresholdClass classification = ThresholdClass::none;
  double wronskian_drift = 0;
  bool matched = false;
  bool trivial = false;
  double match_determinant = 0;  // |det(left(0)|right(0))| / (|left(0)| |right(0)|)
  double X = 0;
  double step = 0;
  Eigen::VectorXd x;
  Eigen::VectorXcd c1, c2;       // matched global solution, sup-normalized
};

ThresholdReport classify_threshold(const ShootingSolution& left, const ShootingSolution& right,
                                   bool trivial_potential = false);

/// Shoots both sides at lambda and classifies.
ThresholdReport analyze_threshold(const MatrixPotential& V, double lambda,
                                  const ShootOptions& opt = {});

/// max |W(x) - W(0)| / max(1, |W(0)|), W = det(Phi | Xi), on the common grid.
double wronskian_check(const ShootingSolution& phi, const ShootingSolution& xi);

struct SimplicityResult {
  int dimension = 0;           // independent bounded solutions, 0 or 1
  bool trivial = false;
  double singular_ratio = 0;   // sigma_min / sigma_max of [left(0) right(0)]
  double secular_growth = 0;   // confirms each side's bounded space is 1-d
};

/// Requires a real a2; throws AssumptionViolation otherwise.
SimplicityResult simplicity_check(const MatrixPotential& V, double lambda,
                                  const ShootOptions& opt = {});

/// Strict sign changes between consecutive nonzero samples.
int count_sign_changes(const Eigen::VectorXd& f);

struct KneserResult {
  double sup_value;
  bool pass;
};

/// sup over R <= |x| <= R_max of x^2 q1(x), q1 = -(M^2 - lambda -/+ M'),
/// both signs.
KneserResult kneser_check(const ModelParams& P, double lambda, double R, double R_max = 0);

/// Same for a user-supplied q1.
KneserResult kneser_check(const std::function<double(double)>& q1, double R, double R_max,
                          int samples = 20000);

/// Sign changes of the bounded threshold solution of -y'' + (M^2 -/+ M') y
/// = m^2 y on the n-node grid of half-length L.
int schrodinger_threshold_zero_count(const ModelParams& P, SchrodingerSign sign, double L,
                                     Eigen::Index n);

}  // namespace diracgap

#endif
