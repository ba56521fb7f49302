#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "diracgap/closed_forms.hpp"
#include "diracgap/errors.hpp"
#include "diracgap/threshold.hpp"

using namespace diracgap;

namespace {

const std::complex<double> I(0.0, 1.0);

MatrixPotential zero_potential(double m) {
  return MatrixPotential::from_function(m, [](double) { return Mat2c(Mat2c::Zero()); }, 10.0,
                                        "zero");
}

// L-inf distance between two sup-normalized fields after the best complex scaling.
double proportional_deviation(const Eigen::VectorXcd& a1, const Eigen::VectorXcd& a2,
                              const Eigen::VectorXcd& b1, const Eigen::VectorXcd& b2) {
  std::complex<double> num = b1.dot(a1) + b2.dot(a2);
  double den = b1.squaredNorm() + b2.squaredNorm();
  std::complex<double> c = num / den;
  double sup = std::max(a1.cwiseAbs().maxCoeff(), a2.cwiseAbs().maxCoeff());
  double d = std::max((a1 - c * b1).cwiseAbs().maxCoeff(), (a2 - c * b2).cwiseAbs().maxCoeff());
  return d / sup;
}

}  // namespace

TEST_CASE("free problem: no resonance, no eigenvalue") {
  MatrixPotential V = zero_potential(1.0);
  for (double lam : {1.0, -1.0}) {
    ThresholdReport r = analyze_threshold(V, lam);
    CHECK(r.trivial);
    CHECK(r.classification == ThresholdClass::none);
    CHECK(std::abs(r.l_minus) == doctest::Approx(1.0));
    CHECK(std::abs(r.l_plus) == doctest::Approx(1.0));
    SimplicityResult s = simplicity_check(V, lam);
    CHECK(s.trivial);
    CHECK(s.dimension == 0);
  }
}

TEST_CASE("p = 1: resonance at both thresholds, proportional to psi_inf") {
  for (double w : {0.3, 0.5, 0.8}) {
    ModelParams P = make_params(1.0, w, 1.0);
    MatrixPotential V = MatrixPotential::soler(P);
    ThresholdReport r = analyze_threshold(V, P.m);
    CHECK(r.matched);
    CHECK(r.classification == ThresholdClass::resonance);
    CHECK(r.wronskian_drift < 1e-8);
    Eigen::VectorXcd p1(r.x.size()), p2(r.x.size());
    for (Eigen::Index i = 0; i < r.x.size(); ++i) {
      Spinor<double> f = resonance_state(P, r.x(i));
      p1(i) = f(0);
      p2(i) = f(1);
    }
    CHECK(proportional_deviation(r.c1, r.c2, p1, p2) < 1e-5);
    // The plateau is odd: l_- = -l_+.
    CHECK(std::abs(r.l_minus + r.l_plus) < 1e-8);
    // The decaying component follows sech^2: rate 2 kappa.
    CHECK(r.decay_exponent == doctest::Approx(2 * P.kappa).epsilon(1e-3));
    CHECK(r.decay_r2 > 0.999);
    CHECK(analyze_threshold(V, -P.m).classification == ThresholdClass::resonance);
    CHECK(simplicity_check(V, P.m).dimension == 1);
  }
}

TEST_CASE("sigma_1 conjugation maps the -m problem onto the +m problem") {
  ModelParams P = make_params(1.0, 0.5, 1.7, 0.4);
  MatrixPotential V = MatrixPotential::soler(P);
  MatrixPotential C = V.sigma1_conjugate();
  ShootOptions opt;
  opt.X = V.tail_cutoff();
  ShootingSolution a = shoot_threshold(V, ShootSide::left, -P.m, opt);
  ShootingSolution b = shoot(C, ShootSide::left, P.m, Vec2c(1, 0), opt.X, a.step);
  double sup = std::max(a.c1.cwiseAbs().maxCoeff(), a.c2.cwiseAbs().maxCoeff());
  CHECK(std::max((a.c1 - b.c2).cwiseAbs().maxCoeff(), (a.c2 - b.c1).cwiseAbs().maxCoeff()) <=
        1e-12 * sup);
  ThresholdReport ra = analyze_threshold(V, -P.m), rb = analyze_threshold(C, P.m);
  CHECK(ra.classification == rb.classification);
  CHECK(std::abs(ra.l_plus) == doctest::Approx(std::abs(rb.l_plus)).epsilon(1e-8));
}

TEST_CASE("lattice: no threshold eigenvalues, simplicity, Wronskian") {
  for (double p : {0.5, 0.8, 1.0, 1.5, 2.0, 3.0})
    for (double w : {0.2, 0.5, 0.8}) {
      ModelParams P = make_params(1.0, w, p);
      MatrixPotential V = MatrixPotential::soler(P);
      for (double lam : {P.m, -P.m}) {
        ThresholdReport r = analyze_threshold(V, lam);
        CHECK(r.classification != ThresholdClass::eigenvalue);
        CHECK(r.wronskian_drift < 1e-8);
        CHECK(simplicity_check(V, lam).dimension <= 1);
        if (p == 1.0) CHECK(r.classification == ThresholdClass::resonance);
      }
    }
}

TEST_CASE("classification of hand-built solutions") {
  // Decaying on both sides and matched: eigenvalue.
  const Eigen::Index N = 401;
  ShootingSolution L, R;
  for (ShootingSolution* s : {&L, &R}) {
    s->lambda = 1;
    s->X = 10;
    s->step = 0.05;
    s->x = Eigen::VectorXd::LinSpaced(N, -10, 10);
    s->c1.resize(N);
    s->c2.resize(N);
  }
  L.side = ShootSide::left;
  for (Eigen::Index i = 0; i < N; ++i) {
    double x = L.x(i);
    L.c1(i) = std::exp(-x * x);
    L.c2(i) = 0.5 * std::exp(-std::abs(x));
    R.c1(i) = 2.0 * L.c1(i);
    R.c2(i) = 2.0 * L.c2(i);
  }
  ThresholdReport r = classify_threshold(L, R);
  CHECK(r.matched);
  CHECK(r.classification == ThresholdClass::eigenvalue);
  CHECK(r.decay_exponent == doctest::Approx(1.0).epsilon(1e-6));
  // Bounded plateau: resonance.
  for (Eigen::Index i = 0; i < N; ++i) {
    L.c1(i) = std::tanh(L.x(i));
    R.c1(i) = 2.0 * L.c1(i);
  }
  CHECK(classify_threshold(L, R).classification == ThresholdClass::resonance);
  // Not matched: none.
  for (Eigen::Index i = 0; i < N; ++i) R.c2(i) = -R.c2(i) + 1.0;
  CHECK(classify_threshold(L, R).classification == ThresholdClass::none);
}

TEST_CASE("Pauli decomposition, assumption check and gauge symmetrization") {
  auto f = [](double x) {
    double a0 = 0.1 / std::cosh(x), a1 = 0.2 * std::exp(-x * x), a2 = 0.3 / std::cosh(2 * x),
           a3 = -0.6 / std::cosh(x);
    Mat2c v;
    v << a0 + a3, a1 - I * a2, a1 + I * a2, a0 - a3;
    return v;
  };
  MatrixPotential V = MatrixPotential::from_function(1.0, f, 40.0);
  PauliCoefficients c = pauli_decompose(V, Eigen::VectorXd::LinSpaced(5, -1, 1));
  CHECK(c.alpha2_real);
  CHECK(c.a2(2).real() == doctest::Approx(0.3));
  CHECK(c.a1(2).real() == doctest::Approx(0.2));
  CHECK(c.a3(2).real() == doctest::Approx(-0.6));
  GaugeResult g = gauge_symmetrize(V);
  PauliCoefficients s = pauli_decompose(g.symmetric);
  CHECK(s.a2.cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(g.phase(0.0) == 0.0);
  // int_0^x 0.3 sech(2t) dt = 0.15 gd(2x) = 0.3 atan(tanh x).
  double x = 1.3;
  CHECK(g.phase(x) == doctest::Approx(0.15 * 2 * std::atan(std::tanh(x))).epsilon(1e-10));
  // Gauge invariance of the classification and of |l+-|.
  for (double lam : {1.0, -1.0}) {
    ThresholdReport a = analyze_threshold(V, lam), b = analyze_threshold(g.symmetric, lam);
    CHECK(a.classification == b.classification);
    CHECK(std::abs(a.l_plus) == doctest::Approx(std::abs(b.l_plus)).epsilon(1e-6));
    CHECK(std::abs(a.match_determinant - b.match_determinant) <= 1e-6);
  }
  // Non-real a2 violates the assumption.
  auto h = [&](double x) {
    Mat2c v = f(x);
    v(0, 1) += 0.2 * std::exp(-x * x);
    return v;
  };
  MatrixPotential bad = MatrixPotential::from_function(1.0, h, 40.0);
  CHECK_FALSE(pauli_decompose(bad).alpha2_real);
  CHECK_THROWS_AS(simplicity_check(bad, 1.0), AssumptionViolation);
  CHECK_THROWS_AS(gauge_symmetrize(bad), AssumptionViolation);
}

TEST_CASE("sampled potentials reproduce the closed-form analysis") {
  ModelParams P = make_params(1.0, 0.5, 1.0);
  MatrixPotential V = MatrixPotential::soler(P);
  const std::string path = "soler_samples_test.csv";
  {
    std::ofstream out(path);
    out << "x,re11,im11,re12,im12,re21,im21,re22,im22\n";
    char buf[512];
    for (int i = 0; i <= 4000; ++i) {
      double x = -20 + 0.01 * i;
      Mat2c v = V(x);
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", x,
                    v(0, 0).real(), v(0, 0).imag(), v(0, 1).real(), v(0, 1).imag(),
                    v(1, 0).real(), v(1, 0).imag(), v(1, 1).real(), v(1, 1).imag());
      out << buf;
    }
  }
  MatrixPotential S = load_potential_csv(path, P.m);
  CHECK(S.is_sampled());
  CHECK(S.extent() == doctest::Approx(20));
  CHECK(std::abs(S(0.123)(0, 0) - V(0.123)(0, 0)) < 1e-8);
  CHECK(S(25.0).norm() == 0.0);
  ThresholdReport a = analyze_threshold(V, P.m), b = analyze_threshold(S, P.m);
  CHECK(b.classification == ThresholdClass::resonance);
  CHECK(std::abs(b.l_plus) == doctest::Approx(std::abs(a.l_plus)).epsilon(1e-6));
  {
    std::ofstream out(path);
    out << "0,0,0,0,0,0,0,0,0\n0.1,0,0,0,0,0,0,0,0\n0.25,0,0,0,0,0,0,0,0\n0.3,0,0,0,0,0,0,0,0\n";
  }
  CHECK_THROWS_AS(load_potential_csv(path, 1.0), DomainError);
  {
    std::ofstream out(path);
    out << "0,0,0\n";
  }
  CHECK_THROWS_AS(load_potential_csv(path, 1.0), DomainError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_potential_csv("does_not_exist.csv", 1.0), DomainError);
}

TEST_CASE("tail cutoff grows as the tolerance shrinks") {
  MatrixPotential V = MatrixPotential::soler(make_params(1.0, 0.5, 1.0));
  double a = V.tail_cutoff(1e-6), b = V.tail_cutoff(1e-12);
  CHECK(a < b);
  CHECK(b < 20);
}

TEST_CASE("shooting rejects non-threshold energies") {
  MatrixPotential V = zero_potential(1.0);
  CHECK_THROWS_AS(shoot_threshold(V, ShootSide::left, 0.5), DomainError);
}

TEST_CASE("sign changes") {
  Eigen::VectorXd f(7);
  f << 1, 0, -1, -2, 0, 0, 3;
  CHECK(count_sign_changes(f) == 2);
  CHECK(count_sign_changes(Eigen::VectorXd::Ones(4)) == 0);
}

TEST_CASE("Kneser criterion on the lattice and on a counterexample") {
  for (double p : {0.5, 0.8, 1.0, 1.5, 2.0, 3.0})
    for (double w : {0.2, 0.5, 0.8}) {
      ModelParams P = make_params(1.0, w, p);
      KneserResult k = kneser_check(P, P.m * P.m, 30.0);
      CHECK(k.pass);
      CHECK(k.sup_value < 0.25);
    }
  KneserResult bad = kneser_check([](double x) { return 1 / (x * x); }, 1.0, 100.0);
  CHECK_FALSE(bad.pass);
  CHECK(bad.sup_value == doctest::Approx(1.0));
}

TEST_CASE("Schrodinger threshold zero counts are stable under refinement") {
  for (double p : {0.8, 1.0, 2.0}) {
    ModelParams P = make_params(1.0, 0.5, p);
    double L = 60 / (std::min(1.0, p) * P.kappa);
    for (SchrodingerSign s : {SchrodingerSign::minus, SchrodingerSign::plus}) {
      int a = schrodinger_threshold_zero_count(P, s, L, 4000);
      int b = schrodinger_threshold_zero_count(P, s, L, 8000);
      CHECK(a == b);
      CHECK(a <= 3);
    }
  }
}
