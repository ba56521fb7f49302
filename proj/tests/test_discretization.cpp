#include <doctest.h>

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "diracgap/closed_forms.hpp"
#include "diracgap/discretization.hpp"
#include "diracgap/spectral.hpp"
#include "diracgap/tridiagonal.hpp"

using namespace diracgap;

namespace {

Eigen::VectorXd all_eigenvalues(const SymTridiagonal& T) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(T.diag, T.off, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

// c i sigma_2 psi' + diag applied to a closed-form spinor, in interleaved order.
template <typename F, typename Fp, typename D>
Eigen::VectorXd continuum_apply(const Grid& g, double c, F&& f, Fp&& fp, D&& mass) {
  Eigen::VectorXd out(2 * g.n);
  for (Eigen::Index i = 0; i < g.n; ++i) {
    double xu = upper_position(g, i), xl = lower_position(g, i);
    out(2 * i) = c * fp(xu)(1) + mass(xu) * f(xu)(0);
    out(2 * i + 1) = -c * fp(xl)(0) - mass(xl) * f(xl)(1);
  }
  return out;
}

}  // namespace

TEST_CASE("grid construction") {
  CHECK_THROWS_AS(build_grid(10, 15), DomainError);
  CHECK_THROWS_AS(build_grid(10, 8), DomainError);
  CHECK_THROWS_AS(build_grid(-1, 64), DomainError);
  Grid g = build_grid(7.3, 64);
  CHECK(g.h == doctest::Approx(2 * 7.3 / 63));
  for (Eigen::Index i = 0; i < g.n; ++i) {
    CHECK(g.nodes(i) + g.nodes(g.n - 1 - i) == 0.0);
    // Reflection maps the upper sites onto the lower ones.
    CHECK(upper_position(g, i) + lower_position(g, g.n - 1 - i) == doctest::Approx(0).epsilon(1e-14));
  }
}

TEST_CASE("A_p = (p/q) A_q - ((p-q)/q) W sigma_3 holds entrywise") {
  ModelParams P = make_params(1.0, 0.5);
  Grid g = build_grid(40 / P.kappa, 512);
  for (auto [p, q] : {std::pair{1.5, 1.0}, std::pair{0.8, 1.0}, std::pair{3.0, 2.0}}) {
    DiscreteOperator Ap = assemble_A(with_p(P, p), g);
    DiscreteOperator Aq = assemble_A(with_p(P, q), g);
    for (Eigen::Index i = 0; i < g.n; ++i) {
      double Wu = potential_W(P, upper_position(g, i));
      double Wl = potential_W(P, lower_position(g, i));
      CHECK(std::abs(Ap.matrix.diag(2 * i) - (p / q * Aq.matrix.diag(2 * i) - (p - q) / q * Wu)) <= 1e-13);
      CHECK(std::abs(Ap.matrix.diag(2 * i + 1) -
                     (p / q * Aq.matrix.diag(2 * i + 1) + (p - q) / q * Wl)) <= 1e-13);
    }
    for (Eigen::Index k = 0; k < Ap.matrix.off.size(); ++k)
      CHECK(std::abs(Ap.matrix.off(k) - p / q * Aq.matrix.off(k)) <= 1e-13 * std::abs(Ap.matrix.off(k)));
  }
}

TEST_CASE("spectrum of the staggered operator is exactly symmetric") {
  for (double p : {0.8, 1.0, 2.0}) {
    ModelParams P = make_params(1.0, 0.5, p);
    DiscreteOperator op = assemble_A(P, build_grid(30, 400));
    Eigen::VectorXd e = all_eigenvalues(op.matrix);
    const Eigen::Index N = e.size();
    for (Eigen::Index i = 0; i < N; ++i) CHECK(std::abs(e(i) + e(N - 1 - i)) <= 1e-11);
  }
}

TEST_CASE("consistency: matrix action converges at second order") {
  // A_1 psi_inf = m psi_inf in the continuum.
  ModelParams P = make_params(1.0, 0.5);
  auto psi = [&](double x) { return resonance_state(P, x); };
  auto dpsi = [&](double x) { return resonance_state_prime(P, x); };
  auto mass = [&](double x) { return P.m - 2 * g_profile(P, x); };
  double errs[2];
  int k = 0;
  for (Eigen::Index n : {1024, 2048}) {
    Grid g = build_grid(10, n);
    DiscreteOperator op = assemble_A(P, g);
    Eigen::VectorXd v = sample_staggered(g, psi);
    Eigen::VectorXd r = apply(op.matrix, v) - continuum_apply(g, 1.0, psi, dpsi, mass);
    // Skip the two boundary rows, which see the truncation.
    errs[k++] = r.segment(2, r.size() - 4).cwiseAbs().maxCoeff();
  }
  double order = std::log2(errs[0] / errs[1]);
  CHECK(order == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("no fermion doubling: free branch counts") {
  // Positive free eigenvalues in (m, E): the continuum has (2L/pi) sqrt(E^2 - m^2)
  // of them; a doubled scheme would show twice as many.
  ModelParams P = make_params(1.0, 0.5);
  double L = 40;
  Grid g = build_grid(L, 1600);
  DiscreteOperator op = assemble_free(P, g);
  for (double E : {1.2, 2.0, 4.0}) {
    double expected = 2 * L / M_PI * std::sqrt(E * E - 1);
    double got = static_cast<double>(sturm_count(op.matrix, E) - sturm_count(op.matrix, 1.0));
    CHECK(std::abs(got - expected) <= 0.02 * expected + 2);
  }
  CHECK(sturm_count(op.matrix, 1.0 - 1e-9) - sturm_count(op.matrix, -1.0 + 1e-9) == 0);
}

TEST_CASE("L_0 is A_p in scaled coordinates shifted by -w") {
  // Same spectrum up to O(h^2): the two grids differ by the scaling x -> p x.
  for (double p : {0.8, 2.0}) {
    ModelParams P = make_params(1.0, 0.5, p);
    double La = 40 / P.kappa;
    DiscreteOperator A = assemble_A(P, build_grid(La, 4096));
    DiscreteOperator Lz = assemble_Lmu(P, build_grid(La / p, 4096));
    Eigen::VectorXd a = eigenvalues_in(A.matrix, -0.99, 0.99);
    Eigen::VectorXd l = eigenvalues_in(Lz.matrix, -0.99 - P.omega, 0.99 - P.omega);
    REQUIRE(a.size() == l.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
      CHECK(std::abs((l(i) + P.omega) / p - a(i) / p) <= 1e-4);
  }
}

TEST_CASE("Schrodinger partners have the squared Dirac gap spectrum") {
  ModelParams P = make_params(1.0, 0.5, 1.0);
  Grid gd = build_grid(40 / P.kappa, 4096);
  DiscreteOperator D = assemble_Lmu(P, gd);
  Eigen::VectorXd d = eigenvalues_in(D.matrix, -P.m - P.omega + 0.01, P.m - P.omega - 0.01);
  Grid gs = build_grid(40 / P.kappa, 8192);
  for (SchrodingerSign s : {SchrodingerSign::minus, SchrodingerSign::plus}) {
    DiscreteOperator S = assemble_schrodinger(P, gs, s);
    CHECK(S.spinor() == false);
    Eigen::VectorXd e = eigenvalues_in(S.matrix, S.gap_lower - 1, 0.98 * P.m * P.m);
    // Each squared Dirac eigenvalue appears in exactly one partner (w^2), or
    // in both partners.
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      bool found = false;
      for (Eigen::Index j = 0; j < d.size(); ++j) {
        double lam = d(j) + P.omega;
        if (std::abs(lam * lam - e(i)) < 1e-4) found = true;
      }
      CHECK(found);
    }
  }
}

TEST_CASE("L_mu with mu = 0 equals the general Dirac assembly with V = -G sigma_3 - w") {
  ModelParams P = make_params(1.0, 0.5, 1.3);
  Grid g = build_grid(20, 256);
  PauliField V;
  V.a0 = [&](double) { return -P.omega; };
  V.a1 = [](double) { return 0.0; };
  V.a2 = [](double) { return 0.0; };
  V.a3 = [&](double x) { return -(P.p + 1) * g_profile(P, P.p * x); };
  DiscreteOperator A = assemble_dirac(P.m, V, g);
  DiscreteOperator L = assemble_Lmu(P, g);
  CHECK((A.matrix.diag - L.matrix.diag).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK((A.matrix.off - L.matrix.off).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("a sigma_2 term is a pure gauge on the lattice") {
  ModelParams P = make_params(1.0, 0.5);
  Grid g = build_grid(15, 300);
  PauliField V;
  V.a0 = [](double x) { return 0.3 * std::exp(-x * x); };
  V.a1 = [](double x) { return 0.2 / std::cosh(x); };
  V.a2 = [](double) { return 0.0; };
  V.a3 = [](double x) { return -0.7 / std::cosh(x); };
  DiscreteOperator base = assemble_dirac(P.m, V, g);
  V.a2 = [](double x) { return 1.5 * std::sin(2 * x) + 0.4; };
  DiscreteOperator gauged = assemble_dirac(P.m, V, g);
  CHECK(gauged.phases.size() == 2 * g.n);
  Eigen::VectorXd a = all_eigenvalues(base.matrix), b = all_eigenvalues(gauged.matrix);
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-11);
}

TEST_CASE("domain warning and triplet dump") {
  ModelParams P = make_params(1.0, 0.5);
  CHECK(assemble_A(P, build_grid(3, 64)).domain_warning);
  CHECK_FALSE(assemble_A(P, build_grid(40 / P.kappa, 64)).domain_warning);
  DiscreteOperator op = assemble_A(P, build_grid(5, 16));
  std::ostringstream s;
  dump_triplets(op, s);
  std::istringstream in(s.str());
  long r, c;
  double v;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(32, 32);
  int lines = 0;
  while (in >> r >> c >> v) {
    D(r, c) = v;
    ++lines;
  }
  CHECK(lines == 32 + 2 * 31);
  CHECK((D - to_dense(op.matrix)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("suspect margin scales with h^2") {
  ModelParams P = make_params(1.0, 0.5);
  DiscreteOperator a = assemble_A(P, build_grid(10, 1000));
  DiscreteOperator s = assemble_schrodinger(P, build_grid(10, 1000), SchrodingerSign::minus);
  CHECK(a.suspect_margin() == doctest::Approx(10 * a.grid.h * a.grid.h));
  CHECK(s.suspect_margin() == doctest::Approx(20 * a.grid.h * a.grid.h));
}

TEST_CASE("Schrodinger partners are intertwined by reflection") {
  for (double p : {0.8, 1.0, 2.0}) {
    ModelParams P = make_params(1.0, 0.5, p);
    Grid g = build_grid(default_half_length(P, OperatorKind::L_mu), 2000);
    DiscreteOperator a = assemble_schrodinger(P, g, SchrodingerSign::minus);
    DiscreteOperator b = assemble_schrodinger(P, g, SchrodingerSign::plus);
    CHECK((a.matrix.diag - b.matrix.diag.reverse()).cwiseAbs().maxCoeff() <= 1e-12);
    Eigen::VectorXd ea = eigenvalues_in(a.matrix, a.gap_lower - 1, P.m * P.m);
    Eigen::VectorXd eb = eigenvalues_in(b.matrix, b.gap_lower - 1, P.m * P.m);
    REQUIRE(ea.size() == eb.size());
    CHECK((ea - eb).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("default half-lengths follow the decay rates") {
  ModelParams P = make_params(1.0, 0.5, 3.0);
  CHECK(default_half_length(P, OperatorKind::A_p) == doctest::Approx(120 / P.kappa));
  CHECK(default_half_length(P, OperatorKind::L_mu) == doctest::Approx(40 / P.kappa));
  ModelParams Q = with_p(P, 0.5);
  CHECK(default_half_length(Q, OperatorKind::A_p) == doctest::Approx(40 / P.kappa));
  CHECK(default_half_length(Q, OperatorKind::L_mu) == doctest::Approx(80 / P.kappa));
}
