// Acceptance run: one PASS/FAIL line per criterion, details indented below.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "diracgap/closed_forms.hpp"
#include "diracgap/discretization.hpp"
#include "diracgap/errors.hpp"
#include "diracgap/experiments.hpp"
#include "diracgap/minmax.hpp"
#include "diracgap/quadrature.hpp"
#include "diracgap/spectral.hpp"
#include "diracgap/threshold.hpp"

using namespace diracgap;

namespace {

int failures = 0;

void verdict(int id, bool pass, const std::string& what, double seconds) {
  std::printf("criterion %2d: %s  %s  (%.1f s)\n", id, pass ? "PASS" : "FAIL", what.c_str(),
              seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

template <typename F>
void run(int id, const std::string& what, F&& body) {
  auto t0 = std::chrono::steady_clock::now();
  bool pass = false;
  try {
    pass = body();
  } catch (const std::exception& e) {
    std::printf("    exception: %s\n", e.what());
  }
  double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  verdict(id, pass, what, s);
}

const ModelParams REF = make_params(1.0, 0.5, 1.0);
const std::vector<double> LATTICE_P{0.5, 0.8, 1.0, 1.5, 2.0, 3.0};
const std::vector<double> LATTICE_W{0.2, 0.5, 0.8};

struct LatticeRun {
  double p, w, lambda;
  ThresholdReport report;
  SimplicityResult simplicity;
};

std::vector<LatticeRun> lattice_runs() {
  std::vector<LatticeRun> runs;
  for (double p : LATTICE_P)
    for (double w : LATTICE_W)
      for (int s : {1, -1}) runs.push_back({p, w, s * 1.0, {}, {}});
  parallel_for(runs.size(), [&](std::size_t i) {
    ModelParams P = make_params(1.0, runs[i].w, runs[i].p);
    MatrixPotential V = MatrixPotential::soler(P);
    runs[i].report = analyze_threshold(V, runs[i].lambda * P.m);
    runs[i].simplicity = simplicity_check(V, runs[i].lambda * P.m);
  });
  return runs;
}

bool criterion1() {
  bool ok = true;
  for (double p : {1.0, 1.5, 2.0, 3.0}) {
    auto t0 = std::chrono::steady_clock::now();
    ModelParams P = with_p(REF, p);
    double L = default_half_length(P, OperatorKind::A_p);
    // Reference spacing at p = 1 is 2 (40/kappa)/4095; the domain grows with p.
    Eigen::Index n_ref = 4096 * static_cast<Eigen::Index>(std::max(1.0, std::round(p)));
    Eigen::Index n = 4 * n_ref;
    SpectrumReport r = gap_eigs(assemble_A(P, build_grid(L, n)));
    const double h = 2 * L / (n - 1);
    int found = 0;
    double err = 0, res = 0, stray = 0;
    for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i) {
      double lam = r.eigenvalues(i);
      if (std::abs(std::abs(lam) - P.omega) < 1e-3) {
        ++found;
        err = std::max(err, std::abs(std::abs(lam) - P.omega));
        res = std::max(res, r.residuals(i));
      } else {
        stray = std::max(stray, (P.m - std::abs(lam)) / (10 * h * h * P.m * P.m * P.m));
      }
    }
    // Richardson estimate from the reference spacing, for the record.
    SpectrumReport a = gap_eigs(assemble_A(P, build_grid(L, n_ref)));
    SpectrumReport b = gap_eigs(assemble_A(P, build_grid(L, 2 * n_ref)));
    double rich = std::abs((4 * b.trusted().maxCoeff() - a.trusted().maxCoeff()) / 3 - P.omega);
    double ref_err = std::abs(a.trusted().maxCoeff() - P.omega);
    double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = found == 2 && err < 1e-6 && res < 1e-6 && stray <= 1 && sec < 60;
    std::printf("    p=%.1f L=%.1f n=%ld: |lambda|-w err %.2e, residual %.1e, stray/(10h^2m^3) %.2f,"
                " ref-grid err %.2e, Richardson err %.2e, %.1f s\n",
                p, L, static_cast<long>(n), err, res, stray, ref_err, rich, sec);
    ok = ok && pass;
  }
  return ok;
}

bool criterion2() {
  bool ok = true;
  for (double p : {0.80, 0.85, 0.90}) {
    ModelParams P = with_p(REF, p);
    SpectrumReport r = gap_eigs(assemble_A(P, build_grid(40 / P.kappa, 4096)));
    Eigen::VectorXd t = r.trusted();
    double asym = 0;
    bool pass = t.size() == 4 && r.eigenvalues.size() == 4;
    if (pass) {
      for (int i = 0; i < 4; ++i) asym = std::max(asym, std::abs(t(i) + t(3 - i)));
      pass = asym < 1e-8 && t(3) > P.omega && t(3) < P.m && std::abs(t(2) - P.omega) < 1e-4;
    }
    std::printf("    p=%.2f: %ld eigenvalues, outer %.10f, asymmetry %.1e\n", p,
                static_cast<long>(r.eigenvalues.size()), t.size() ? t.maxCoeff() : 0.0, asym);
    ok = ok && pass;
  }
  return ok;
}

bool criterion3() {
  std::vector<SweepRecord> rs = sweep_p(REF, {0.80, 0.85, 0.90, 0.95});
  bool all_ok = true;
  for (const auto& r : rs) {
    std::printf("    p=%.2f d=%.6e L=%.1f n=%ld flag=%s\n", r.p,
                r.threshold_distance.value_or(NAN), r.L, static_cast<long>(r.n), r.flag.c_str());
    all_ok = all_ok && r.flag == "ok";
  }
  RateFit f = fit_rate(rs);
  std::printf("    slope %.4f, r^2 %.6f over %d points\n", f.slope, f.r_squared, f.count);
  return all_ok && f.count == 4 && f.slope >= 1.75 && f.slope <= 2.25 && f.r_squared > 0.99;
}

bool criterion4(const std::vector<LatticeRun>& runs) {
  int eig = 0, res = 0;
  for (const auto& r : runs) {
    if (r.report.classification == ThresholdClass::eigenvalue) ++eig;
    if (r.report.classification == ThresholdClass::resonance) ++res;
  }
  std::printf("    %zu threshold solves: %d eigenvalue, %d resonance\n", runs.size(), eig, res);
  return eig == 0;
}

bool criterion5() {
  MatrixPotential V = MatrixPotential::soler(REF);
  ThresholdReport r = analyze_threshold(V, REF.m);
  const Eigen::Index N = r.x.size();
  Eigen::VectorXcd p1(N), p2(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    Spinor<double> f = resonance_state(REF, r.x(i));
    p1(i) = f(0);
    p2(i) = f(1);
  }
  std::complex<double> c = (p1.dot(r.c1) + p2.dot(r.c2)) / (p1.squaredNorm() + p2.squaredNorm());
  double sup = std::max(r.c1.cwiseAbs().maxCoeff(), r.c2.cwiseAbs().maxCoeff());
  double dev = std::max((r.c1 - c * p1).cwiseAbs().maxCoeff(),
                        (r.c2 - c * p2).cwiseAbs().maxCoeff()) / sup;
  int dim = simplicity_check(V, REF.m).dimension;
  std::printf("    class %s, relative deviation from psi_inf %.2e, simplicity %d\n",
              to_string(r.classification).c_str(), dev, dim);
  return r.matched && dev < 1e-5 && dim == 1;
}

bool criterion6(const std::vector<LatticeRun>& runs) {
  int worst_dim = 0;
  double drift = 0;
  for (const auto& r : runs) {
    worst_dim = std::max(worst_dim, r.simplicity.dimension);
    drift = std::max(drift, r.report.wronskian_drift);
  }
  std::printf("    max dimension %d, max Wronskian drift %.2e\n", worst_dim, drift);
  return worst_dim <= 1 && drift < 1e-8;
}

bool criterion7() {
  const ModelParams& P = REF;
  // (a)
  double a = 0;
  for (double p : {0.5, 0.8, 1.0, 2.0, 3.0}) {
    ModelParams Q = with_p(P, p);
    for (int i = 0; i <= 400; ++i) {
      double x = -20 + 0.1 * i;
      a = std::max(a, std::abs(M_profile(Q, x) - M_closed_form(Q, x)));
    }
  }
  // (b)
  double b = 0;
  {
    Grid g = build_grid(40 / P.kappa, 4096);
    DiscreteOperator Ap = assemble_A(with_p(P, 1.5), g), Aq = assemble_A(P, g);
    const double r = 1.5 / 1.0, c = 1.5 - 1.0;
    for (Eigen::Index i = 0; i < g.n; ++i) {
      b = std::max(b, std::abs(Ap.matrix.diag(2 * i) -
                               (r * Aq.matrix.diag(2 * i) - c * potential_W(P, upper_position(g, i)))));
      b = std::max(b, std::abs(Ap.matrix.diag(2 * i + 1) -
                               (r * Aq.matrix.diag(2 * i + 1) + c * potential_W(P, lower_position(g, i)))));
    }
    for (Eigen::Index i = 0; i < Aq.matrix.off.size(); ++i)
      b = std::max(b, std::abs(Ap.matrix.off(i) - r * Aq.matrix.off(i)));
  }
  // (c)
  double c;
  {
    double X = 40 / P.kappa;
    double lhs = 2 * integrate([&](double x) {
      Spinor<double> f = solitary_wave(P, x);
      return potential_W(P, x) * (f(0) * f(0) - f(1) * f(1));
    }, 0.0, X, 1e-13).value;
    double rhs = 2 * integrate([&](double x) { return solitary_wave(P, x).squaredNorm(); }, 0.0,
                               X, 1e-13).value;
    c = std::abs(lhs - P.omega * rhs) / rhs;
  }
  // (d) A_1 psi_d computed from the derivative of psi_inf and the cutoff.
  double d = 0;
  for (double delta : {0.1, 0.01, 0.001}) {
    auto quad = [&](double x) {
      Spinor<double> f = trial_state(P, delta, x);
      Spinor<double> fp = resonance_state_prime(P, x);
      double eta = std::sqrt(delta) * std::exp(-delta * x);
      Spinor<double> psi = resonance_state(P, x);
      Spinor<double> der = eta * fp - delta * eta * psi;
      double M = P.m - 2 * g_profile(P, x);
      return f(0) * (der(1) + M * f(0)) + f(1) * (-der(0) - M * f(1));
    };
    auto norm = [&](double x) { return trial_state(P, delta, x).squaredNorm(); };
    double X = 40 / delta;
    double lhs = integrate(quad, 0.0, X, 1e-13, 1e-300, 64, 1 << 20).value;
    double rhs = integrate(norm, 0.0, X, 1e-13, 1e-300, 64, 1 << 20).value;
    d = std::max(d, std::abs(lhs - P.m * rhs) / (P.m * rhs));
  }
  // (e)
  double e = 0;
  for (double eps : {0.05, 0.02, 0.01}) {
    Grid g = minmax_grid(P, eps, 0.25, 0.2);
    DiscreteOperator A1 = assemble_A(P, g);
    NegativeProjector Lm(A1);
    double delta = std::pow(eps, 1.5);
    Eigen::VectorXd psi = sample_staggered(g, [&](double x) { return trial_state(P, delta, x); });
    e = std::max(e, Lm.apply(psi).norm() / (delta / (P.m + P.omega) * psi.norm()));
  }
  std::printf("    (a) M forms %.1e  (b) A_1.5 identity %.1e  (c) <phi,W s3 phi>/w|phi|^2-1 %.1e\n"
              "    (d) trial-state identity %.1e  (e) |L_- psi_d| / bound %.3f\n",
              a, b, c, d, e);
  return a < 1e-12 && b < 1e-13 && c < 1e-6 && d < 1e-10 && e <= 1;
}

double E_star_quadrature = 0;

bool criterion8() {
  bool ok = true;
  for (double w : {0.3, 0.5, 0.7}) {
    ModelParams P = make_params(1.0, w, 1.0);
    ConstantsReport c = constants(P);
    double e1 = std::abs(c.c_inf - c.closed_form_c_inf);
    double e2 = std::abs(c.psi_inf_sup - P.kappa / (2 * w));
    std::printf("    w=%.1f: c_inf %.12f (formula %.12f), |psi_inf|_sup %.12f (err %.1e)\n"
                "           |E|_1 %.10f (closed form %.10f), E* %.10f (closed form %.10f)\n           %s\n",
                w, c.c_inf, c.closed_form_c_inf, c.psi_inf_sup, e2, c.E_l1, c.closed_form_E_l1,
                c.E_star, c.closed_form_E_star, c.supported_form.c_str());
    ok = ok && e1 < 1e-8 && e2 < 1e-8;
    if (w == 0.5) E_star_quadrature = c.E_star;
  }
  return ok;
}

bool criterion9() {
  if (!(E_star_quadrature > 0)) E_star_quadrature = constants(REF).E_star;
  bool ok = true;
  for (double eps : {0.02, 0.01}) {
    Grid g = minmax_grid(REF, eps, 0.25);
    MinMaxReport r = gamma_bound(assemble_A(REF, g), eps, 0.25);
    double ratio = r.drop / (eps * r.delta);
    std::printf("    eps=%.2f delta=%.3e n=%ld: drop %.3e, drop/(eps delta) %.4f, E* %.4f, ratio %.3f\n",
                eps, r.delta, static_cast<long>(g.n), r.drop, ratio, E_star_quadrature,
                ratio / E_star_quadrature);
    ThirdLevelCheck t = third_level_check(assemble_A(REF, g), eps);
    std::printf("    levels of A_{1-eps}: %.8f %.8f %.8f (third >= m - %.1e: %s)\n", t.gamma0,
                t.gamma1, t.gamma2, t.margin, t.pass ? "yes" : "no");
    ok = ok && r.drop > 0 && ratio >= E_star_quadrature / 3 && ratio <= 3 * E_star_quadrature;
  }
  return ok;
}

bool criterion10() {
  bool kneser = true;
  double worst = 0;
  for (double p : LATTICE_P)
    for (double w : LATTICE_W) {
      ModelParams P = make_params(1.0, w, p);
      KneserResult k = kneser_check(P, P.m * P.m, 30.0);
      worst = std::max(worst, k.sup_value);
      kneser = kneser && k.pass;
    }
  bool stable = true;
  for (double p : LATTICE_P)
    for (double w : LATTICE_W) {
      ModelParams P = make_params(1.0, w, p);
      double L = 60 / (std::min(1.0, p) * P.kappa);
      for (SchrodingerSign s : {SchrodingerSign::minus, SchrodingerSign::plus}) {
        int a = schrodinger_threshold_zero_count(P, s, L, 4096);
        int b = schrodinger_threshold_zero_count(P, s, L, 8192);
        if (a != b) {
          stable = false;
          std::printf("    zero count changed at p=%.1f w=%.1f: %d -> %d\n", p, w, a, b);
        }
      }
    }
  std::printf("    max sup x^2 q1 beyond R=30: %.3e; zero counts stable: %s\n", worst,
              stable ? "yes" : "no");
  return kneser && stable;
}

}  // namespace

int main() {
  std::printf("reference: m=1 w=0.5 L=40/kappa=%.4f n=4096\n", 40 / REF.kappa);
  run(1, "gap property for p >= 1", criterion1);
  run(2, "extra eigenvalue pair for p < 1", criterion2);
  run(3, "emergence rate (1-p)^2", criterion3);
  std::vector<LatticeRun> runs;
  run(4, "no threshold eigenvalues on the lattice", [&] {
    runs = lattice_runs();
    return criterion4(runs);
  });
  run(5, "resonance at p = 1 matches psi_inf", criterion5);
  run(6, "simplicity and Wronskian drift", [&] { return !runs.empty() && criterion6(runs); });
  run(7, "identity suite", criterion7);
  run(8, "constants audit", criterion8);
  run(9, "min-max energy drop", criterion9);
  run(10, "Kneser bound and zero-count stability", criterion10);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
