#include "diracgap/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "diracgap/closed_forms.hpp"
#include "diracgap/discretization.hpp"
#include "diracgap/errors.hpp"
#include "diracgap/quadrature.hpp"
#include "diracgap/spectral.hpp"
#include "diracgap/threshold.hpp"

namespace diracgap {

unsigned worker_count() {
  if (const char* env = std::getenv("DIRACGAP_WORKERS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& f) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

GridChoice choose_grid(const ModelParams& P, double d_est, const ResolutionPolicy& pol) {
  if (!(d_est > 0)) throw DomainError("choose_grid: need d_est > 0");
  const double m = P.m;
  double decay = 1 / std::sqrt(2 * m * d_est);
  double L_min = pol.L_min > 0 ? pol.L_min : 40 / P.kappa;
  double L = std::clamp(20 * decay, L_min, std::max(L_min, pol.L_max));
  // Keep the suspect band 10 h^2 m^3 below half the expected distance.
  double h = std::min({pol.h_max, decay / 20, std::sqrt(d_est / (20 * m * m * m))});
  auto n = static_cast<Eigen::Index>(std::ceil(2 * L / h)) + 1;
  n += n % 2;
  GridChoice c{L, n, false};
  if (n > pol.n_max) {
    c.n = pol.n_max - pol.n_max % 2;
    c.capped = true;
  }
  return c;
}

namespace {

double tail_ratio(const Eigen::VectorXd& v) {
  const Eigen::Index k = std::min<Eigen::Index>(4, v.size() / 2);
  double edge = std::max(v.head(k).cwiseAbs().maxCoeff(), v.tail(k).cwiseAbs().maxCoeff());
  return edge / v.cwiseAbs().maxCoeff();
}

}  // namespace

SweepRecord solve_extra(const ModelParams& P, double L, Eigen::Index n) {
  SweepRecord r;
  r.p = P.p;
  r.omega = P.omega;
  r.mu = P.mu;
  r.L = L;
  r.n = n;
  Grid grid = build_grid(L, n);
  DiscreteOperator op = assemble_A(P, grid);
  SpectrumReport rep = gap_eigs(op);
  Eigen::Index ground = -1;
  for (Eigen::Index i = 0; i < rep.eigenvalues.size(); ++i)
    if (rep.eigenvalues(i) > 0 &&
        (ground < 0 || std::abs(rep.eigenvalues(i) - P.omega) <
                           std::abs(rep.eigenvalues(ground) - P.omega)))
      ground = i;
  Eigen::Index top = -1;
  bool suspect_extra = false;
  for (Eigen::Index i = 0; i < rep.eigenvalues.size(); ++i) {
    if (i == ground || rep.eigenvalues(i) <= 0) continue;
    if (rep.suspect[i]) {
      suspect_extra = true;
    } else if (top < 0 || rep.eigenvalues(i) > rep.eigenvalues(top)) {
      top = i;
    }
  }
  if (ground >= 0) r.residual = rep.residuals(ground);
  if (P.p >= 1) {
    if (top >= 0) r.flag = "unexpected-eigenvalue";
    return r;
  }
  if (top < 0) {
    r.flag = "resolution-insufficient";
    return r;
  }
  r.lambda_extra = rep.eigenvalues(top);
  r.threshold_distance = P.m - rep.eigenvalues(top);
  r.residual = rep.residuals(top);
  if (tail_ratio(rep.eigenvectors[top]) > 1e-6 || suspect_extra)
    r.flag = "resolution-insufficient";
  return r;
}

namespace {

SweepRecord sweep_point(const ModelParams& P, double C, const ResolutionPolicy& pol) {
  if (P.p >= 1) {
    // Reference resolution h = 2 (40/kappa)/4095 on a domain long enough for p.
    double L = pol.L_min > 0 ? pol.L_min : default_half_length(P, OperatorKind::A_p);
    auto n = static_cast<Eigen::Index>(std::ceil(4095 * L * P.kappa / 40)) + 1;
    return solve_extra(P, L, n + n % 2);
  }
  double d_est = C * (1 - P.p) * (1 - P.p);
  GridChoice g = choose_grid(P, d_est, pol);
  SweepRecord r = solve_extra(P, g.L, g.n);
  if (g.capped) {
    r.flag = "resolution-insufficient";
    return r;
  }
  if (!pol.refine_check || !r.lambda_extra) return r;
  SweepRecord fine = solve_extra(P, g.L, 2 * g.n);
  if (!fine.lambda_extra) {
    r.flag = "unrefined";
    return r;
  }
  if (std::abs(*fine.lambda_extra - *r.lambda_extra) >= 0.1 * *fine.threshold_distance &&
      fine.flag == "ok")
    fine.flag = "unrefined";
  return fine;
}

}  // namespace

std::vector<SweepRecord> sweep_p(const ModelParams& base, const std::vector<double>& p_list,
                                 ResolutionPolicy policy) {
  for (double p : p_list)
    if (!(p > 0)) throw DomainError("sweep_p: p must be positive");
  std::vector<SweepRecord> out(p_list.size());
  std::vector<bool> done(p_list.size(), false);
  double C = policy.C;
  if (policy.calibrate) {
    // Calibrate on the point farthest below 1, where the estimate matters least.
    std::size_t first = p_list.size();
    for (std::size_t i = 0; i < p_list.size(); ++i)
      if (p_list[i] < 1 && (first == p_list.size() || p_list[i] < p_list[first])) first = i;
    if (first < p_list.size()) {
      out[first] = sweep_point(with_p(base, p_list[first]), C, policy);
      done[first] = true;
      const SweepRecord& r = out[first];
      if (r.threshold_distance && r.flag == "ok")
        C = *r.threshold_distance / ((1 - r.p) * (1 - r.p));
    }
  }
  parallel_for(p_list.size(), [&](std::size_t i) {
    if (!done[i]) out[i] = sweep_point(with_p(base, p_list[i]), C, policy);
  });
  return out;
}

RateFit fit_rate(const std::vector<SweepRecord>& records) {
  std::vector<double> xs, ys, ps;
  for (const auto& r : records)
    if (r.p < 1 && r.threshold_distance && *r.threshold_distance > 0 && r.flag == "ok") {
      xs.push_back(std::log(1 - r.p));
      ys.push_back(std::log(*r.threshold_distance));
      ps.push_back(r.p);
    }
  if (xs.size() < 4) throw DomainError("fit_rate: need at least 4 resolved records");
  const double k = static_cast<double>(xs.size());
  double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / k;
  double my = std::accumulate(ys.begin(), ys.end(), 0.0) / k;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0)) throw DomainError("fit_rate: need distinct p values");
  RateFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
  f.p_min = *std::min_element(ps.begin(), ps.end());
  f.p_max = *std::max_element(ps.begin(), ps.end());
  f.count = static_cast<int>(xs.size());
  return f;
}

std::vector<MuPoint> sweep_mu(const ModelParams& P, const std::vector<double>& mu_list,
                              double L, Eigen::Index n) {
  for (double mu : mu_list)
    if (!(mu >= 0)) throw DomainError("sweep_mu: mu must be non-negative");
  if (L <= 0) L = default_half_length(P, OperatorKind::L_mu);
  Grid grid = build_grid(L, n);
  const double w = P.omega;
  const double ground_tol = 1e-3 * P.m;
  std::vector<MuPoint> out(mu_list.size());
  std::vector<char> any_suspect(mu_list.size(), 0);
  parallel_for(mu_list.size(), [&](std::size_t k) {
    ModelParams Q = with_mu(P, mu_list[k]);
    DiscreteOperator op = assemble_Lmu(Q, grid);
    SpectrumReport rep = gap_eigs(op);
    MuPoint pt;
    pt.record.p = P.p;
    pt.record.omega = w;
    pt.record.mu = Q.mu;
    pt.record.L = L;
    pt.record.n = n;
    pt.eigenvalues = rep.trusted();
    Eigen::Index top = -1, n_trusted = 0;
    for (Eigen::Index i = 0; i < rep.eigenvalues.size(); ++i) {
      if (rep.suspect[i]) {
        any_suspect[k] = true;
        continue;
      }
      double lam = rep.eigenvalues(i);
      if (lam < -2 * w - ground_tol) ++pt.count_lower;
      if (lam > -2 * w + ground_tol) ++pt.count_upper;
      top = i;
      ++n_trusted;
    }
    if (top >= 0) {
      pt.record.residual = rep.residuals(top);
      if (pt.count_upper >= 2) {
        pt.record.lambda_extra = rep.eigenvalues(top) + w;
        pt.record.threshold_distance = P.m - *pt.record.lambda_extra;
      }
      try {
        HellmannFeynman hf = hellmann_feynman(P, grid, Q.mu, n_trusted - 1);
        pt.slope = hf.slope;
        pt.fd_slope = hf.fd_slope;
        pt.slope_nonpositive = hf.slope <= 1e-8;
      } catch (const NumericalError&) {
        pt.tracking_lost = true;
      }
    }
    out[k] = std::move(pt);
  });
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (any_suspect[k]) out[k].tracking_lost = true;
    if (k > 0 && (out[k].count_upper != out[k - 1].count_upper ||
                  out[k].count_lower != out[k - 1].count_lower))
      out[k].tracking_lost = true;
    if (out[k].tracking_lost) out[k].record.flag = "tracking-lost";
    else if (!out[k].slope_nonpositive) out[k].record.flag = "slope-positive";
  }
  return out;
}

bool SelftestReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

namespace {

SelftestCheck check(std::string name, double value, double tol) {
  return {std::move(name), value, tol, value <= tol};
}

double ground_error(const ModelParams& P, Eigen::Index n) {
  DiscreteOperator op = assemble_A(P, build_grid(40 / P.kappa, n));
  Eigen::VectorXd e = eigenvalues_in(op.matrix, 0.5 * P.omega, 0.5 * (P.omega + P.m));
  if (e.size() < 1) throw NumericalError("selftest: ground state not found");
  return std::abs(e(0) - P.omega);
}

}  // namespace

SelftestReport selftest(const SelftestOptions& opt) {
  SelftestReport rep;
  const ModelParams P = make_params(1.0, 0.5, 1.0);

  double m_err = 0;
  for (double p : {0.8, 1.0, 2.0}) {
    ModelParams Q = with_p(P, p);
    for (int i = 0; i <= 200; ++i) {
      double x = -10 + 0.1 * i;
      double a = M_via_g(Q, x, [&](double y) { return opt.g_scale * g_profile(Q, y); });
      m_err = std::max(m_err, std::abs(a - M_closed_form(Q, x)) / Q.m);
    }
  }
  rep.checks.push_back(check("M formulas agree", m_err, 1e-12));

  {
    Grid g = build_grid(40 / P.kappa, 1024);
    DiscreteOperator A15 = assemble_A(with_p(P, 1.5), g);
    DiscreteOperator A1 = assemble_A(P, g);
    double pq = 1.5, c = 0.5;
    double err = 0;
    for (Eigen::Index i = 0; i < g.n; ++i) {
      double Wu = potential_W(P, upper_position(g, i));
      double Wl = potential_W(P, lower_position(g, i));
      err = std::max(err, std::abs(A15.matrix.diag(2 * i) - (pq * A1.matrix.diag(2 * i) - c * Wu)));
      err = std::max(err, std::abs(A15.matrix.diag(2 * i + 1) -
                                   (pq * A1.matrix.diag(2 * i + 1) + c * Wl)));
    }
    for (Eigen::Index i = 0; i < A1.matrix.off.size(); ++i)
      err = std::max(err, std::abs(A15.matrix.off(i) - pq * A1.matrix.off(i)));
    rep.checks.push_back(check("A_1.5 = 1.5 A_1 - 0.5 W sigma_3", err, 1e-13));
  }

  {
    double worst = 0;
    for (int i = 0; i <= 400; ++i) {
      double x = -20 + 0.1 * i;
      EnergyDensity<double> e = energy_density_forms(P, x);
      worst = std::max(worst, std::abs(e.defining - e.expanded));
    }
    rep.checks.push_back(check("energy density forms", worst, 1e-12));
    ConstantsReport c = constants(P);
    rep.checks.push_back(check("energy L1 norm by quadrature",
                               std::abs(c.E_l1 - c.closed_form_E_l1) / c.E_l1, 1e-8));
    double X = 40 / P.kappa;
    auto lhs = integrate([&](double x) {
      Spinor<double> f = solitary_wave(P, x);
      return potential_W(P, x) * (f(0) * f(0) - f(1) * f(1));
    }, -X, X, 1e-13, 1e-15);
    auto rhs = integrate([&](double x) { return solitary_wave(P, x).squaredNorm(); }, -X, X,
                         1e-13, 1e-15);
    rep.checks.push_back(check("<phi, W sigma_3 phi> = w |phi|^2",
                               std::abs(lhs.value - P.omega * rhs.value) / rhs.value, 1e-10));
  }

  {
    MatrixPotential V = MatrixPotential::soler(P);
    ThresholdReport t = analyze_threshold(V, P.m);
    rep.checks.push_back(check("Wronskian drift", t.wronskian_drift, 1e-8));

    double X = V.tail_cutoff();
    ShootingSolution a = shoot(V, ShootSide::left, -P.m, Vec2c(0, 1), X, 0.01);
    ShootingSolution b = shoot(V.sigma1_conjugate(), ShootSide::left, P.m, Vec2c(1, 0), X, 0.01);
    double sup = std::max(a.c1.cwiseAbs().maxCoeff(), a.c2.cwiseAbs().maxCoeff());
    double diff = std::max((a.c1 - b.c2).cwiseAbs().maxCoeff(), (a.c2 - b.c1).cwiseAbs().maxCoeff());
    rep.checks.push_back(check("sigma_1 symmetry of thresholds", diff / sup, 1e-12));
  }

  {
    DiscreteOperator op = assemble_A(P, build_grid(40 / P.kappa, 4096));
    SpectrumReport s = gap_eigs(op);
    double worst = 0;
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
      if (s.suspect[i]) continue;
      ParityResiduals r = parity_residuals(to_grid_spinor(op, s.eigenvectors[i]));
      worst = std::max(worst, std::min(r.plus, r.minus));
    }
    rep.checks.push_back(check("definite parity of gap eigenvectors", worst, 1e-6));
  }

  {
    double e1 = ground_error(P, opt.n);
    double e2 = ground_error(P, 2 * opt.n);
    double order = std::log2(e1 / e2);
    rep.checks.push_back(check("refinement order |order - 2|", std::abs(order - 2), 0.3));
  }
  return rep;
}

}  // namespace diracgap
