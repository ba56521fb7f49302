#include "diracgap/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "diracgap/closed_forms.hpp"
#include "diracgap/quadrature.hpp"

namespace diracgap {

Grid build_grid(double L, Eigen::Index n) {
  if (!(L > 0)) throw DomainError("build_grid: need L > 0");
  if (n < 16 || n % 2 != 0) throw DomainError("build_grid: need n >= 16 and even");
  Grid g;
  g.half_length = L;
  g.n = n;
  g.h = 2 * L / static_cast<double>(n - 1);
  g.nodes.resize(n);
  // Fill symmetrically so that nodes[i] + nodes[n-1-i] == 0 exactly.
  for (Eigen::Index i = 0; i < n / 2; ++i) {
    double x = -L + static_cast<double>(i) * g.h;
    g.nodes(i) = x;
    g.nodes(n - 1 - i) = -x;
  }
  return g;
}

std::string to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::A_p: return "A_p";
    case OperatorKind::L_mu: return "L_mu";
    case OperatorKind::schrodinger_minus: return "schrodinger_minus";
    case OperatorKind::schrodinger_plus: return "schrodinger_plus";
    case OperatorKind::dirac_general: return "dirac_general";
  }
  return "unknown";
}

double DiscreteOperator::suspect_margin() const {
  double m = params.m;
  double eta = 10 * grid.h * grid.h * m * m * m;
  return spinor() ? eta : 2 * m * eta;
}

double default_half_length(const ModelParams& P, OperatorKind kind) {
  if (kind == OperatorKind::A_p) return 40 * std::max(1.0, P.p) / P.kappa;
  return 40 / (std::min(1.0, P.p) * P.kappa);
}

namespace {

// c i sigma_2 d/dx + diag(d1, d2) + o sigma_1 on the staggered grid.
template <typename D1, typename D2, typename O>
SymTridiagonal staggered(const Grid& g, double c, D1&& d1, D2&& d2, O&& o) {
  const Eigen::Index n = g.n;
  SymTridiagonal T;
  T.diag.resize(2 * n);
  T.off.resize(2 * n - 1);
  const double k = c / g.h;
  for (Eigen::Index i = 0; i < n; ++i) {
    T.diag(2 * i) = d1(upper_position(g, i));
    T.diag(2 * i + 1) = d2(lower_position(g, i));
    T.off(2 * i) = k + 0.5 * o(g.nodes(i));
    if (i + 1 < n) T.off(2 * i + 1) = -k + 0.5 * o(g.nodes(i) + 0.5 * g.h);
  }
  return T;
}

}  // namespace

DiscreteOperator assemble_A(const ModelParams& P, const Grid& grid) {
  DiscreteOperator op;
  op.kind = OperatorKind::A_p;
  op.params = P;
  op.grid = grid;
  op.gap_lower = -P.m;
  op.gap_upper = P.m;
  auto mass = [&](double x) { return P.m - (P.p + 1) * g_profile(P, x); };
  op.matrix = staggered(
      grid, P.p, mass, [&](double x) { return -mass(x); },
      [](double) { return 0.0; });
  op.domain_warning = g_profile(P, grid.half_length) / (P.m - P.omega) > 1e-10;
  return op;
}

DiscreteOperator assemble_free(const ModelParams& P, const Grid& grid) {
  DiscreteOperator op;
  op.kind = OperatorKind::A_p;
  op.params = P;
  op.grid = grid;
  op.gap_lower = -P.m;
  op.gap_upper = P.m;
  op.matrix = staggered(
      grid, P.p, [&](double) { return P.m; }, [&](double) { return -P.m; },
      [](double) { return 0.0; });
  return op;
}

DiscreteOperator assemble_Lmu(const ModelParams& P, const Grid& grid) {
  DiscreteOperator op;
  op.kind = OperatorKind::L_mu;
  op.params = P;
  op.grid = grid;
  op.gap_lower = -P.m - P.omega;
  op.gap_upper = P.m - P.omega;
  const double mu = P.mu;
  auto d1 = [&](double x) {
    double v = M_profile(P, x) - P.omega;
    if (mu != 0) v -= mu * q_matrix(P, x)(0, 0);
    return v;
  };
  auto d2 = [&](double x) {
    double v = -M_profile(P, x) - P.omega;
    if (mu != 0) v -= mu * q_matrix(P, x)(1, 1);
    return v;
  };
  auto o = [&](double x) { return mu != 0 ? -mu * q_matrix(P, x)(0, 1) : 0.0; };
  op.matrix = staggered(grid, 1.0, d1, d2, o);
  op.domain_warning =
      g_profile(P, P.p * grid.half_length) / (P.m - P.omega) > 1e-10;
  return op;
}

DiscreteOperator assemble_schrodinger(const ModelParams& P, const Grid& grid,
                                      SchrodingerSign sign) {
  DiscreteOperator op;
  op.kind = sign == SchrodingerSign::minus ? OperatorKind::schrodinger_minus
                                           : OperatorKind::schrodinger_plus;
  op.params = P;
  op.grid = grid;
  const Eigen::Index n = grid.n;
  const double ih2 = 1 / (grid.h * grid.h);
  const double s = sign == SchrodingerSign::minus ? -1.0 : 1.0;
  op.matrix.diag.resize(n);
  op.matrix.off = Eigen::VectorXd::Constant(n - 1, -ih2);
  double vmin = P.m * P.m;
  for (Eigen::Index i = 0; i < n; ++i) {
    double x = grid.nodes(i);
    double M = M_profile(P, x);
    double V = M * M + s * M_prime(P, x);
    vmin = std::min(vmin, V);
    op.matrix.diag(i) = 2 * ih2 + V;
  }
  op.gap_lower = vmin;
  op.gap_upper = P.m * P.m;
  op.domain_warning =
      g_profile(P, P.p * grid.half_length) / (P.m - P.omega) > 1e-10;
  return op;
}

DiscreteOperator assemble_dirac(double m, const PauliField& V, const Grid& grid) {
  DiscreteOperator op;
  op.kind = OperatorKind::dirac_general;
  op.params.m = m;
  op.grid = grid;
  op.gap_lower = -m;
  op.gap_upper = m;
  const Eigen::Index n = grid.n;
  const double h = grid.h;
  auto link = [&](double a, double b) {
    return gl_composite(V.a2, a, b, 1, 8);
  };
  op.matrix.diag.resize(2 * n);
  op.matrix.off.resize(2 * n - 1);
  op.phases.resize(2 * n);
  op.phases(0) = 0;
  auto reduce = [&](Eigen::Index k, std::complex<double> z) {
    double r = std::abs(z);
    double shift = std::arg(z);
    if (z.real() < 0) {
      r = -r;
      shift -= std::numbers::pi;
    }
    op.matrix.off(k) = r;
    op.phases(k + 1) = op.phases(k) - shift;
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    double xu = upper_position(grid, i), xl = lower_position(grid, i);
    op.matrix.diag(2 * i) = m + V.a0(xu) + V.a3(xu);
    op.matrix.diag(2 * i + 1) = -m + V.a0(xl) - V.a3(xl);
    double xm = grid.nodes(i);
    std::complex<double> z0 = (1 / h + 0.5 * V.a1(xm)) *
                              std::polar(1.0, -link(xu, xl));
    reduce(2 * i, z0);
    if (i + 1 < n) {
      double xn = upper_position(grid, i + 1);
      std::complex<double> z1 = (-1 / h + 0.5 * V.a1(xm + 0.5 * h)) *
                                std::polar(1.0, -link(xl, xn));
      reduce(2 * i + 1, z1);
    }
  }
  return op;
}

void dump_triplets(const DiscreteOperator& op, std::ostream& out) {
  const SymTridiagonal& T = op.matrix;
  char buf[96];
  for (Eigen::Index k = 0; k < T.size(); ++k) {
    if (k > 0) {
      std::snprintf(buf, sizeof buf, "%td %td %.17g\n", k, k - 1, T.off(k - 1));
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "%td %td %.17g\n", k, k, T.diag(k));
    out << buf;
    if (k + 1 < T.size()) {
      std::snprintf(buf, sizeof buf, "%td %td %.17g\n", k, k + 1, T.off(k));
      out << buf;
    }
  }
}

}  // namespace diracgap
