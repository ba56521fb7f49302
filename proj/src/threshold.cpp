#include "diracgap/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/SVD>

#include "diracgap/closed_forms.hpp"
#include "diracgap/errors.hpp"
#include "diracgap/quadrature.hpp"

namespace diracgap {

namespace {

const std::complex<double> I(0.0, 1.0);

Mat2c sigma1() { Mat2c s; s << 0, 1, 1, 0; return s; }
Mat2c sigma2() { Mat2c s; s << 0, -I, I, 0; return s; }
Mat2c sigma3() { Mat2c s; s << 1, 0, 0, -1; return s; }

}  // namespace

MatrixPotential MatrixPotential::soler(const ModelParams& P) {
  MatrixPotential V;
  V.m_ = P.m;
  V.extent_ = 80 / (P.p * P.kappa);
  V.label_ = "soler";
  V.f_ = [P](double x) {
    double G = (P.p + 1) * g_profile(P, P.p * x);
    Mat2c v = Mat2c::Zero();
    v(0, 0) = -G;
    v(1, 1) = G;
    if (P.mu != 0) v -= P.mu * q_matrix(P, x).cast<std::complex<double>>();
    return v;
  };
  return V;
}

MatrixPotential MatrixPotential::from_function(double m, std::function<Mat2c(double)> f,
                                               double extent, std::string label) {
  if (!(m > 0) || !(extent > 0)) throw DomainError("MatrixPotential: need m > 0, extent > 0");
  MatrixPotential V;
  V.m_ = m;
  V.extent_ = extent;
  V.label_ = std::move(label);
  V.f_ = std::move(f);
  return V;
}

MatrixPotential MatrixPotential::sampled(double m, Eigen::VectorXd x, std::vector<Mat2c> S) {
  const Eigen::Index N = x.size();
  if (N < 4 || static_cast<Eigen::Index>(S.size()) != N)
    throw DomainError("MatrixPotential: need at least 4 samples, one matrix per position");
  double dx = (x(N - 1) - x(0)) / static_cast<double>(N - 1);
  if (!(dx > 0)) throw DomainError("MatrixPotential: positions must increase");
  for (Eigen::Index i = 1; i < N; ++i)
    if (std::abs((x(i) - x(i - 1)) - dx) > 1e-6 * dx)
      throw DomainError("MatrixPotential: sampling must be uniform");
  MatrixPotential V;
  V.m_ = m;
  V.extent_ = std::max(std::abs(x(0)), std::abs(x(N - 1)));
  V.label_ = "sampled";
  V.xs_ = x;
  double x0 = x(0);
  V.f_ = [x0, dx, N, S = std::move(S)](double xx) {
    double t = (xx - x0) / dx;
    if (t < 0 || t > static_cast<double>(N - 1)) return Mat2c(Mat2c::Zero());
    Eigen::Index j0 = static_cast<Eigen::Index>(std::floor(t)) - 1;
    j0 = std::clamp<Eigen::Index>(j0, 0, N - 4);
    Mat2c out = Mat2c::Zero();
    for (int a = 0; a < 4; ++a) {
      double w = 1;
      for (int b = 0; b < 4; ++b)
        if (b != a) w *= (t - static_cast<double>(j0 + b)) / static_cast<double>(a - b);
      out += w * S[j0 + a];
    }
    return out;
  };
  return V;
}

MatrixPotential MatrixPotential::sigma1_conjugate() const {
  MatrixPotential V = *this;
  auto f = f_;
  V.f_ = [f](double x) { return Mat2c(-sigma1() * f(x) * sigma1()); };
  V.label_ = label_ + "/sigma1";
  return V;
}

double MatrixPotential::tail_cutoff(double tol) const {
  const int N = 40000;
  const double h = extent_ / N;
  std::vector<double> right(N + 1), left(N + 1);
  for (int i = 0; i <= N; ++i) {
    right[i] = f_(i * h).norm();
    left[i] = f_(-i * h).norm();
  }
  double tail = 0;
  for (int i = N; i > 0; --i) {
    double next = tail + 0.5 * h * (right[i] + right[i - 1] + left[i] + left[i - 1]);
    if (next >= tol) return std::max(i * h, 1.0);
    tail = next;
  }
  return 1.0;
}

MatrixPotential load_potential_csv(const std::string& path, double m) {
  std::ifstream in(path);
  if (!in) throw DomainError("load_potential_csv: cannot open " + path);
  std::vector<double> xs;
  std::vector<Mat2c> Vs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double v[9];
    int k = 0;
    while (k < 9 && (ss >> v[k])) ++k;
    if (k != 9) {
      if (xs.empty()) continue;  // header
      throw DomainError("load_potential_csv: expected 9 columns");
    }
    xs.push_back(v[0]);
    Mat2c M;
    M << std::complex<double>(v[1], v[2]), std::complex<double>(v[3], v[4]),
        std::complex<double>(v[5], v[6]), std::complex<double>(v[7], v[8]);
    Vs.push_back(M);
  }
  Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  return MatrixPotential::sampled(m, x, std::move(Vs));
}

PauliCoefficients pauli_decompose(const MatrixPotential& V, const Eigen::VectorXd& x) {
  PauliCoefficients c;
  const Eigen::Index N = x.size();
  c.x = x;
  c.a0.resize(N);
  c.a1.resize(N);
  c.a2.resize(N);
  c.a3.resize(N);
  double scale = 0;
  for (Eigen::Index i = 0; i < N; ++i) {
    Mat2c v = V(x(i));
    c.a0(i) = 0.5 * (v(0, 0) + v(1, 1));
    c.a1(i) = 0.5 * (v(0, 1) + v(1, 0));
    c.a2(i) = 0.5 * I * (v(0, 1) - v(1, 0));
    c.a3(i) = 0.5 * (v(0, 0) - v(1, 1));
    scale = std::max(scale, v.cwiseAbs().maxCoeff());
    c.alpha2_max_imag = std::max(c.alpha2_max_imag, std::abs(c.a2(i).imag()));
  }
  c.alpha2_real = c.alpha2_max_imag <= 1e-12 * std::max(1.0, scale);
  return c;
}

PauliCoefficients pauli_decompose(const MatrixPotential& V) {
  if (V.is_sampled()) return pauli_decompose(V, V.sample_positions());
  return pauli_decompose(V, Eigen::VectorXd::LinSpaced(2001, -V.extent(), V.extent()));
}

namespace {

double real_alpha2(const MatrixPotential& V, double x) {
  Mat2c v = V(x);
  return (0.5 * I * (v(0, 1) - v(1, 0))).real();
}

double integrate_alpha2(const MatrixPotential& V, double x) {
  if (x == 0) return 0;
  int panels = static_cast<int>(std::ceil(std::abs(x) / 0.05)) + 1;
  return gl_composite([&](double t) { return real_alpha2(V, t); }, 0.0, x, panels, 10);
}

}  // namespace

GaugeResult gauge_symmetrize(const MatrixPotential& V) {
  if (!pauli_decompose(V).alpha2_real)
    throw AssumptionViolation("gauge_symmetrize: alpha_2 is not real");
  auto f = [V](double x) {
    return Mat2c(V(x) - real_alpha2(V, x) * sigma2());
  };
  GaugeResult r{MatrixPotential::from_function(V.mass(), f, V.extent(), V.label() + "/gauge"),
                [V](double x) { return integrate_alpha2(V, x); }};
  return r;
}

PauliField pauli_field(const MatrixPotential& V) {
  PauliField F;
  F.a0 = [V](double x) { Mat2c v = V(x); return (0.5 * (v(0, 0) + v(1, 1))).real(); };
  F.a1 = [V](double x) { Mat2c v = V(x); return (0.5 * (v(0, 1) + v(1, 0))).real(); };
  F.a2 = [V](double x) { return real_alpha2(V, x); };
  F.a3 = [V](double x) { Mat2c v = V(x); return (0.5 * (v(0, 0) - v(1, 1))).real(); };
  return F;
}

Eigen::Index ShootingSolution::origin() const {
  Eigen::Index i = 0;
  x.cwiseAbs().minCoeff(&i);
  return i;
}

ShootingSolution shoot(const MatrixPotential& V, ShootSide side, double lambda,
                       const Vec2c& start, double X, double step) {
  const Eigen::Index half = static_cast<Eigen::Index>(std::ceil(X / step));
  const Eigen::Index N = 2 * half;
  const double h = X / static_cast<double>(half);
  const double m = V.mass();
  // psi' = -i sigma_2 (lambda - m sigma_3 - V) psi.
  Mat2c J;
  J << 0, -1, 1, 0;
  auto F = [&](double x, const Vec2c& y) -> Vec2c {
    Mat2c A = lambda * Mat2c::Identity() - m * sigma3() - V(x);
    return J * (A * y);
  };
  ShootingSolution s;
  s.lambda = lambda;
  s.side = side;
  s.X = X;
  s.step = h;
  s.x.resize(N + 1);
  s.c1.resize(N + 1);
  s.c2.resize(N + 1);
  for (Eigen::Index i = 0; i <= N; ++i)
    s.x(i) = (i < half) ? -X + static_cast<double>(i) * h
                        : X - static_cast<double>(N - i) * h;
  s.x(half) = 0;
  const bool from_left = side == ShootSide::left;
  const double dh = from_left ? h : -h;
  Vec2c y = start;
  Eigen::Index i = from_left ? 0 : N;
  s.c1(i) = y(0);
  s.c2(i) = y(1);
  for (Eigen::Index k = 0; k < N; ++k) {
    double x = s.x(i);
    Vec2c k1 = F(x, y);
    Vec2c k2 = F(x + 0.5 * dh, y + 0.5 * dh * k1);
    Vec2c k3 = F(x + 0.5 * dh, y + 0.5 * dh * k2);
    Vec2c k4 = F(x + dh, y + dh * k3);
    y += dh / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!(y.norm() < 1e8)) throw NumericalError("shoot_threshold: solution blew up");
    i += from_left ? 1 : -1;
    s.c1(i) = y(0);
    s.c2(i) = y(1);
  }
  return s;
}

ShootingSolution shoot_threshold(const MatrixPotential& V, ShootSide side, double lambda,
                                 const ShootOptions& opt) {
  if (!(std::abs(std::abs(lambda) - V.mass()) <= 1e-12 * V.mass()))
    throw DomainError("shoot_threshold: lambda must be +m or -m");
  double X = opt.X > 0 ? opt.X : V.tail_cutoff();
  bool upper = lambda > 0;
  if (opt.secular) upper = !upper;
  Vec2c start = upper ? Vec2c(1, 0) : Vec2c(0, 1);
  double step = std::min(opt.max_step, X / 200);
  ShootingSolution coarse = shoot(V, side, lambda, start, X, step);
  for (int level = 0; level < 12; ++level) {
    ShootingSolution fine = shoot(V, side, lambda, start, X, coarse.step / 2);
    double sup = std::max(fine.c1.cwiseAbs().maxCoeff(), fine.c2.cwiseAbs().maxCoeff());
    double err = 0;
    for (Eigen::Index i = 0; i < coarse.x.size(); ++i)
      err = std::max(err, std::abs(coarse.c1(i) - fine.c1(2 * i)) +
                              std::abs(coarse.c2(i) - fine.c2(2 * i)));
    if (err <= opt.tolerance * sup) return fine;
    coarse = std::move(fine);
  }
  throw NumericalError("shoot_threshold: step halving did not converge");
}

std::string to_string(ThresholdClass c) {
  switch (c) {
    case ThresholdClass::none: return "none";
    case ThresholdClass::resonance: return "resonance";
    case ThresholdClass::eigenvalue: return "eigenvalue";
  }
  return "none";
}

double wronskian_check(const ShootingSolution& phi, const ShootingSolution& xi) {
  if (phi.x.size() != xi.x.size())
    throw DomainError("wronskian_check: solutions on different grids");
  Eigen::Index o = phi.origin();
  auto W = [&](Eigen::Index i) { return phi.c1(i) * xi.c2(i) - phi.c2(i) * xi.c1(i); };
  std::complex<double> w0 = W(o);
  double drift = 0;
  for (Eigen::Index i = 0; i < phi.x.size(); ++i) drift = std::max(drift, std::abs(W(i) - w0));
  return drift / std::max(1.0, std::abs(w0));
}

namespace {

struct DecayFit {
  double rate = 0;
  double r2 = 0;
};

// Log-linear fit of |f| on x >= 0 over the outer 30% of the range where
// |f| exceeds 1e-8 of its maximum.
DecayFit fit_decay(const Eigen::VectorXd& x, const Eigen::VectorXcd& f) {
  const Eigen::Index N = x.size();
  Eigen::Index o = 0;
  x.cwiseAbs().minCoeff(&o);
  double fmax = f.tail(N - o).cwiseAbs().maxCoeff();
  if (fmax == 0) return {};
  Eigen::Index end = o;
  while (end + 1 < N && std::abs(f(end + 1)) > 1e-8 * fmax) ++end;
  Eigen::Index begin = end - static_cast<Eigen::Index>(0.3 * static_cast<double>(end - o));
  if (end - begin < 8) return {};
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  double cnt = static_cast<double>(end - begin + 1);
  for (Eigen::Index i = begin; i <= end; ++i) {
    double xi = x(i), yi = std::log(std::abs(f(i)));
    sx += xi;
    sy += yi;
    sxx += xi * xi;
    sxy += xi * yi;
    syy += yi * yi;
  }
  double cov = sxy - sx * sy / cnt;
  double vx = sxx - sx * sx / cnt;
  double vy = syy - sy * sy / cnt;
  DecayFit d;
  d.rate = -cov / vx;
  d.r2 = vy > 0 ? cov * cov / (vx * vy) : 1.0;
  return d;
}

}  // namespace

ThresholdReport classify_threshold(const ShootingSolution& left, const ShootingSolution& right,
                                   bool trivial_potential) {
  if (left.x.size() != right.x.size() || left.lambda != right.lambda)
    throw DomainError("classify_threshold: solutions must share grid and energy");
  ThresholdReport r;
  r.lambda = left.lambda;
  r.X = left.X;
  r.step = left.step;
  r.trivial = trivial_potential;
  const Eigen::Index o = left.origin();
  const Eigen::Index N = left.x.size();
  Vec2c L0 = left.at(o), R0 = right.at(o);
  if (L0.norm() == 0 && R0.norm() == 0)
    throw NumericalError("classify_threshold: both solutions vanish at 0");
  std::complex<double> det = L0(0) * R0(1) - L0(1) * R0(0);
  r.match_determinant = std::abs(det) / (L0.norm() * R0.norm());
  r.matched = r.match_determinant < 1e-6;
  r.wronskian_drift = wronskian_check(left, right);

  const bool upper = r.lambda > 0;
  r.x = left.x;
  r.c1.resize(N);
  r.c2.resize(N);
  if (r.matched) {
    std::complex<double> a = R0.dot(L0) / R0.squaredNorm();
    for (Eigen::Index i = 0; i < N; ++i) {
      Vec2c v = i <= o ? left.at(i) : Vec2c(a * right.at(i));
      r.c1(i) = v(0);
      r.c2(i) = v(1);
    }
  } else {
    for (Eigen::Index i = 0; i < N; ++i) {
      Vec2c v = i <= o ? left.at(i) : right.at(i);
      r.c1(i) = v(0);
      r.c2(i) = v(1);
    }
  }
  double sup = std::max(r.c1.cwiseAbs().maxCoeff(), r.c2.cwiseAbs().maxCoeff());
  r.c1 /= sup;
  r.c2 /= sup;
  const Eigen::VectorXcd& plateau = upper ? r.c1 : r.c2;
  const Eigen::VectorXcd& decaying = upper ? r.c2 : r.c1;
  r.l_minus = plateau(0);
  r.l_plus = plateau(N - 1);
  DecayFit fit = fit_decay(r.x, decaying);
  r.decay_exponent = fit.rate;
  r.decay_r2 = fit.r2;

  if (r.trivial || !r.matched) {
    r.classification = ThresholdClass::none;
  } else if (std::abs(r.l_minus) < 1e-6 && std::abs(r.l_plus) < 1e-6) {
    r.classification = ThresholdClass::eigenvalue;
  } else {
    r.classification = ThresholdClass::resonance;
  }
  return r;
}

namespace {

bool vanishes(const MatrixPotential& V, double X) {
  for (int i = 0; i <= 2000; ++i)
    if (V(-X + 2 * X * i / 2000.0).norm() > 1e-14) return false;
  return true;
}

}  // namespace

ThresholdReport analyze_threshold(const MatrixPotential& V, double lambda,
                                  const ShootOptions& opt) {
  ShootOptions o = opt;
  if (o.X <= 0) o.X = V.tail_cutoff();
  ShootingSolution left = shoot_threshold(V, ShootSide::left, lambda, o);
  // The right solution on exactly the same grid.
  ShootingSolution right = shoot(V, ShootSide::right, lambda,
                                 lambda > 0 ? Vec2c(1, 0) : Vec2c(0, 1), o.X, left.step);
  return classify_threshold(left, right, vanishes(V, o.X));
}

SimplicityResult simplicity_check(const MatrixPotential& V, double lambda,
                                  const ShootOptions& opt) {
  if (!pauli_decompose(V).alpha2_real)
    throw AssumptionViolation("simplicity_check: alpha_2 is not real");
  ShootOptions o = opt;
  if (o.X <= 0) o.X = V.tail_cutoff();
  ThresholdReport rep = analyze_threshold(V, lambda, o);
  SimplicityResult s;
  s.trivial = rep.trivial;
  ShootingSolution left = shoot_threshold(V, ShootSide::left, lambda, o);
  ShootingSolution right =
      shoot(V, ShootSide::right, lambda, lambda > 0 ? Vec2c(1, 0) : Vec2c(0, 1), o.X, left.step);
  Eigen::Matrix2cd C;
  C.col(0) = left.at(left.origin());
  C.col(1) = right.at(right.origin());
  Eigen::JacobiSVD<Eigen::Matrix2cd> svd(C);
  s.singular_ratio = svd.singularValues()(1) / svd.singularValues()(0);
  ShootingSolution grow = shoot(V, ShootSide::right, lambda,
                                lambda > 0 ? Vec2c(0, 1) : Vec2c(1, 0), o.X, left.step);
  double g0 = grow.at(grow.x.size() - 1).norm();
  s.secular_growth = std::max(grow.c1.cwiseAbs().maxCoeff(), grow.c2.cwiseAbs().maxCoeff()) / g0;
  s.dimension = (!s.trivial && s.singular_ratio < 1e-6) ? 1 : 0;
  return s;
}

int count_sign_changes(const Eigen::VectorXd& f) {
  int count = 0;
  double last = 0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    if (f(i) == 0) continue;
    if (last != 0 && (f(i) > 0) != (last > 0)) ++count;
    last = f(i);
  }
  return count;
}

KneserResult kneser_check(const std::function<double(double)>& q1, double R, double R_max,
                          int samples) {
  if (!(R > 0) || !(R_max > R)) throw DomainError("kneser_check: need 0 < R < R_max");
  double sup = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= samples; ++i) {
    double x = R + (R_max - R) * i / samples;
    sup = std::max({sup, x * x * q1(x), x * x * q1(-x)});
  }
  return {sup, sup < 0.25};
}

KneserResult kneser_check(const ModelParams& P, double lambda, double R, double R_max) {
  if (R_max <= 0) R_max = R + 80 / (P.p * P.kappa);
  auto q = [&](double x, double s) {
    double M = M_profile(P, x);
    return lambda - M * M - s * M_prime(P, x);
  };
  KneserResult a = kneser_check([&](double x) { return q(x, 1.0); }, R, R_max);
  KneserResult b = kneser_check([&](double x) { return q(x, -1.0); }, R, R_max);
  double sup = std::max(a.sup_value, b.sup_value);
  return {sup, sup < 0.25};
}

int schrodinger_threshold_zero_count(const ModelParams& P, SchrodingerSign sign, double L,
                                     Eigen::Index n) {
  Grid g = build_grid(L, n);
  const double s = sign == SchrodingerSign::minus ? -1.0 : 1.0;
  const double m2 = P.m * P.m;
  Eigen::VectorXd y(n);
  y(n - 1) = 1;
  y(n - 2) = 1;
  for (Eigen::Index i = n - 2; i >= 1; --i) {
    double x = g.nodes(i);
    double M = M_profile(P, x);
    double V = M * M + s * M_prime(P, x);
    y(i - 1) = 2 * y(i) - y(i + 1) + g.h * g.h * (V - m2) * y(i);
    double big = std::max(std::abs(y(i - 1)), std::abs(y(i)));
    if (big > 1e100) y.segment(i - 1, n - i + 1) /= big;
  }
  return count_sign_changes(y);
}

}  // namespace diracgap
