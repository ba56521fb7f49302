#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "diracgap/closed_forms.hpp"
#include "diracgap/discretization.hpp"
#include "diracgap/errors.hpp"
#include "diracgap/experiments.hpp"
#include "diracgap/minmax.hpp"
#include "diracgap/spectral.hpp"
#include "diracgap/threshold.hpp"

using namespace diracgap;
using json = nlohmann::ordered_json;

namespace {

struct Common {
  double m = 1.0;
  double omega = 0.5;
  double p = 1.0;
  double mu = 0.0;
  double xmax = 0.0;
  long n = 4096;
  std::string out;
  std::string format = "csv";
  std::string plot;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--m", c.m, "mass");
  app->add_option("--omega", c.omega, "frequency, 0 < omega < m");
  app->add_option("--p", c.p, "nonlinearity exponent");
  app->add_option("--mu", c.mu, "coupling of Q");
  app->add_option("--xmax", c.xmax, "half-length of the domain (0: default)");
  app->add_option("--n", c.n, "number of grid nodes");
  app->add_option("--out", c.out, "output file (default stdout)");
  app->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app->add_option("--emit-plot-data", c.plot, "write x,y columns to this file");
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw DomainError("cannot open " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::string fd(double v) { return format_double(v); }

void write_plot(const std::string& path, const std::vector<std::pair<double, double>>& xy) {
  if (path.empty()) return;
  std::ofstream f(path);
  if (!f) throw DomainError("cannot open " + path);
  f << "x,y\n";
  for (const auto& [x, y] : xy) f << fd(x) << ',' << fd(y) << '\n';
}

// Emits a table with a fixed column list as CSV or as a JSON array of objects.
void emit_table(std::ostream& out, const std::string& format,
                const std::vector<std::string>& cols,
                const std::vector<std::vector<std::string>>& rows) {
  if (format == "json") {
    json arr = json::array();
    for (const auto& r : rows) {
      json o;
      for (std::size_t k = 0; k < cols.size(); ++k) {
        const std::string& s = r[k];
        char* end = nullptr;
        double v = std::strtod(s.c_str(), &end);
        if (!s.empty() && end && *end == '\0') o[cols[k]] = v;
        else if (s.empty()) o[cols[k]] = nullptr;
        else o[cols[k]] = s;
      }
      arr.push_back(std::move(o));
    }
    out << arr.dump(2) << '\n';
    return;
  }
  for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.size(); ++k) out << (k ? "," : "") << r[k];
    out << '\n';
  }
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      v.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw DomainError("bad list entry: " + item);
    }
  }
  if (v.empty()) throw DomainError("empty list");
  return v;
}

ModelParams params(const Common& c) { return make_params(c.m, c.omega, c.p, c.mu); }

int run_profiles(const Common& c) {
  ModelParams P = params(c);
  double X = c.xmax > 0 ? c.xmax : 20 / (P.p * P.kappa);
  const long n = std::max<long>(c.n, 2);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::pair<double, double>> plot;
  for (long i = 0; i < n; ++i) {
    double x = -X + 2 * X * static_cast<double>(i) / static_cast<double>(n - 1);
    Spinor<double> phi = solitary_wave(P, x);
    std::vector<std::string> r{fd(x), fd(g_profile(P, x)), fd(potential_W(P, x)),
                               fd(M_profile(P, x)), fd(M_prime(P, x)), fd(phi(0)),
                               fd(phi(1))};
    if (P.p == 1) {
      Spinor<double> psi = resonance_state(P, x);
      r.push_back(fd(psi(0)));
      r.push_back(fd(psi(1)));
    } else {
      r.push_back("");
      r.push_back("");
    }
    rows.push_back(std::move(r));
    plot.emplace_back(x, M_profile(P, x));
  }
  Output out(c.out);
  emit_table(out.stream(), c.format, {"x", "g", "W", "M", "M_prime", "v", "u", "psi_inf_1", "psi_inf_2"},
             rows);
  write_plot(c.plot, plot);
  return 0;
}

int run_spectrum(const Common& c, const std::string& kind, const std::string& dump) {
  ModelParams P = params(c);
  DiscreteOperator op;
  OperatorKind k = kind == "A" ? OperatorKind::A_p : OperatorKind::L_mu;
  double L = c.xmax > 0 ? c.xmax : default_half_length(P, k);
  Grid g = build_grid(L, c.n);
  if (kind == "A") op = assemble_A(P, g);
  else if (kind == "L") op = assemble_Lmu(P, g);
  else if (kind == "schrodinger-minus") op = assemble_schrodinger(P, g, SchrodingerSign::minus);
  else op = assemble_schrodinger(P, g, SchrodingerSign::plus);
  if (op.domain_warning)
    std::cerr << "warning: the potential is not negligible at the domain edge\n";
  if (!dump.empty()) {
    std::ofstream f(dump);
    if (!f) throw DomainError("cannot open " + dump);
    dump_triplets(op, f);
  }
  SpectrumReport rep = gap_eigs(op);
  std::vector<std::vector<std::string>> rows;
  for (Eigen::Index i = 0; i < rep.eigenvalues.size(); ++i)
    rows.push_back({fd(rep.eigenvalues(i)), fd(rep.residuals(i)), to_string(rep.parities[i]),
                    rep.suspect[i] ? "1" : "0", fd(g.half_length), std::to_string(g.n),
                    to_string(op.kind)});
  Output out(c.out);
  emit_table(out.stream(), c.format,
             {"eigenvalue", "residual", "parity", "suspect", "L", "n", "operator"}, rows);
  if (!c.plot.empty() && rep.eigenvalues.size() > 0) {
    Eigen::Index top = rep.eigenvalues.size() - 1;
    std::vector<std::pair<double, double>> xy;
    const Eigen::VectorXd& v = rep.eigenvectors[top];
    if (op.spinor()) {
      for (Eigen::Index i = 0; i < g.n; ++i)
        xy.emplace_back(g.nodes(i), v(2 * i) * v(2 * i) + v(2 * i + 1) * v(2 * i + 1));
    } else {
      for (Eigen::Index i = 0; i < g.n; ++i) xy.emplace_back(g.nodes(i), v(i) * v(i));
    }
    write_plot(c.plot, xy);
  }
  return 0;
}

void emit_records(const Common& c, const std::vector<SweepRecord>& recs) {
  Output out(c.out);
  if (c.format == "json") write_json(recs, out.stream());
  else write_csv(recs, out.stream());
}

int run_sweep_p(const Common& c, const std::string& list) {
  ModelParams P = params(c);
  ResolutionPolicy pol;
  if (c.xmax > 0) pol.L_min = c.xmax;
  std::vector<SweepRecord> recs = sweep_p(P, parse_list(list), pol);
  emit_records(c, recs);
  std::vector<std::pair<double, double>> xy;
  for (const auto& r : recs)
    if (r.threshold_distance) xy.emplace_back(1 - r.p, *r.threshold_distance);
  write_plot(c.plot, xy);
  try {
    RateFit f = fit_rate(recs);
    std::cerr << "rate fit: slope " << fd(f.slope) << " intercept " << fd(f.intercept)
              << " r2 " << fd(f.r_squared) << " over p in [" << f.p_min << ", " << f.p_max
              << "], " << f.count << " records\n";
  } catch (const DomainError& e) {
    std::cerr << "rate fit skipped: " << e.what() << '\n';
  }
  return 0;
}

int run_sweep_mu(const Common& c, const std::string& list) {
  ModelParams P = params(c);
  std::vector<MuPoint> pts = sweep_mu(P, parse_list(list), c.xmax, c.n);
  std::vector<SweepRecord> recs;
  std::vector<std::pair<double, double>> xy;
  std::cerr << "mu,count_lower,count_upper,hf_slope,fd_slope,flag\n";
  for (const auto& pt : pts) {
    recs.push_back(pt.record);
    std::cerr << fd(pt.record.mu) << ',' << pt.count_lower << ',' << pt.count_upper << ','
              << fd(pt.slope) << ',' << fd(pt.fd_slope) << ',' << pt.record.flag << '\n';
    if (pt.eigenvalues.size() > 0) xy.emplace_back(pt.record.mu, pt.eigenvalues.maxCoeff());
  }
  emit_records(c, recs);
  write_plot(c.plot, xy);
  return 0;
}

int run_threshold(const Common& c, const std::string& potential, const std::string& which) {
  ModelParams P = params(c);
  MatrixPotential V = potential.empty() ? MatrixPotential::soler(P)
                                        : load_potential_csv(potential, P.m);
  ShootOptions opt;
  opt.X = c.xmax;
  std::vector<double> lambdas;
  if (which == "plus" || which == "both") lambdas.push_back(V.mass());
  if (which == "minus" || which == "both") lambdas.push_back(-V.mass());
  std::vector<std::vector<std::string>> rows;
  std::vector<std::pair<double, double>> xy;
  for (double lam : lambdas) {
    ThresholdReport r = analyze_threshold(V, lam, opt);
    SimplicityResult s = simplicity_check(V, lam, opt);
    rows.push_back({fd(lam), to_string(r.classification), fd(std::abs(r.l_minus)),
                    fd(std::abs(r.l_plus)), fd(r.decay_exponent), fd(r.decay_r2),
                    fd(r.wronskian_drift), fd(r.match_determinant), std::to_string(s.dimension),
                    fd(r.X), fd(r.step), V.label()});
    if (xy.empty())
      for (Eigen::Index i = 0; i < r.x.size(); ++i)
        xy.emplace_back(r.x(i), std::norm(r.c1(i)) + std::norm(r.c2(i)));
  }
  Output out(c.out);
  emit_table(out.stream(), c.format,
             {"lambda", "classification", "l_minus", "l_plus", "decay_exponent", "decay_r2",
              "wronskian_drift", "match_determinant", "dimension", "X", "step", "potential"},
             rows);
  write_plot(c.plot, xy);
  return 0;
}

int run_minmax(const Common& c, const std::string& eps_list, double alpha, bool dense) {
  ModelParams P = params(c);
  if (P.p != 1) throw DomainError("minmax: the trial-state bound is set up at p = 1");
  std::vector<std::vector<std::string>> rows;
  std::vector<std::pair<double, double>> xy;
  for (double eps : parse_list(eps_list)) {
    Grid g = minmax_grid(P, eps, alpha);
    if (c.xmax > 0) g = build_grid(c.xmax, c.n);
    DiscreteOperator A1 = assemble_A(P, g);
    MinMaxReport r = dense ? gamma_bound_dense(A1, eps, alpha) : gamma_bound(A1, eps, alpha);
    ThirdLevelCheck t = third_level_check(A1, eps);
    rows.push_back({fd(eps), fd(r.delta), fd(alpha), fd(r.gamma0), fd(r.gamma1_upper),
                    fd(r.drop), fd(r.drop / (eps * r.delta)), fd(r.lambda_lower_check),
                    fd(r.domain_factor), fd(t.gamma2), fd(t.margin), fd(g.half_length),
                    std::to_string(g.n)});
    xy.emplace_back(eps, r.drop);
  }
  Output out(c.out);
  emit_table(out.stream(), c.format,
             {"epsilon", "delta", "alpha", "gamma0", "gamma1_upper", "drop", "drop_over_eps_delta",
              "projector_check", "L_delta", "gamma2", "gamma2_margin", "L", "n"},
             rows);
  write_plot(c.plot, xy);
  return 0;
}

int run_selftest(const Common& c, double g_scale, long n) {
  SelftestOptions opt;
  opt.g_scale = g_scale;
  opt.n = n;
  SelftestReport rep = selftest(opt);
  std::vector<std::vector<std::string>> rows;
  for (const auto& ch : rep.checks)
    rows.push_back({ch.name, fd(ch.value), fd(ch.tolerance), ch.pass ? "PASS" : "FAIL"});
  Output out(c.out);
  emit_table(out.stream(), c.format, {"check", "value", "tolerance", "status"}, rows);
  return rep.all_pass() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral gap and threshold analysis of linearized 1D Dirac operators"};
  app.require_subcommand(1);
  Common c;

  auto* profiles = app.add_subcommand("profiles", "tabulate g, W, M, M', the solitary wave");
  add_common(profiles, c);

  std::string kind = "A", dump;
  auto* spectrum = app.add_subcommand("spectrum", "gap eigenvalues of a discretized operator");
  add_common(spectrum, c);
  spectrum->add_option("--operator", kind, "A, L, schrodinger-minus or schrodinger-plus")
      ->check(CLI::IsMember({"A", "L", "schrodinger-minus", "schrodinger-plus"}));
  spectrum->add_option("--dump-matrix", dump, "write matrix triplets to this file");

  std::string p_list = "0.8,0.85,0.9,0.95";
  auto* sp = app.add_subcommand("sweep-p", "extra gap eigenvalue against p");
  add_common(sp, c);
  sp->add_option("--p-list", p_list, "comma separated p values");

  std::string mu_list = "0,0.5,1,2";
  auto* sm = app.add_subcommand("sweep-mu", "L_mu eigenvalue counts against mu");
  add_common(sm, c);
  sm->add_option("--mu-list", mu_list, "comma separated mu values");

  std::string potential, which = "both";
  auto* th = app.add_subcommand("threshold", "classify threshold solutions");
  add_common(th, c);
  th->add_option("--potential", potential, "CSV potential (default: Soler linearization)");
  th->add_option("--lambda", which, "plus, minus or both")
      ->check(CLI::IsMember({"plus", "minus", "both"}));

  std::string eps_list = "0.02,0.01";
  double alpha = 0.25;
  bool dense = false;
  auto* mm = app.add_subcommand("minmax", "min-max bound for the perturbed operator");
  add_common(mm, c);
  mm->add_option("--eps", eps_list, "comma separated epsilon values");
  mm->add_option("--alpha", alpha, "delta = eps^(1 + 2 alpha)");
  mm->add_flag("--dense", dense, "use the dense compression");

  double g_scale = 1.0;
  long st_n = 2048;
  auto* st = app.add_subcommand("selftest", "run the identity suite");
  add_common(st, c);
  st->add_option("--fault-g-scale", g_scale, "multiply g in the M check");
  st->add_option("--refine-n", st_n, "base resolution of the refinement check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c.n < 16 || c.n % 2) throw DomainError("--n must be even and at least 16");
    if (*profiles) return run_profiles(c);
    if (*spectrum) return run_spectrum(c, kind, dump);
    if (*sp) return run_sweep_p(c, p_list);
    if (*sm) return run_sweep_mu(c, mu_list);
    if (*th) return run_threshold(c, potential, which);
    if (*mm) return run_minmax(c, eps_list, alpha, dense);
    if (*st) return run_selftest(c, g_scale, st_n);
  } catch (const DomainError& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return 2;
  } catch (const AssumptionViolation& e) {
    std::cerr << "assumption violated: " << e.what() << '\n';
    return 4;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
