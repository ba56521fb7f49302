#ifndef DIRACGAP_EXPERIMENTS_HPP
#define DIRACGAP_EXPERIMENTS_HPP

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "diracgap/model.hpp"

namespace diracgap {

/// One sweep point. lambda_extra is in the A-frame.
struct SweepRecord {
  double p = 0;
  double omega = 0;
  double mu = 0;
  std::optional<double> lambda_extra;
  std::optional<double> threshold_distance;  // m - lambda_extra
  double L = 0;
  Eigen::Index n = 0;
  double residual = 0;
  std::string flag = "ok";
};

struct ResolutionPolicy {
  double L_min = 0;            // 0: 40/kappa
  double L_max = 2000;
  double h_max = 0.05;
  double C = 1.0;              // d_est = C (1-p)^2 before calibration
  Eigen::Index n_max = 400000;
  bool calibrate = true;
  bool refine_check = true;    // recompute at 2n and apply the 10% rule
};

struct GridChoice {
  double L;
  Eigen::Index n;
  bool capped;  // the policy wanted more nodes than n_max
};

/// Grid for an A-frame solve at p given the estimated threshold distance.
GridChoice choose_grid(const ModelParams& P, double d_est, const ResolutionPolicy& pol);

/// One record per p, in input order.
std::vector<SweepRecord> sweep_p(const ModelParams& base, const std::vector<double>& p_list,
                                 ResolutionPolicy policy = {});

/// A single A-frame solve on a given grid.
SweepRecord solve_extra(const ModelParams& P, double L, Eigen::Index n);

struct RateFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
  double p_min = 0;
  double p_max = 0;
  int count = 0;
};

/// Least squares of log(threshold_distance) on log(1 - p) over resolved
/// records with p < 1.
RateFit fit_rate(const std::vector<SweepRecord>& records);

struct MuPoint {
  SweepRecord record;
  int count_lower = 0;   // eigenvalues of L_mu in (-m-w, -2w)
  int count_upper = 0;   // eigenvalues of L_mu in (-2w, m-w)
  Eigen::VectorXd eigenvalues;  // trusted, in (-m-w, m-w)
  double slope = 0;      // Hellmann-Feynman slope of the top eigenvalue
  double fd_slope = 0;
  bool slope_nonpositive = true;
  bool tracking_lost = false;
};

/// L_mu spectra for each mu on a grid of half-length L (0: default).
std::vector<MuPoint> sweep_mu(const ModelParams& P, const std::vector<double>& mu_list,
                              double L = 0, Eigen::Index n = 4096);

struct SelftestOptions {
  double g_scale = 1.0;   // fault injection: multiplies g in the M check
  Eigen::Index n = 2048;  // base resolution of the refinement-order check
};

struct SelftestCheck {
  std::string name;
  double value;
  double tolerance;
  bool pass;
};

struct SelftestReport {
  std::vector<SelftestCheck> checks;
  bool all_pass() const;
};

SelftestReport selftest(const SelftestOptions& opt = {});

/// Pool size: DIRACGAP_WORKERS if set and positive, else hardware threads.
unsigned worker_count();

/// Runs f(0..count-1) on a bounded pool; results are written by index.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& f);

/// Fixed header: p,omega,mu,lambda_extra,threshold_distance,L,n,residual,flag
void write_csv(const std::vector<SweepRecord>& records, std::ostream& out);
void write_json(const std::vector<SweepRecord>& records, std::ostream& out);

/// %.17g, so output is byte-stable.
std::string format_double(double v);

}  // namespace diracgap

#endif
