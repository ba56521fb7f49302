#include <cstdio>

#include <json.hpp>

#include "diracgap/experiments.hpp"

namespace diracgap {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const std::vector<SweepRecord>& records, std::ostream& out) {
  out << "p,omega,mu,lambda_extra,threshold_distance,L,n,residual,flag\n";
  for (const auto& r : records) {
    out << format_double(r.p) << ',' << format_double(r.omega) << ',' << format_double(r.mu)
        << ',' << (r.lambda_extra ? format_double(*r.lambda_extra) : "") << ','
        << (r.threshold_distance ? format_double(*r.threshold_distance) : "") << ','
        << format_double(r.L) << ',' << r.n << ',' << format_double(r.residual) << ','
        << r.flag << '\n';
  }
}

void write_json(const std::vector<SweepRecord>& records, std::ostream& out) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["p"] = r.p;
    j["omega"] = r.omega;
    j["mu"] = r.mu;
    j["lambda_extra"] = r.lambda_extra ? nlohmann::ordered_json(*r.lambda_extra) : nullptr;
    j["threshold_distance"] =
        r.threshold_distance ? nlohmann::ordered_json(*r.threshold_distance) : nullptr;
    j["L"] = r.L;
    j["n"] = r.n;
    j["residual"] = r.residual;
    j["flag"] = r.flag;
    arr.push_back(std::move(j));
  }
  out << arr.dump(2) << '\n';
}

}  // namespace diracgap
