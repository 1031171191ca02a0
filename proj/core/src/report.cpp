#include <cmath>
#include <cstdio>

#include "spca/methods.hpp"

namespace spca {

namespace {

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json SolveResult::to_json(bool with_time) const {
  nlohmann::json j;
  j["lb"] = primal_lb;
  j["ub"] = dual_ub;
  j["gap"] = finite_or_null(gap);
  j["nodes"] = nodes;
  j["seconds"] = with_time ? nlohmann::json(wall_time) : nlohmann::json(nullptr);
  j["status"] = to_string(status);
  j["lambda"] = lambda;
  j["lambda_bar"] = lambda_bar ? nlohmann::json(*lambda_bar) : nlohmann::json(nullptr);
  j["i1_size"] = i1_size;
  j["variant"] = variant;
  j["perturbed"] = perturbed;
  j["degraded"] = degraded;
  j["ub_history"] = ub_history;
  j["envelope_slack"] = envelope_slack;
  if (l1_lb) j["l1_lb"] = *l1_lb;
  j["support"] = incumbent.support;
  std::vector<double> x(incumbent.x.data(), incumbent.x.data() + incumbent.x.size());
  j["x"] = x;
  return j;
}

std::string csv_header() { return "case,method,preset,k,seed,lb,ub,gap,seconds,status"; }

std::string csv_row(const std::string& case_name, const std::string& preset_name, int k, std::uint64_t seed,
                    const SolveResult& r, bool with_time) {
  std::string row = case_name + "," + r.variant + "," + preset_name + "," + std::to_string(k) + "," +
                    std::to_string(seed) + "," + fmt(r.primal_lb) + "," + fmt(r.dual_ub) + "," + fmt(r.gap) + ",";
  if (with_time) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", r.wall_time);
    row += buf;
  }
  return row + "," + to_string(r.status);
}

}  // namespace spca
