#include "povmround/tolerances.hpp"

#include <cmath>
#include <sstream>

#include "povmround/checks.hpp"
#include "povmround/errors.hpp"

namespace povmround {

void Tolerances::validate() const {
  for (const auto& [key, value] : entries()) {
    if (!(value > 0.0) || !std::isfinite(value))
      throw ValidationError("tolerance '" + key + "' must be positive and finite");
  }
  if (!(barrier.mu_shrink < 1.0)) throw ValidationError("tolerance 'mu_shrink' must lie in (0,1)");
}

void Tolerances::set(const std::string& key, double value) {
  if (key == "cluster_tol") cluster_tol = value;
  else if (key == "rank_tol") rank_tol = value;
  else if (key == "psd_tol") psd_tol = value;
  else if (key == "cert_tol") cert_tol = value;
  else if (key == "mu0_scale") barrier.mu0_scale = value;
  else if (key == "mu_shrink") barrier.mu_shrink = value;
  else if (key == "newton_tol") barrier.newton_tol = value;
  else if (key == "gap_tol") barrier.gap_tol = value;
  else if (key == "max_iters") {
    if (value != std::floor(value)) throw ValidationError("tolerance 'max_iters' must be an integer");
    barrier.max_iters = static_cast<int>(value);
  } else {
    throw ValidationError("unknown tolerance key '" + key + "'");
  }
}

void Tolerances::apply_overrides(const std::string& list) {
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ValidationError("malformed tolerance override '" + item + "'");
    std::string key = item.substr(0, eq);
    std::string val = item.substr(eq + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(val, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != val.size() || val.empty())
      throw ValidationError("malformed tolerance value in '" + item + "'");
    set(key, v);
  }
}

std::vector<std::pair<std::string, double>> Tolerances::entries() const {
  return {{"cluster_tol", cluster_tol},
          {"rank_tol", rank_tol},
          {"psd_tol", psd_tol},
          {"cert_tol", cert_tol},
          {"mu0_scale", barrier.mu0_scale},
          {"mu_shrink", barrier.mu_shrink},
          {"newton_tol", barrier.newton_tol},
          {"gap_tol", barrier.gap_tol},
          {"max_iters", static_cast<double>(barrier.max_iters)}};
}

Check Check::at_most(std::string name, double measured, double threshold) {
  return Check{std::move(name), measured, threshold, true, measured <= threshold};
}

Check Check::at_least(std::string name, double measured, double threshold) {
  return Check{std::move(name), measured, threshold, false, measured >= threshold};
}

bool all_passed(const std::vector<Check>& checks) {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

std::string first_failure(const std::vector<Check>& checks) {
  for (const auto& c : checks)
    if (!c.passed) return c.name;
  return {};
}

}  // namespace povmround
