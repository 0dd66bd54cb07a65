#pragma once

#include <string>
#include <utility>
#include <vector>

namespace povmround {

struct BarrierSettings {
  double mu0_scale = 1.0;
  double mu_shrink = 0.25;
  // Stationarity target on the Frobenius norm of the barrier gradient.
  double newton_tol = 1e-9;
  // Relative: the effective gap target is gap_tol * max(1, sum_i Tr a_i).
  double gap_tol = 1e-6;
  int max_iters = 200;
};

/// Numerical thresholds shared by every operation.
///
/// cluster_tol and rank_tol are relative: eigenvalues are grouped with the
/// absolute gap cluster_tol * max(1, spectral radius), and singular values
/// below rank_tol * (largest singular value) count as zero.
struct Tolerances {
  double cluster_tol = 1e-8;
  double rank_tol = 1e-10;
  double psd_tol = 1e-9;
  double cert_tol = 1e-9;
  BarrierSettings barrier;

  /// Throws ValidationError unless every entry is positive and mu_shrink < 1.
  void validate() const;

  /// Sets one entry by key; throws ValidationError on unknown keys.
  void set(const std::string& key, double value);

  /// Applies a comma-separated "key=val,key=val" list.
  void apply_overrides(const std::string& list);

  /// All entries in a fixed order, for reports.
  std::vector<std::pair<std::string, double>> entries() const;
};

}  // namespace povmround
