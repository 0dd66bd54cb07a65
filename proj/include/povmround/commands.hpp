#pragma once

// Command-line front end: dispatch, reports, exit codes and the sweep driver.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "povmround/checks.hpp"
#include "povmround/generators.hpp"
#include "povmround/serialization.hpp"
#include "povmround/tolerances.hpp"

namespace povmround {

enum ExitCode : int {
  kExitPass = 0,
  kExitBoundViolation = 1,
  kExitUsage = 2,
  kExitSolver = 3,
};

struct SweepRow {
  std::uint64_t seed = 0;
  std::vector<int> dims;
  int n = 0;
  std::string state;
  double defect = 0.0;
  double error = 0.0;
  double ratio = 0.0;
  double bound_9eps_margin = 0.0;
  double runtime_ms = 0.0;
  std::vector<Check> checks;
  /// Set when the instance raised instead of producing a report.
  std::string failure;
};

/// Rows are in seed order base_seed, base_seed + 1, ... regardless of jobs.
std::vector<SweepRow> run_sweep(std::uint64_t base_seed, int count, const SweepRanges& ranges,
                                const Tolerances& tol, int jobs);

/// seed,dims,n,defect,error,ratio,bound_9eps_margin,runtime_ms
std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Parses argv, runs the command and returns the process exit code. The
/// report goes to --out when given and to `out` otherwise; diagnostics go to
/// `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace povmround
