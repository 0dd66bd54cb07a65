#pragma once

// Minimal trace majorant of a family of positive functionals and the dual
// POVM, computed with a log-det barrier method.

#include <vector>

#include "povmround/algebra.hpp"
#include "povmround/checks.hpp"
#include "povmround/tolerances.hpp"

namespace povmround {

/// Positive functionals x -> sum_k Tr((a_i)_k x_k).
struct FunctionalFamily {
  std::vector<AlgebraElement> elements;
  std::size_t size() const { return elements.size(); }
  const AlgebraElement& operator[](std::size_t i) const { return elements[i]; }
};

struct MajorantResiduals {
  double feasibility = 0.0;     // min_i lambda_min(z - a_i)
  double povm_sum = 0.0;        // ||sum_i t_i - 1||_F
  double slackness = 0.0;       // max_i ||t_i (z - a_i)||_F
  double reconstruction = 0.0;  // ||z - sum_i t_i a_i||_F
};

struct MajorantSolution {
  AlgebraElement z;
  std::vector<AlgebraElement> t;
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double mu_final = 0.0;
  MajorantResiduals residuals;
  int newton_steps = 0;
  /// max_k ||1 - mu sum_i (z_k - a_ik)^{-1}||_F at the last centering.
  double stationarity = 0.0;
  /// Effective absolute gap target.
  double gap_tol = 0.0;
};

/// Throws PreconditionError for an empty family or a non-PSD element.
void require_valid_family(const BlockAlgebra& alg, const FunctionalFamily& f, const Tolerances& tol);

/// max(1, sum_i Tr a_i).
double majorant_scale(const FunctionalFamily& f);

/// Validates the family like require_valid_family; throws SolverError when a
/// centering step fails to converge.
MajorantSolution minimal_majorant(const BlockAlgebra& alg, const FunctionalFamily& f, const Tolerances& tol);

/// Recomputes primal, dual, gap and residuals from z and t.
void recompute(const BlockAlgebra& alg, const FunctionalFamily& f, MajorantSolution& sol);

/// Pure verification: feasibility, dual positivity, POVM sum, gap window,
/// slackness and reconstruction.
std::vector<Check> verify_majorant_certificate(const BlockAlgebra& alg, const FunctionalFamily& f,
                                               const MajorantSolution& sol, const Tolerances& tol);

/// Exact solution for entrywise diagonal families: z is the entrywise maximum,
/// t_i the indicator of the coordinates where i attains it (lowest index wins).
MajorantSolution commuting_majorant_oracle(const BlockAlgebra& alg, const FunctionalFamily& f);

}  // namespace povmround
