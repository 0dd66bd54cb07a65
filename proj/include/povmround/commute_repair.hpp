#pragma once

// Almost-commuting PVM pairs: the commutation defect, its exact splitting
// through the compressed POVM, repair to an exactly commuting PVM, and the
// correspondence between n-output PVMs and unitaries of order n.

#include <vector>

#include "povmround/algebra.hpp"
#include "povmround/checks.hpp"
#include "povmround/orthogonalizer.hpp"

namespace povmround {

/// sum_{i,j} ||p_i q_j - q_j p_i||_phi^2
double commutation_defect(const State& phi, const Pvm& p, const Pvm& q);

/// The commutant of a PVM (q_j): the block algebra sum_j q_j M q_j, with one
/// block per (ambient block, j) of nonzero rank.
struct CommutantAlgebra {
  BlockAlgebra ambient{std::vector<int>{1}};
  BlockAlgebra algebra{std::vector<int>{1}};
  std::vector<std::size_t> parent;  // ambient block of each compressed block
  std::vector<std::size_t> label;   // index j of the reference projection
  std::vector<Matrix> basis;        // orthonormal range basis of q_j in its ambient block

  /// x -> (B_j^* x B_j)_j
  AlgebraElement compress(const AlgebraElement& x) const;
  /// y -> sum_j B_j y_j B_j^*
  AlgebraElement expand(const AlgebraElement& y) const;
  State restrict(const State& phi, const Tolerances& tol) const;
};

/// Throws PreconditionError unless q is a valid PVM.
CommutantAlgebra commutant_of(const BlockAlgebra& alg, const Pvm& q, const Tolerances& tol);

struct CompressedPovm {
  CommutantAlgebra commutant;
  /// a_i = sum_j q_j p_i q_j in commutant coordinates.
  Povm a;
  State phi_restricted;
  /// The same POVM in ambient coordinates.
  Povm a_ambient;
  double commutation_defect = 0.0;
  /// sum_i ||p_i - a_i||_phi^2
  double distance_sq = 0.0;
  /// 1 - phi(sum_i a_i^2)
  double povm_defect = 0.0;
  /// |commutation_defect - distance_sq - povm_defect|
  double identity_residual = 0.0;
  /// Im sum_i phi(a_i p_i)
  double imaginary_part = 0.0;
};

CompressedPovm compress_povm(const BlockAlgebra& alg, const Pvm& p, const Pvm& q, const State& phi,
                             const Tolerances& tol);

struct RepairReport {
  double epsilon_c = 0.0;
  OrthReport inner;
  Pvm pvm_repaired;
  /// sum_i ||p_i - p'_i||_phi^2
  double error = 0.0;
  double identity_residual = 0.0;
  /// max_{i,j} ||[p'_i, q_j]||_F
  double commutator_residual = 0.0;
  CompressedPovm compressed;
};

RepairReport repair(const BlockAlgebra& alg, const State& phi, const Pvm& p, const Pvm& q, const Tolerances& tol);

std::vector<Check> certify(const BlockAlgebra& alg, const RepairReport& report, const Tolerances& tol);

/// u = sum_{k=1}^n exp(2 i pi k / n) p_k
AlgebraElement pvm_to_unitary(const BlockAlgebra& alg, const Pvm& p, const Tolerances& tol);

/// p_j = (1/n) sum_{k=1}^n exp(-2 i pi j k / n) u^k, j = 1..n.
Pvm unitary_to_pvm(const BlockAlgebra& alg, const AlgebraElement& u, int n, const Tolerances& tol);

struct UnitaryRepair {
  AlgebraElement v_prime;
  /// (1/nm) sum_{i<=n, j<=m} ||u^i v^j - v^j u^i||_phi^2
  double lhs = 0.0;
  /// (1/m) sum_{j<=m} ||v^j - v'^j||_phi^2
  double rhs_error = 0.0;
  /// ||[v', u]||_F
  double commutator_residual = 0.0;
  RepairReport repair;
};

UnitaryRepair repair_unitary_pair(const BlockAlgebra& alg, const State& phi, const AlgebraElement& u, int n,
                                  const AlgebraElement& v, int m, const Tolerances& tol);

std::vector<Check> certify(const UnitaryRepair& report, const Tolerances& tol);

}  // namespace povmround
