#pragma once

// Rounding of almost-orthogonal POVMs to PVMs in a finite block algebra.

#include <vector>

#include "povmround/algebra.hpp"
#include "povmround/checks.hpp"
#include "povmround/tolerances.hpp"

namespace povmround {

/// Projections q_i commuting with a_i whose per-block ranks sum to the block
/// dimension, maximizing phi(sum_i q_i a_i).
struct SelectionResult {
  std::vector<AlgebraElement> q;
  /// phi(sum_i q_i a_i), real part.
  double value = 0.0;
  /// Sum of the selected scores: the optimum of the decoupled linear program.
  double lp_value = 0.0;
  /// ranks[k][i] = rank of q_i in central block k.
  std::vector<std::vector<int>> ranks;
  /// Number of scores below -cert_tol that were clipped to zero.
  int clipped_scores = 0;
  /// max_i ||q_i a_i - a_i q_i||_F.
  double commutator_residual = 0.0;
};

SelectionResult select_projections(const BlockAlgebra& alg, const State& phi, const Povm& a,
                                   const Tolerances& tol);

/// A map H -> H^n stored per central block as an (n d_k) x d_k matrix whose
/// i-th d_k x d_k row block is the i-th component.
struct BlockColumn {
  std::vector<Matrix> blocks;
  std::size_t outputs = 0;
};

/// Polar part of x completed to an isometry u with u^* u = 1 and
/// u u^* = diag(q_1, ..., q_n). Needs sum_i rank(q_i) = d_k on every block and
/// the columns of x inside the range of diag(q_i).
BlockColumn complete_polar(const BlockAlgebra& alg, const BlockColumn& x,
                           const std::vector<AlgebraElement>& q_range, const Tolerances& tol);

struct OrthCertificates {
  double idempotency = 0.0;        // max_i ||p_i^2 - p_i||_F
  double sum_to_one = 0.0;         // max |entry| of sum_i p_i - 1
  double midpoint = 0.0;           // max_i || |x| p_i |x| - q_i a_i ||_F
  double isometry = 0.0;           // max_k ||u^* u - 1||_F
  double range = 0.0;              // max_k ||u u^* - diag(q_i)||_F
  double polar = 0.0;              // max_k ||x - u |x|||_F
  double selection_commutator = 0.0;
  double sqrt_clip = 0.0;          // eigenvalue clipping applied before a_i^{1/2}
  // The three quantities bounding the error decomposition, each <= defect.
  double term_projection = 0.0;    // sum_i phi((1 - q_i) a_i^2)
  double term_modulus = 0.0;       // phi((1 - |x|)^2)
  double term_midpoint = 0.0;      // sum_i phi(q_i (a_i - a_i^2))
  double sum_squares = 0.0;        // phi(sum_i a_i^2)
};

struct OrthReport {
  double defect = 0.0;
  Pvm pvm;
  /// sum_i phi(|a_i - p_i|^2)
  double error = 0.0;
  /// error / defect; 0 when both vanish, +inf when only the defect does.
  double ratio = 0.0;
  SelectionResult selection;
  OrthCertificates certificates;
};

OrthReport orthogonalize(const BlockAlgebra& alg, const State& phi, const Povm& a,
                         const Tolerances& tol);

/// error / defect with the conventions of OrthReport::ratio.
double error_ratio(double error, double defect, double cert_tol);

/// The certified bounds of a report: the 9-defect bound, the converse
/// inequality, PVM validity, the midpoint identity and the selection rank sums.
std::vector<Check> certify(const BlockAlgebra& alg, const OrthReport& report, const Tolerances& tol);

/// The von Neumann algebra generated by a Hermitian family inside a block
/// algebra, identified as sum_k M_{d_k} (x) 1_{m_k} after a unitary change
/// of basis in every ambient block.
struct GeneratedAlgebra {
  BlockAlgebra ambient{std::vector<int>{1}};
  BlockAlgebra algebra{std::vector<int>{1}};
  std::vector<int> multiplicities;
  /// Ambient block hosting each generated block, and its column offset in W.
  std::vector<std::size_t> parent;
  std::vector<int> offset;
  /// Unitary W per ambient block; the copy j of basis vector r of generated
  /// block k sits in column offset[k] + r * m_k + j.
  std::vector<Matrix> change_of_basis;
  /// Basis of the commutant of the family (inside the ambient algebra).
  std::vector<AlgebraElement> commutant_basis;
  /// max_i ||W^* a_i W - embed((a_i)_k)||_F for the generating family.
  double residual = 0.0;

  /// x -> W (sum_k x_k (x) 1_{m_k}) W^*.
  AlgebraElement embed(const AlgebraElement& x) const;
  /// a -> ((a)_k)_k, averaging the m_k diagonal copies.
  AlgebraElement compress(const AlgebraElement& a) const;
  /// Restriction of phi: partial trace over the multiplicity index.
  State restrict(const State& phi, const Tolerances& tol) const;
};

GeneratedAlgebra decompose_generated_algebra(const BlockAlgebra& alg,
                                             const std::vector<AlgebraElement>& elements,
                                             const Tolerances& tol);

struct SymmetryPreservingReport {
  /// Rounding inside the generated algebra (its coordinates).
  OrthReport inner;
  GeneratedAlgebra generated;
  /// Output PVM, defect and error in ambient coordinates.
  Pvm pvm;
  double defect = 0.0;
  double error = 0.0;
  double ratio = 0.0;
  /// max over commutant basis elements b and outputs i of ||[b, p_i]||_F.
  double symmetry_residual = 0.0;
};

SymmetryPreservingReport orthogonalize_symmetry_preserving(const BlockAlgebra& alg, const State& phi,
                                                           const Povm& a, const Tolerances& tol);

std::vector<Check> certify(const BlockAlgebra& alg, const SymmetryPreservingReport& report,
                           const Tolerances& tol);

}  // namespace povmround
