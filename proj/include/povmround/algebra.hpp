#pragma once

// Finite-dimensional von Neumann algebras represented as direct sums of full
// complex matrix blocks, their elements, normal states and measurements.

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "povmround/tolerances.hpp"

namespace povmround {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// The algebra M_{d_1}(C) + ... + M_{d_K}(C).
class BlockAlgebra {
 public:
  explicit BlockAlgebra(std::vector<int> dims);

  std::size_t num_blocks() const { return dims_.size(); }
  int dim(std::size_t k) const { return dims_[k]; }
  const std::vector<int>& dims() const { return dims_; }
  int total_dim() const;

  bool operator==(const BlockAlgebra&) const = default;

 private:
  std::vector<int> dims_;
};

/// An element of a BlockAlgebra: one square matrix per central block.
class AlgebraElement {
 public:
  AlgebraElement() = default;
  explicit AlgebraElement(std::vector<Matrix> blocks) : blocks_(std::move(blocks)) {}

  static AlgebraElement zero(const BlockAlgebra& alg);
  static AlgebraElement identity(const BlockAlgebra& alg);
  static AlgebraElement scalar(const BlockAlgebra& alg, Complex c);

  std::size_t num_blocks() const { return blocks_.size(); }
  const Matrix& block(std::size_t k) const { return blocks_[k]; }
  Matrix& block(std::size_t k) { return blocks_[k]; }
  const std::vector<Matrix>& blocks() const { return blocks_; }

  bool conforms_to(const BlockAlgebra& alg) const;

  AlgebraElement adjoint() const;
  /// (x + x^*) / 2.
  AlgebraElement hermitian_part() const;

  AlgebraElement& operator+=(const AlgebraElement& other);
  AlgebraElement& operator-=(const AlgebraElement& other);
  AlgebraElement& operator*=(Complex c);

 private:
  std::vector<Matrix> blocks_;
};

AlgebraElement operator+(AlgebraElement x, const AlgebraElement& y);
AlgebraElement operator-(AlgebraElement x, const AlgebraElement& y);
AlgebraElement operator*(const AlgebraElement& x, const AlgebraElement& y);
AlgebraElement operator*(Complex c, AlgebraElement x);

/// Throws StructuralError naming `what` when x does not fit alg.
void require_shape(const BlockAlgebra& alg, const AlgebraElement& x, const char* what);

/// sqrt(sum_k ||x_k||_F^2).
double frobenius_norm(const AlgebraElement& x);
/// max_k ||x_k||_F.
double max_block_frobenius(const AlgebraElement& x);
double max_abs_entry(const AlgebraElement& x);
/// Largest |entry| of x - x^*.
double hermiticity_residual(const AlgebraElement& x);
/// Smallest eigenvalue over all blocks of a Hermitian element.
double min_eigenvalue(const AlgebraElement& h);
double max_eigenvalue(const AlgebraElement& h);
double spectral_radius(const AlgebraElement& h);
/// sum_k Tr(x_k).
Complex trace(const AlgebraElement& x);

/// Applies f to the eigenvalues of a Hermitian element, blockwise.
template <class F>
AlgebraElement apply_spectral(const AlgebraElement& h, F&& f) {
  std::vector<Matrix> out;
  out.reserve(h.num_blocks());
  for (const Matrix& b : h.blocks()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(b);
    Eigen::VectorXd vals = es.eigenvalues();
    for (Eigen::Index i = 0; i < vals.size(); ++i) vals[i] = f(vals[i]);
    Matrix v = es.eigenvectors();
    Matrix r = v * vals.cast<Complex>().asDiagonal() * v.adjoint();
    out.push_back((r + r.adjoint()) / 2.0);
  }
  return AlgebraElement(std::move(out));
}

/// A normal state phi(x) = sum_k Tr(rho_k x_k).
class State {
 public:
  /// The unique state on the one-dimensional algebra C.
  State();

  /// Symmetrizes the densities and validates positivity and normalization.
  static State from_densities(const BlockAlgebra& alg, AlgebraElement rho,
                              const Tolerances& tol = {});
  static State normalized_trace(const BlockAlgebra& alg);
  /// The vector state x -> <x xi, xi> for xi = (xi_1, ..., xi_K), normalized.
  static State vector_state(const BlockAlgebra& alg, const std::vector<Vector>& xi);

  const BlockAlgebra& algebra() const { return alg_; }
  const AlgebraElement& density() const { return rho_; }
  const Matrix& density(std::size_t k) const { return rho_.block(k); }
  /// Hermiticity residual removed by symmetrization at construction.
  double symmetrization_residual() const { return sym_residual_; }

  Complex operator()(const AlgebraElement& x) const;

 private:
  State(BlockAlgebra alg, AlgebraElement rho, double sym_residual)
      : alg_(std::move(alg)), rho_(std::move(rho)), sym_residual_(sym_residual) {}

  BlockAlgebra alg_;
  AlgebraElement rho_;
  double sym_residual_ = 0.0;
};

/// A tuple of positive elements summing to the identity.
struct Povm {
  std::vector<AlgebraElement> elements;
  std::size_t size() const { return elements.size(); }
  const AlgebraElement& operator[](std::size_t i) const { return elements[i]; }
};

/// A POVM made of projections.
struct Pvm {
  std::vector<AlgebraElement> elements;
  std::size_t size() const { return elements.size(); }
  const AlgebraElement& operator[](std::size_t i) const { return elements[i]; }
  Povm as_povm() const { return Povm{elements}; }
};

/// Replaces every element by its Hermitian part.
Povm symmetrized(Povm a);
Pvm symmetrized(Pvm p);

struct PovmDiagnostics {
  bool is_valid = false;
  /// max(0, -lambda_min) over all elements and blocks.
  double max_negativity = 0.0;
  /// max(0, lambda_max - 1) over all elements and blocks.
  double max_excess = 0.0;
  /// Largest |entry| of sum_i a_i - 1.
  double sum_residual = 0.0;
  double hermiticity_residual = 0.0;
  /// max_i ||a_i^2 - a_i||_F; only meaningful for PVM validation.
  double idempotency_residual = 0.0;
};

/// Throws StructuralError on shape mismatch; otherwise reports.
PovmDiagnostics validate_povm(const BlockAlgebra& alg, const Povm& a, const Tolerances& tol);
PovmDiagnostics validate_pvm(const BlockAlgebra& alg, const Pvm& p, const Tolerances& tol);

/// Throws ValidationError describing the first violated invariant.
void require_valid_povm(const BlockAlgebra& alg, const Povm& a, const Tolerances& tol);
void require_valid_pvm(const BlockAlgebra& alg, const Pvm& p, const Tolerances& tol);

/// phi(x^* x).
double phi_norm_sq(const State& phi, const AlgebraElement& x);

/// 1 - phi(sum_i a_i^2).
double defect(const State& phi, const Povm& a);

/// One complex scalar per central block: c_k 1_{d_k}.
struct CenterValue {
  std::vector<Complex> values;
};

/// Blockwise normalized trace Tr(x_k) / d_k.
CenterValue center_valued_trace(const BlockAlgebra& alg, const AlgebraElement& x);

struct SpectralCluster {
  double value = 0.0;  // mean of the grouped eigenvalues
  Matrix basis;        // orthonormal columns spanning the eigenspace
};

/// Per block, clusters in order of decreasing eigenvalue.
struct SpectralClusters {
  std::vector<std::vector<SpectralCluster>> blocks;
};

/// Groups eigenvalues sorted in decreasing order; a new cluster starts when
/// the gap to the previous eigenvalue exceeds cluster_tol (absolute).
/// Throws ValidationError if h is not Hermitian within hermitian_tol.
SpectralClusters spectral_clusters(const AlgebraElement& h, double cluster_tol,
                                   double hermitian_tol = Tolerances{}.cert_tol);

/// cluster_tol * max(1, spectral radius of h).
double cluster_threshold(const Tolerances& tol, const AlgebraElement& h);

/// phi_norm_sq(phi, xy - yx).
double commutator_phi_norm_sq(const State& phi, const AlgebraElement& x, const AlgebraElement& y);

AlgebraElement commutator(const AlgebraElement& x, const AlgebraElement& y);

/// Orthonormal basis of the range of a (near-)projection: eigenvectors with
/// eigenvalue above 1/2, in order of decreasing eigenvalue.
Matrix range_basis(const Matrix& projection);

}  // namespace povmround
