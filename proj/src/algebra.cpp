#include "povmround/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "povmround/errors.hpp"

namespace povmround {

BlockAlgebra::BlockAlgebra(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw StructuralError("block algebra needs at least one block");
  for (int d : dims_)
    if (d < 1) throw StructuralError("block dimensions must be positive");
}

int BlockAlgebra::total_dim() const {
  int s = 0;
  for (int d : dims_) s += d;
  return s;
}

AlgebraElement AlgebraElement::zero(const BlockAlgebra& alg) {
  std::vector<Matrix> b;
  for (int d : alg.dims()) b.push_back(Matrix::Zero(d, d));
  return AlgebraElement(std::move(b));
}

AlgebraElement AlgebraElement::identity(const BlockAlgebra& alg) {
  std::vector<Matrix> b;
  for (int d : alg.dims()) b.push_back(Matrix::Identity(d, d));
  return AlgebraElement(std::move(b));
}

AlgebraElement AlgebraElement::scalar(const BlockAlgebra& alg, Complex c) {
  AlgebraElement e = identity(alg);
  e *= c;
  return e;
}

bool AlgebraElement::conforms_to(const BlockAlgebra& alg) const {
  if (blocks_.size() != alg.num_blocks()) return false;
  for (std::size_t k = 0; k < blocks_.size(); ++k)
    if (blocks_[k].rows() != alg.dim(k) || blocks_[k].cols() != alg.dim(k)) return false;
  return true;
}

AlgebraElement AlgebraElement::adjoint() const {
  std::vector<Matrix> b;
  b.reserve(blocks_.size());
  for (const Matrix& m : blocks_) b.push_back(m.adjoint());
  return AlgebraElement(std::move(b));
}

AlgebraElement AlgebraElement::hermitian_part() const {
  std::vector<Matrix> b;
  b.reserve(blocks_.size());
  for (const Matrix& m : blocks_) b.push_back((m + m.adjoint()) / 2.0);
  return AlgebraElement(std::move(b));
}

static void require_same_structure(const AlgebraElement& x, const AlgebraElement& y) {
  if (x.num_blocks() != y.num_blocks())
    throw StructuralError("algebra elements have different block counts");
  for (std::size_t k = 0; k < x.num_blocks(); ++k)
    if (x.block(k).rows() != y.block(k).rows() || x.block(k).cols() != y.block(k).cols())
      throw StructuralError("algebra elements have different block shapes");
}

AlgebraElement& AlgebraElement::operator+=(const AlgebraElement& other) {
  require_same_structure(*this, other);
  for (std::size_t k = 0; k < blocks_.size(); ++k) blocks_[k] += other.blocks_[k];
  return *this;
}

AlgebraElement& AlgebraElement::operator-=(const AlgebraElement& other) {
  require_same_structure(*this, other);
  for (std::size_t k = 0; k < blocks_.size(); ++k) blocks_[k] -= other.blocks_[k];
  return *this;
}

AlgebraElement& AlgebraElement::operator*=(Complex c) {
  for (Matrix& m : blocks_) m *= c;
  return *this;
}

AlgebraElement operator+(AlgebraElement x, const AlgebraElement& y) { return x += y; }
AlgebraElement operator-(AlgebraElement x, const AlgebraElement& y) { return x -= y; }

AlgebraElement operator*(const AlgebraElement& x, const AlgebraElement& y) {
  require_same_structure(x, y);
  std::vector<Matrix> b;
  b.reserve(x.num_blocks());
  for (std::size_t k = 0; k < x.num_blocks(); ++k) b.push_back(x.block(k) * y.block(k));
  return AlgebraElement(std::move(b));
}

AlgebraElement operator*(Complex c, AlgebraElement x) { return x *= c; }

void require_shape(const BlockAlgebra& alg, const AlgebraElement& x, const char* what) {
  if (!x.conforms_to(alg)) {
    std::ostringstream os;
    os << what << ": block shapes do not match the algebra (expected " << alg.num_blocks()
       << " blocks, got " << x.num_blocks() << ")";
    throw StructuralError(os.str());
  }
}

double frobenius_norm(const AlgebraElement& x) {
  double s = 0.0;
  for (const Matrix& m : x.blocks()) s += m.squaredNorm();
  return std::sqrt(s);
}

double max_block_frobenius(const AlgebraElement& x) {
  double s = 0.0;
  for (const Matrix& m : x.blocks()) s = std::max(s, m.norm());
  return s;
}

double max_abs_entry(const AlgebraElement& x) {
  double s = 0.0;
  for (const Matrix& m : x.blocks())
    if (m.size() > 0) s = std::max(s, m.cwiseAbs().maxCoeff());
  return s;
}

double hermiticity_residual(const AlgebraElement& x) {
  double s = 0.0;
  for (const Matrix& m : x.blocks())
    if (m.size() > 0) s = std::max(s, (m - m.adjoint()).cwiseAbs().maxCoeff());
  return s;
}

double min_eigenvalue(const AlgebraElement& h) {
  double s = std::numeric_limits<double>::infinity();
  for (const Matrix& m : h.blocks()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    s = std::min(s, es.eigenvalues().minCoeff());
  }
  return s;
}

double max_eigenvalue(const AlgebraElement& h) {
  double s = -std::numeric_limits<double>::infinity();
  for (const Matrix& m : h.blocks()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    s = std::max(s, es.eigenvalues().maxCoeff());
  }
  return s;
}

double spectral_radius(const AlgebraElement& h) {
  return std::max(std::abs(min_eigenvalue(h)), std::abs(max_eigenvalue(h)));
}

Complex trace(const AlgebraElement& x) {
  Complex s = 0.0;
  for (const Matrix& m : x.blocks()) s += m.trace();
  return s;
}

// ---------------------------------------------------------------------------
// State

State State::from_densities(const BlockAlgebra& alg, AlgebraElement rho, const Tolerances& tol) {
  require_shape(alg, rho, "state density");
  const double herm = hermiticity_residual(rho);
  if (herm > tol.cert_tol) {
    std::ostringstream os;
    os << "state density is not Hermitian (residual " << herm << ")";
    throw ValidationError(os.str());
  }
  rho = rho.hermitian_part();
  const double lmin = min_eigenvalue(rho);
  if (lmin < -tol.psd_tol) {
    std::ostringstream os;
    os << "state density is not positive (min eigenvalue " << lmin << ")";
    throw ValidationError(os.str());
  }
  const double tr = trace(rho).real();
  if (std::abs(tr - 1.0) > tol.cert_tol) {
    std::ostringstream os;
    os << "state density has trace " << tr << ", expected 1";
    throw ValidationError(os.str());
  }
  return State(alg, std::move(rho), herm);
}

State::State() : alg_(std::vector<int>{1}), rho_(AlgebraElement::identity(alg_)) {}

State State::normalized_trace(const BlockAlgebra& alg) {
  AlgebraElement rho = AlgebraElement::identity(alg);
  rho *= 1.0 / alg.total_dim();
  return State(alg, std::move(rho), 0.0);
}

State State::vector_state(const BlockAlgebra& alg, const std::vector<Vector>& xi) {
  if (xi.size() != alg.num_blocks()) throw StructuralError("vector state: wrong number of blocks");
  double norm2 = 0.0;
  for (std::size_t k = 0; k < xi.size(); ++k) {
    if (xi[k].size() != alg.dim(k)) throw StructuralError("vector state: wrong block length");
    norm2 += xi[k].squaredNorm();
  }
  if (!(norm2 > 0.0)) throw ValidationError("vector state: zero vector");
  std::vector<Matrix> b;
  for (const Vector& v : xi) b.push_back(v * v.adjoint() / norm2);
  return State(alg, AlgebraElement(std::move(b)).hermitian_part(), 0.0);
}

Complex State::operator()(const AlgebraElement& x) const {
  require_shape(alg_, x, "state argument");
  Complex s = 0.0;
  for (std::size_t k = 0; k < x.num_blocks(); ++k)
    s += (rho_.block(k).cwiseProduct(x.block(k).transpose())).sum();
  return s;
}

// ---------------------------------------------------------------------------
// POVM / PVM

Povm symmetrized(Povm a) {
  for (auto& e : a.elements) e = e.hermitian_part();
  return a;
}

Pvm symmetrized(Pvm p) {
  for (auto& e : p.elements) e = e.hermitian_part();
  return p;
}

static PovmDiagnostics diagnose(const BlockAlgebra& alg, const std::vector<AlgebraElement>& els,
                                const Tolerances& tol, bool projections) {
  PovmDiagnostics d;
  AlgebraElement sum = AlgebraElement::zero(alg);
  for (const auto& e : els) {
    require_shape(alg, e, "POVM element");
    d.hermiticity_residual = std::max(d.hermiticity_residual, hermiticity_residual(e));
    AlgebraElement h = e.hermitian_part();
    d.max_negativity = std::max(d.max_negativity, -min_eigenvalue(h));
    d.max_excess = std::max(d.max_excess, max_eigenvalue(h) - 1.0);
    if (projections) d.idempotency_residual = std::max(d.idempotency_residual, frobenius_norm(h * h - h));
    sum += h;
  }
  d.sum_residual = max_abs_entry(sum - AlgebraElement::identity(alg));
  d.is_valid = !els.empty() && d.hermiticity_residual <= tol.cert_tol &&
               d.max_negativity <= tol.psd_tol && d.max_excess <= tol.psd_tol &&
               d.sum_residual <= tol.cert_tol;
  if (projections) d.is_valid = d.is_valid && d.idempotency_residual <= tol.cert_tol;
  return d;
}

PovmDiagnostics validate_povm(const BlockAlgebra& alg, const Povm& a, const Tolerances& tol) {
  return diagnose(alg, a.elements, tol, false);
}

PovmDiagnostics validate_pvm(const BlockAlgebra& alg, const Pvm& p, const Tolerances& tol) {
  return diagnose(alg, p.elements, tol, true);
}

static void throw_invalid(const char* what, const PovmDiagnostics& d, const Tolerances& tol, bool pvm,
                          std::size_t n) {
  std::ostringstream os;
  os << what << " invalid: ";
  if (n == 0) os << "no elements";
  else if (d.hermiticity_residual > tol.cert_tol) os << "hermiticity residual " << d.hermiticity_residual;
  else if (d.max_negativity > tol.psd_tol) os << "negative eigenvalue " << -d.max_negativity;
  else if (d.max_excess > tol.psd_tol) os << "eigenvalue above one by " << d.max_excess;
  else if (d.sum_residual > tol.cert_tol) os << "sum differs from identity by " << d.sum_residual;
  else if (pvm) os << "idempotency residual " << d.idempotency_residual;
  throw ValidationError(os.str());
}

void require_valid_povm(const BlockAlgebra& alg, const Povm& a, const Tolerances& tol) {
  auto d = validate_povm(alg, a, tol);
  if (!d.is_valid) throw_invalid("POVM", d, tol, false, a.size());
}

void require_valid_pvm(const BlockAlgebra& alg, const Pvm& p, const Tolerances& tol) {
  auto d = validate_pvm(alg, p, tol);
  if (!d.is_valid) throw_invalid("PVM", d, tol, true, p.size());
}

// ---------------------------------------------------------------------------
// Norms and traces

double phi_norm_sq(const State& phi, const AlgebraElement& x) {
  require_shape(phi.algebra(), x, "phi-norm argument");
  double s = 0.0;
  for (std::size_t k = 0; k < x.num_blocks(); ++k) {
    const Matrix& xk = x.block(k);
    s += (phi.density(k) * xk.adjoint() * xk).trace().real();
  }
  return std::max(0.0, s);
}

double defect(const State& phi, const Povm& a) {
  AlgebraElement sq = AlgebraElement::zero(phi.algebra());
  for (const auto& e : a.elements) {
    require_shape(phi.algebra(), e, "POVM element");
    sq += e * e;
  }
  return 1.0 - phi(sq).real();
}

CenterValue center_valued_trace(const BlockAlgebra& alg, const AlgebraElement& x) {
  require_shape(alg, x, "center-valued trace argument");
  CenterValue c;
  for (std::size_t k = 0; k < alg.num_blocks(); ++k)
    c.values.push_back(x.block(k).trace() / static_cast<double>(alg.dim(k)));
  return c;
}

SpectralClusters spectral_clusters(const AlgebraElement& h, double cluster_tol, double hermitian_tol) {
  const double herm = hermiticity_residual(h);
  if (herm > hermitian_tol) {
    std::ostringstream os;
    os << "spectral clustering needs a Hermitian element (residual " << herm << ")";
    throw ValidationError(os.str());
  }
  SpectralClusters out;
  for (const Matrix& raw : h.blocks()) {
    Matrix b = (raw + raw.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(b);
    const auto& vals = es.eigenvalues();
    const Matrix& vecs = es.eigenvectors();
    const Eigen::Index d = vals.size();
    std::vector<SpectralCluster> clusters;
    Eigen::Index start = d - 1;
    // Eigen returns ascending eigenvalues; walk them in descending order.
    for (Eigen::Index i = d - 1; i >= 0; --i) {
      const bool last = (i == 0);
      if (last || vals[i] - vals[i - 1] > cluster_tol) {
        const Eigen::Index count = start - i + 1;
        SpectralCluster c;
        c.value = 0.0;
        c.basis.resize(b.rows(), count);
        for (Eigen::Index j = 0; j < count; ++j) {
          c.value += vals[start - j];
          c.basis.col(j) = vecs.col(start - j);
        }
        c.value /= static_cast<double>(count);
        clusters.push_back(std::move(c));
        start = i - 1;
      }
    }
    out.blocks.push_back(std::move(clusters));
  }
  return out;
}

double cluster_threshold(const Tolerances& tol, const AlgebraElement& h) {
  return tol.cluster_tol * std::max(1.0, spectral_radius(h.hermitian_part()));
}

AlgebraElement commutator(const AlgebraElement& x, const AlgebraElement& y) { return x * y - y * x; }

double commutator_phi_norm_sq(const State& phi, const AlgebraElement& x, const AlgebraElement& y) {
  require_shape(phi.algebra(), x, "commutator argument");
  require_shape(phi.algebra(), y, "commutator argument");
  return phi_norm_sq(phi, commutator(x, y));
}

Matrix range_basis(const Matrix& projection) {
  Matrix h = (projection + projection.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const auto& vals = es.eigenvalues();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = vals.size() - 1; i >= 0; --i)
    if (vals[i] > 0.5) keep.push_back(i);
  Matrix b(h.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) b.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]);
  return b;
}

}  // namespace povmround
