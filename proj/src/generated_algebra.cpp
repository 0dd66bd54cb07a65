#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "povmround/errors.hpp"
#include "povmround/orthogonalizer.hpp"
#include "povmround/random.hpp"

namespace povmround {

namespace {

// Fixed seed for the generic commutant elements; attempt t uses kSeed + t.
constexpr std::uint64_t kSeed = 0x9e3779b97f4a7c15ULL;

struct BlockDecomposition {
  std::vector<int> dims;
  std::vector<int> multiplicities;
  std::vector<int> offsets;
  Matrix w;
  std::vector<Matrix> commutant;
  double residual = 0.0;
};

// Orthonormal (Frobenius) basis of {y : [y, a] = 0 for all a in family}.
std::vector<Matrix> commutant_basis(const std::vector<Matrix>& family, Eigen::Index d, double null_tol) {
  const Eigen::Index d2 = d * d;
  Matrix stacked(static_cast<Eigen::Index>(family.size()) * d2, d2);
  const Matrix id = Matrix::Identity(d, d);
  for (std::size_t i = 0; i < family.size(); ++i) {
    const Matrix& a = family[i];
    // vec(y a - a y) = (a^T (x) 1 - 1 (x) a) vec(y), column-major vec.
    Matrix op(d2, d2);
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = 0; c < d; ++c)
        op.block(r * d, c * d, d, d) = a(c, r) * id - (r == c ? a : Matrix::Zero(d, d));
    stacked.block(static_cast<Eigen::Index>(i) * d2, 0, d2, d2) = op;
  }
  Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  std::vector<Matrix> basis;
  for (Eigen::Index j = 0; j < d2; ++j) {
    const double s = j < sv.size() ? sv[j] : 0.0;
    if (s <= null_tol) {
      Vector v = svd.matrixV().col(j);
      basis.push_back(Eigen::Map<Matrix>(v.data(), d, d));
    }
  }
  return basis;
}

// Union-find over eigenspace indices.
std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}

// One attempt at identifying sum_k M_{d_k} (x) 1_{m_k} inside a single
// ambient block. Returns false when the generic element was not generic
// enough (accidental eigenvalue coincidences) or the check failed.
bool try_decompose(const std::vector<Matrix>& family, const std::vector<Matrix>& comm, Eigen::Index d,
                   double scale, const Tolerances& tol, Rng& rng, BlockDecomposition& out, double& residual) {
  // Generic Hermitian and generic complex elements of the commutant.
  Matrix h = Matrix::Zero(d, d);
  Matrix g = Matrix::Zero(d, d);
  for (const Matrix& y : comm) {
    h += rng.normal() * (y + y.adjoint()) + rng.normal() * Complex(0.0, 1.0) * (y - y.adjoint());
    g += rng.complex_normal() * y;
  }
  h = (h + h.adjoint()) / 2.0;

  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const auto& vals = es.eigenvalues();
  const double htol = 1e-8 * std::max(1.0, vals.cwiseAbs().maxCoeff());
  std::vector<Matrix> spaces;
  for (Eigen::Index i = d - 1, start = d - 1; i >= 0; --i) {
    if (i == 0 || vals[i] - vals[i - 1] > htol) {
      const Eigen::Index count = start - i + 1;
      Matrix b(d, count);
      for (Eigen::Index j = 0; j < count; ++j) b.col(j) = es.eigenvectors().col(start - j);
      spaces.push_back(std::move(b));
      start = i - 1;
    }
  }

  // Eigenspaces carrying equivalent representations are linked by g.
  const std::size_t s = spaces.size();
  std::vector<std::size_t> parent(s);
  std::iota(parent.begin(), parent.end(), 0);
  const double gnorm = g.norm();
  for (std::size_t a = 0; a < s; ++a)
    for (std::size_t b = a + 1; b < s; ++b) {
      if (spaces[a].cols() != spaces[b].cols()) continue;
      const double t = (spaces[b].adjoint() * g * spaces[a]).norm();
      if (t > 1e-6 * gnorm) parent[find_root(parent, b)] = find_root(parent, a);
    }

  std::vector<std::vector<std::size_t>> classes;
  std::vector<long> class_of(s, -1);
  for (std::size_t a = 0; a < s; ++a) {
    const std::size_t r = find_root(parent, a);
    if (class_of[r] < 0) {
      class_of[r] = static_cast<long>(classes.size());
      classes.emplace_back();
    }
    classes[static_cast<std::size_t>(class_of[r])].push_back(a);
  }

  // Commutant dimension must be sum_k m_k^2.
  std::size_t expected = 0;
  for (const auto& c : classes) expected += c.size() * c.size();
  if (expected != comm.size()) return false;

  // Canonical order: by the first ambient coordinate the class touches.
  auto leading = [&](const std::vector<std::size_t>& c) {
    Eigen::VectorXd weight = Eigen::VectorXd::Zero(d);
    for (std::size_t idx : c) weight += spaces[idx].rowwise().squaredNorm();
    for (Eigen::Index r = 0; r < d; ++r)
      if (weight[r] > 1e-8) return r;
    return d;
  };
  std::stable_sort(classes.begin(), classes.end(),
                   [&](const auto& x, const auto& y) { return leading(x) < leading(y); });

  BlockDecomposition dec;
  dec.w = Matrix::Zero(d, d);
  int offset = 0;
  for (const auto& c : classes) {
    const Matrix& ref = spaces[c.front()];
    const Eigen::Index dk = ref.cols();
    const int mk = static_cast<int>(c.size());
    for (int j = 0; j < mk; ++j) {
      Matrix aligned = ref;
      if (j > 0) {
        const Matrix& bj = spaces[c[static_cast<std::size_t>(j)]];
        Matrix t = bj.adjoint() * g * ref;
        Eigen::JacobiSVD<Matrix> svd(t, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        if (sv.minCoeff() < 1e-6 * sv.maxCoeff()) return false;
        aligned = bj * (svd.matrixU() * svd.matrixV().adjoint());
      }
      for (Eigen::Index r = 0; r < dk; ++r) dec.w.col(offset + r * mk + j) = aligned.col(r);
    }
    dec.dims.push_back(static_cast<int>(dk));
    dec.multiplicities.push_back(mk);
    dec.offsets.push_back(offset);
    offset += static_cast<int>(dk) * mk;
  }

  // W^* a W must equal sum_k (a)_k (x) 1_{m_k}.
  double worst = 0.0;
  for (const Matrix& a : family) {
    const Matrix conj = dec.w.adjoint() * a * dec.w;
    Matrix model = Matrix::Zero(d, d);
    for (std::size_t k = 0; k < dec.dims.size(); ++k) {
      const int dk = dec.dims[k], mk = dec.multiplicities[k], off = dec.offsets[k];
      Matrix sub = Matrix::Zero(dk, dk);
      for (int r = 0; r < dk; ++r)
        for (int rr = 0; rr < dk; ++rr)
          for (int j = 0; j < mk; ++j) sub(r, rr) += conj(off + r * mk + j, off + rr * mk + j);
      sub /= static_cast<double>(mk);
      for (int r = 0; r < dk; ++r)
        for (int rr = 0; rr < dk; ++rr)
          for (int j = 0; j < mk; ++j) model(off + r * mk + j, off + rr * mk + j) = sub(r, rr);
    }
    worst = std::max(worst, (conj - model).norm());
  }
  residual = worst;
  if (worst > 10.0 * tol.cert_tol * scale) return false;
  dec.residual = worst;
  dec.commutant = comm;
  out = std::move(dec);
  return true;
}

}  // namespace

GeneratedAlgebra decompose_generated_algebra(const BlockAlgebra& alg, const std::vector<AlgebraElement>& elements,
                                             const Tolerances& tol) {
  if (elements.empty()) throw PreconditionError("decompose_generated_algebra: empty family");
  std::vector<AlgebraElement> family;
  for (const auto& e : elements) {
    require_shape(alg, e, "generating element");
    const double herm = hermiticity_residual(e);
    if (herm > tol.cert_tol) {
      std::ostringstream os;
      os << "decompose_generated_algebra: element is not Hermitian (residual " << herm << ")";
      throw ValidationError(os.str());
    }
    family.push_back(e.hermitian_part());
  }

  GeneratedAlgebra out;
  out.ambient = alg;
  std::vector<int> dims;
  for (std::size_t kb = 0; kb < alg.num_blocks(); ++kb) {
    const Eigen::Index d = alg.dim(kb);
    std::vector<Matrix> fam;
    double scale = 1.0;
    for (const auto& e : family) {
      fam.push_back(e.block(kb));
      scale = std::max(scale, e.block(kb).norm());
    }
    const auto comm = commutant_basis(fam, d, tol.cluster_tol * scale);

    BlockDecomposition dec;
    bool ok = false;
    double residual = std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt < tol.barrier.max_iters && !ok; ++attempt) {
      Rng rng(kSeed + static_cast<std::uint64_t>(attempt));
      ok = try_decompose(fam, comm, d, scale, tol, rng, dec, residual);
    }
    if (!ok) {
      std::ostringstream os;
      os << "decompose_generated_algebra: block " << kb << " did not stabilize (last residual " << residual << ")";
      throw NumericalDegeneracyError(os.str());
    }

    for (std::size_t k = 0; k < dec.dims.size(); ++k) {
      dims.push_back(dec.dims[k]);
      out.multiplicities.push_back(dec.multiplicities[k]);
      out.parent.push_back(kb);
      out.offset.push_back(dec.offsets[k]);
    }
    for (const Matrix& y : dec.commutant) {
      AlgebraElement b = AlgebraElement::zero(alg);
      b.block(kb) = y;
      out.commutant_basis.push_back(std::move(b));
    }
    out.change_of_basis.push_back(std::move(dec.w));
    out.residual = std::max(out.residual, dec.residual);
  }
  out.algebra = BlockAlgebra(dims);
  return out;
}

AlgebraElement GeneratedAlgebra::embed(const AlgebraElement& x) const {
  require_shape(algebra, x, "generated-algebra element");
  std::vector<Matrix> blocks;
  for (std::size_t kb = 0; kb < ambient.num_blocks(); ++kb) blocks.push_back(Matrix::Zero(ambient.dim(kb), ambient.dim(kb)));
  for (std::size_t k = 0; k < algebra.num_blocks(); ++k) {
    const int dk = algebra.dim(k), mk = multiplicities[k], off = offset[k];
    Matrix& m = blocks[parent[k]];
    for (int r = 0; r < dk; ++r)
      for (int rr = 0; rr < dk; ++rr)
        for (int j = 0; j < mk; ++j) m(off + r * mk + j, off + rr * mk + j) = x.block(k)(r, rr);
  }
  for (std::size_t kb = 0; kb < blocks.size(); ++kb)
    blocks[kb] = change_of_basis[kb] * blocks[kb] * change_of_basis[kb].adjoint();
  return AlgebraElement(std::move(blocks));
}

namespace {

// Sum (or mean) over the multiplicity index of W^* m W restricted to block k.
Matrix trace_out(const Matrix& conj, int dk, int mk, int off) {
  Matrix sub = Matrix::Zero(dk, dk);
  for (int r = 0; r < dk; ++r)
    for (int rr = 0; rr < dk; ++rr)
      for (int j = 0; j < mk; ++j) sub(r, rr) += conj(off + r * mk + j, off + rr * mk + j);
  return sub;
}

}  // namespace

AlgebraElement GeneratedAlgebra::compress(const AlgebraElement& a) const {
  require_shape(ambient, a, "ambient element");
  std::vector<Matrix> blocks;
  for (std::size_t k = 0; k < algebra.num_blocks(); ++k) {
    const Matrix& w = change_of_basis[parent[k]];
    const Matrix conj = w.adjoint() * a.block(parent[k]) * w;
    blocks.push_back(trace_out(conj, algebra.dim(k), multiplicities[k], offset[k]) / static_cast<double>(multiplicities[k]));
  }
  return AlgebraElement(std::move(blocks));
}

State GeneratedAlgebra::restrict(const State& phi, const Tolerances& tol) const {
  if (!(phi.algebra() == ambient)) throw StructuralError("restrict: state lives on a different algebra");
  std::vector<Matrix> blocks;
  for (std::size_t k = 0; k < algebra.num_blocks(); ++k) {
    const Matrix& w = change_of_basis[parent[k]];
    const Matrix conj = w.adjoint() * phi.density(parent[k]) * w;
    blocks.push_back(trace_out(conj, algebra.dim(k), multiplicities[k], offset[k]));
  }
  return State::from_densities(algebra, AlgebraElement(std::move(blocks)).hermitian_part(), tol);
}

}  // namespace povmround
