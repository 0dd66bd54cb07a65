#include "povmround/orthogonalizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

#include "povmround/errors.hpp"

namespace povmround {

namespace {

struct Item {
  double score;
  std::size_t output;
  double eigenvalue;
  Eigen::Index index;
  Vector vec;
};

// Score descending, output ascending, cluster eigenvalue descending,
// eigenvector index ascending.
bool item_before(const Item& x, const Item& y) {
  return std::make_tuple(-x.score, x.output, -x.eigenvalue, x.index) <
         std::make_tuple(-y.score, y.output, -y.eigenvalue, y.index);
}

void require_state_on(const BlockAlgebra& alg, const State& phi) {
  if (!(phi.algebra() == alg)) throw StructuralError("state lives on a different algebra");
}

Matrix matrix_sqrt_psd(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((m + m.adjoint()) / 2.0);
  Eigen::VectorXd v = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Matrix r = es.eigenvectors() * v.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  return (r + r.adjoint()) / 2.0;
}

}  // namespace

SelectionResult select_projections(const BlockAlgebra& alg, const State& phi, const Povm& a_in,
                                   const Tolerances& tol) {
  require_state_on(alg, phi);
  require_valid_povm(alg, a_in, tol);
  const Povm a = symmetrized(a_in);
  const std::size_t n = a.size();

  std::vector<SpectralClusters> clusters;
  clusters.reserve(n);
  for (const auto& e : a.elements) clusters.push_back(spectral_clusters(e, cluster_threshold(tol, e), tol.cert_tol));

  SelectionResult out;
  out.q.assign(n, AlgebraElement::zero(alg));
  out.ranks.assign(alg.num_blocks(), std::vector<int>(n, 0));

  for (std::size_t k = 0; k < alg.num_blocks(); ++k) {
    const Matrix& rho = phi.density(k);
    std::vector<Item> pool;
    pool.reserve(n * static_cast<std::size_t>(alg.dim(k)));
    for (std::size_t i = 0; i < n; ++i) {
      for (const SpectralCluster& c : clusters[i].blocks[k]) {
        Matrix score = c.value * (c.basis.adjoint() * rho * c.basis);
        Eigen::SelfAdjointEigenSolver<Matrix> es((score + score.adjoint()) / 2.0);
        const Eigen::Index m = es.eigenvalues().size();
        for (Eigen::Index j = 0; j < m; ++j) {
          // index 0 is the largest score within the cluster
          const Eigen::Index src = m - 1 - j;
          double s = es.eigenvalues()[src];
          if (s < 0.0) {
            if (s < -tol.cert_tol) ++out.clipped_scores;
            s = 0.0;
          }
          pool.push_back(Item{s, i, c.value, j, c.basis * es.eigenvectors().col(src)});
        }
      }
    }
    std::sort(pool.begin(), pool.end(), item_before);
    for (int r = 0; r < alg.dim(k); ++r) {
      const Item& it = pool[static_cast<std::size_t>(r)];
      out.q[it.output].block(k) += it.vec * it.vec.adjoint();
      out.ranks[k][it.output] += 1;
      out.lp_value += it.score;
    }
  }

  AlgebraElement qa = AlgebraElement::zero(alg);
  for (std::size_t i = 0; i < n; ++i) {
    out.q[i] = out.q[i].hermitian_part();
    qa += out.q[i] * a[i];
    out.commutator_residual = std::max(out.commutator_residual, frobenius_norm(commutator(out.q[i], a[i])));
  }
  out.value = phi(qa).real();
  return out;
}

BlockColumn complete_polar(const BlockAlgebra& alg, const BlockColumn& x,
                           const std::vector<AlgebraElement>& q_range, const Tolerances& tol) {
  const std::size_t n = x.outputs;
  if (q_range.size() != n) throw StructuralError("complete_polar: number of range projections differs from outputs");
  if (x.blocks.size() != alg.num_blocks()) throw StructuralError("complete_polar: wrong number of blocks");
  for (const auto& q : q_range) require_shape(alg, q, "range projection");

  BlockColumn u;
  u.outputs = n;
  for (std::size_t k = 0; k < alg.num_blocks(); ++k) {
    const Eigen::Index d = alg.dim(k);
    const Eigen::Index nd = static_cast<Eigen::Index>(n) * d;
    const Matrix& xk = x.blocks[k];
    if (xk.rows() != nd || xk.cols() != d) throw StructuralError("complete_polar: block has the wrong shape");

    // Orthonormal basis of range(diag(q_1, ..., q_n)).
    std::vector<Matrix> ranges;
    Eigen::Index rank_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      ranges.push_back(range_basis(q_range[i].block(k)));
      rank_sum += ranges.back().cols();
    }
    if (rank_sum != d) {
      std::ostringstream os;
      os << "complete_polar: block " << k << " has range ranks summing to " << rank_sum
         << " but dimension " << d;
      throw PreconditionError(os.str());
    }
    Matrix basis = Matrix::Zero(nd, d);
    Eigen::Index col = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Index ri = ranges[i].cols();
      basis.block(static_cast<Eigen::Index>(i) * d, col, d, ri) = ranges[i];
      col += ri;
    }
    const double outside = (xk - basis * (basis.adjoint() * xk)).norm();
    if (outside > tol.cert_tol * std::max(1.0, xk.norm())) {
      std::ostringstream os;
      os << "complete_polar: block " << k << " has columns outside the target range (residual " << outside << ")";
      throw PreconditionError(os.str());
    }

    // In range coordinates x becomes square; its full SVD pairs the kernel of
    // x with the complement of its range in order of the singular vectors.
    Matrix y = basis.adjoint() * xk;
    Eigen::JacobiSVD<Matrix> svd(y, Eigen::ComputeFullU | Eigen::ComputeFullV);
    u.blocks.push_back(basis * (svd.matrixU() * svd.matrixV().adjoint()));
  }
  return u;
}

double error_ratio(double error, double defect, double cert_tol) {
  if (defect > cert_tol) return error / defect;
  return error <= cert_tol ? 0.0 : std::numeric_limits<double>::infinity();
}

OrthReport orthogonalize(const BlockAlgebra& alg, const State& phi, const Povm& a_in, const Tolerances& tol) {
  require_state_on(alg, phi);
  require_valid_povm(alg, a_in, tol);
  const Povm a = symmetrized(a_in);
  const std::size_t n = a.size();

  OrthReport rep;
  rep.defect = defect(phi, a);
  rep.selection = select_projections(alg, phi, a, tol);
  const auto& q = rep.selection.q;

  // x = sum_i e_{i,1} (x) q_i a_i^{1/2}
  std::vector<AlgebraElement> root;
  for (const auto& e : a.elements) {
    rep.certificates.sqrt_clip =
        std::max({rep.certificates.sqrt_clip, -min_eigenvalue(e), max_eigenvalue(e) - 1.0});
    root.push_back(apply_spectral(e, [](double v) { return std::sqrt(std::clamp(v, 0.0, 1.0)); }));
  }
  BlockColumn x;
  x.outputs = n;
  for (std::size_t k = 0; k < alg.num_blocks(); ++k) {
    const Eigen::Index d = alg.dim(k);
    Matrix xk(static_cast<Eigen::Index>(n) * d, d);
    for (std::size_t i = 0; i < n; ++i)
      xk.block(static_cast<Eigen::Index>(i) * d, 0, d, d) = q[i].block(k) * root[i].block(k);
    x.blocks.push_back(std::move(xk));
  }

  const BlockColumn u = complete_polar(alg, x, q, tol);

  rep.pvm.elements.assign(n, AlgebraElement::zero(alg));
  std::vector<Matrix> modulus;
  for (std::size_t k = 0; k < alg.num_blocks(); ++k) {
    const Eigen::Index d = alg.dim(k);
    const Matrix& uk = u.blocks[k];
    Matrix target = Matrix::Zero(uk.rows(), uk.rows());
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Index off = static_cast<Eigen::Index>(i) * d;
      const auto ui = uk.block(off, 0, d, d);
      Matrix p = ui.adjoint() * q[i].block(k) * ui;
      rep.pvm.elements[i].block(k) = (p + p.adjoint()) / 2.0;
      target.block(off, off, d, d) = q[i].block(k);
    }
    const Matrix xx = x.blocks[k].adjoint() * x.blocks[k];
    modulus.push_back(matrix_sqrt_psd(xx));
    auto& c = rep.certificates;
    c.isometry = std::max(c.isometry, (uk.adjoint() * uk - Matrix::Identity(d, d)).norm());
    c.range = std::max(c.range, (uk * uk.adjoint() - target).norm());
    c.polar = std::max(c.polar, (x.blocks[k] - uk * modulus.back()).norm());
  }
  const AlgebraElement abs_x(std::move(modulus));

  auto& c = rep.certificates;
  const AlgebraElement one = AlgebraElement::identity(alg);
  AlgebraElement sum_p = AlgebraElement::zero(alg);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = rep.pvm[i];
    sum_p += p;
    c.idempotency = std::max(c.idempotency, frobenius_norm(p * p - p));
    c.midpoint = std::max(c.midpoint, frobenius_norm(abs_x * p * abs_x - q[i] * a[i]));
    const AlgebraElement a2 = a[i] * a[i];
    c.term_projection += phi((one - q[i]) * a2).real();
    c.term_midpoint += phi(q[i] * (a[i] - a2)).real();
    rep.error += phi_norm_sq(phi, a[i] - p);
  }
  const AlgebraElement gap = one - abs_x;
  c.term_modulus = phi(gap * gap).real();
  c.sum_to_one = max_abs_entry(sum_p - one);
  c.selection_commutator = rep.selection.commutator_residual;
  c.sum_squares = 1.0 - rep.defect;
  rep.ratio = error_ratio(rep.error, rep.defect, tol.cert_tol);
  return rep;
}

namespace {

double converse_floor(double error) {
  const double r = std::max(0.0, 1.0 - std::sqrt(std::max(0.0, error)));
  return r * r;
}

}  // namespace

std::vector<Check> certify(const BlockAlgebra& alg, const OrthReport& r, const Tolerances& tol) {
  const auto& c = r.certificates;
  const double mid_tol = tol.cert_tol + 10.0 * tol.cluster_tol;
  std::vector<Check> out;
  out.push_back(Check::at_most("bound_9eps", r.error, 9.0 * r.defect + tol.cert_tol));
  out.push_back(Check::at_least("converse", c.sum_squares, converse_floor(r.error) - tol.cert_tol));
  out.push_back(Check::at_most("pvm_idempotency", c.idempotency, tol.cert_tol));
  out.push_back(Check::at_most("pvm_sum", c.sum_to_one, tol.cert_tol));
  out.push_back(Check::at_most("midpoint_identity", c.midpoint, mid_tol));
  out.push_back(Check::at_least("selection_value", r.selection.value, 1.0 - r.defect - tol.cert_tol));
  out.push_back(Check::at_most("selection_commutator", c.selection_commutator, 10.0 * tol.cluster_tol));
  int worst = 0;
  for (std::size_t k = 0; k < r.selection.ranks.size(); ++k) {
    int s = 0;
    for (int v : r.selection.ranks[k]) s += v;
    worst = std::max(worst, std::abs(s - alg.dim(k)));
  }
  out.push_back(Check::at_most("rank_sum", worst, 0.0));
  out.push_back(Check::at_most("term_projection", c.term_projection, r.defect + tol.cert_tol));
  out.push_back(Check::at_most("term_modulus", c.term_modulus, r.defect + tol.cert_tol));
  out.push_back(Check::at_most("term_midpoint", c.term_midpoint, r.defect + tol.cert_tol));
  return out;
}

std::vector<Check> certify(const BlockAlgebra& alg, const SymmetryPreservingReport& r, const Tolerances& tol) {
  std::vector<Check> out;
  out.push_back(Check::at_most("bound_9eps", r.error, 9.0 * r.defect + tol.cert_tol));
  out.push_back(Check::at_least("converse", 1.0 - r.defect, converse_floor(r.error) - tol.cert_tol));
  const auto d = validate_pvm(alg, r.pvm, tol);
  out.push_back(Check::at_most("pvm_idempotency", d.idempotency_residual, tol.cert_tol));
  out.push_back(Check::at_most("pvm_sum", d.sum_residual, tol.cert_tol));
  out.push_back(Check::at_most("generated_algebra_residual", r.generated.residual, 10.0 * tol.cert_tol));
  out.push_back(Check::at_most("symmetry", r.symmetry_residual, 10.0 * tol.cert_tol));
  return out;
}

SymmetryPreservingReport orthogonalize_symmetry_preserving(const BlockAlgebra& alg, const State& phi,
                                                           const Povm& a_in, const Tolerances& tol) {
  require_state_on(alg, phi);
  require_valid_povm(alg, a_in, tol);
  const Povm a = symmetrized(a_in);

  SymmetryPreservingReport rep;
  rep.generated = decompose_generated_algebra(alg, a.elements, tol);
  const GeneratedAlgebra& g = rep.generated;

  Povm sub;
  for (const auto& e : a.elements) sub.elements.push_back(g.compress(e));
  const State sub_phi = g.restrict(phi, tol);
  rep.inner = orthogonalize(g.algebra, sub_phi, sub, tol);

  for (const auto& p : rep.inner.pvm.elements) rep.pvm.elements.push_back(g.embed(p).hermitian_part());
  rep.defect = defect(phi, a);
  for (std::size_t i = 0; i < a.size(); ++i) rep.error += phi_norm_sq(phi, a[i] - rep.pvm[i]);
  rep.ratio = error_ratio(rep.error, rep.defect, tol.cert_tol);
  for (const auto& b : g.commutant_basis)
    for (const auto& p : rep.pvm.elements)
      rep.symmetry_residual = std::max(rep.symmetry_residual, frobenius_norm(commutator(b, p)));
  return rep;
}

}  // namespace povmround
