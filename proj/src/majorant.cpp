#include "povmround/majorant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "povmround/errors.hpp"

namespace povmround {

namespace {

struct BlockProblem {
  std::vector<Matrix> a;
  Matrix z;
};

struct BarrierEval {
  bool feasible = false;
  std::vector<Matrix> s_inv;
  double value = 0.0;  // Tr z - mu sum_i log det(z - a_i)
};

BarrierEval evaluate(const BlockProblem& p, const Matrix& z, double mu) {
  BarrierEval e;
  const Eigen::Index d = z.rows();
  double logdet = 0.0;
  for (const Matrix& ai : p.a) {
    const Matrix s = z - ai;
    Eigen::LLT<Matrix> llt(s);
    if (llt.info() != Eigen::Success) return e;
    const Matrix l = llt.matrixL();
    for (Eigen::Index j = 0; j < d; ++j) {
      const double pivot = l(j, j).real();
      if (!(pivot > 0.0)) return e;
      logdet += 2.0 * std::log(pivot);
    }
    e.s_inv.push_back(llt.solve(Matrix::Identity(d, d)));
  }
  e.feasible = true;
  e.value = z.trace().real() - mu * logdet;
  return e;
}

Matrix gradient(const BarrierEval& e, double mu, Eigen::Index d) {
  Matrix g = Matrix::Identity(d, d);
  for (const Matrix& si : e.s_inv) g -= mu * si;
  return (g + g.adjoint()) / 2.0;
}

// Hessian of the barrier as a d^2 x d^2 matrix on column-major vec(H).
Matrix hessian(const BarrierEval& e, double mu, Eigen::Index d) {
  Matrix k = Matrix::Zero(d * d, d * d);
  for (const Matrix& si : e.s_inv)
    for (Eigen::Index c = 0; c < d; ++c)
      for (Eigen::Index cp = 0; cp < d; ++cp) {
        const Complex w = mu * si(cp, c);
        k.block(c * d, cp * d, d, d) += w * si;
      }
  return (k + k.adjoint()) / 2.0;
}

// Newton iterations on one block at fixed mu. Returns the gradient norm at
// the accepted point.
double center(BlockProblem& p, double mu, const BarrierSettings& bs, int& steps) {
  const Eigen::Index d = p.z.rows();
  BarrierEval cur = evaluate(p, p.z, mu);
  if (!cur.feasible) throw SolverError("barrier iterate left the feasible region");
  for (int it = 0; it < bs.max_iters; ++it) {
    const Matrix g = gradient(cur, mu, d);
    const double gnorm = g.norm();
    if (gnorm <= bs.newton_tol) return gnorm;

    const Matrix k = hessian(cur, mu, d);
    const Vector rhs = -Eigen::Map<const Vector>(g.data(), d * d);
    Eigen::LDLT<Matrix> ldlt(k);
    Vector step = ldlt.solve(rhs);
    Matrix delta = Eigen::Map<Matrix>(step.data(), d, d);
    delta = (delta + delta.adjoint()) / 2.0;
    const double decrement = -(g.adjoint() * delta).trace().real();
    // Roundoff floor of the barrier value.
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() *
                         (std::abs(cur.value) + p.z.trace().real() + 1.0);
    if (!(decrement > floor)) {
      // Below the roundoff floor of the objective: full Newton steps while
      // they stay feasible and reduce the gradient.
      const Matrix zn = p.z + delta;
      BarrierEval next = evaluate(p, zn, mu);
      if (!next.feasible || !(gradient(next, mu, d).norm() < gnorm)) return gnorm;
      p.z = (zn + zn.adjoint()) / 2.0;
      cur = std::move(next);
      ++steps;
      continue;
    }

    double t = 1.0;
    bool accepted = false;
    while (t > 1e-14) {
      const Matrix zn = p.z + t * delta;
      BarrierEval next = evaluate(p, zn, mu);
      if (next.feasible && next.value <= cur.value - 0.25 * t * decrement) {
        p.z = (zn + zn.adjoint()) / 2.0;
        cur = std::move(next);
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    ++steps;
    if (!accepted) return gnorm;
  }
  const double gnorm = gradient(cur, mu, d).norm();
  std::ostringstream os;
  os << "Newton centering did not converge in " << bs.max_iters << " iterations (mu " << mu << ", gradient "
     << gnorm << ")";
  throw SolverError(os.str());
}

}  // namespace

void require_valid_family(const BlockAlgebra& alg, const FunctionalFamily& f, const Tolerances& tol) {
  if (f.size() == 0) throw PreconditionError("functional family is empty");
  for (std::size_t i = 0; i < f.size(); ++i) {
    require_shape(alg, f[i], "functional");
    const double herm = hermiticity_residual(f[i]);
    const double lmin = min_eigenvalue(f[i].hermitian_part());
    if (herm > tol.cert_tol || lmin < -tol.psd_tol) {
      std::ostringstream os;
      os << "functional " << i << " is not positive (hermiticity " << herm << ", lambda_min " << lmin << ")";
      throw PreconditionError(os.str());
    }
  }
}

double majorant_scale(const FunctionalFamily& f) {
  double s = 0.0;
  for (const auto& a : f.elements) s += trace(a).real();
  return std::max(1.0, s);
}

void recompute(const BlockAlgebra& alg, const FunctionalFamily& f, MajorantSolution& sol) {
  require_shape(alg, sol.z, "majorant");
  if (sol.t.size() != f.size()) throw StructuralError("dual POVM and functional family differ in length");
  sol.primal = trace(sol.z).real();
  sol.dual = 0.0;
  MajorantResiduals r;
  r.feasibility = std::numeric_limits<double>::infinity();
  AlgebraElement sum = AlgebraElement::zero(alg);
  AlgebraElement recon = sol.z;
  for (std::size_t i = 0; i < f.size(); ++i) {
    require_shape(alg, sol.t[i], "dual element");
    const AlgebraElement slack = (sol.z - f[i]).hermitian_part();
    r.feasibility = std::min(r.feasibility, min_eigenvalue(slack));
    r.slackness = std::max(r.slackness, frobenius_norm(sol.t[i] * slack));
    sol.dual += trace(f[i] * sol.t[i]).real();
    sum += sol.t[i];
    recon -= sol.t[i] * f[i];
  }
  r.povm_sum = frobenius_norm(sum - AlgebraElement::identity(alg));
  r.reconstruction = frobenius_norm(recon);
  sol.residuals = r;
  sol.gap = sol.primal - sol.dual;
}

MajorantSolution minimal_majorant(const BlockAlgebra& alg, const FunctionalFamily& f_in, const Tolerances& tol) {
  tol.validate();
  require_valid_family(alg, f_in, tol);
  FunctionalFamily f;
  for (const auto& a : f_in.elements) f.elements.push_back(a.hermitian_part());
  const BarrierSettings& bs = tol.barrier;
  const double n = static_cast<double>(f.size());
  const double dim = alg.total_dim();

  double top = 0.0;
  for (const auto& a : f.elements) top = std::max(top, max_eigenvalue(a));
  const double z0 = top + 1.0;
  std::vector<BlockProblem> blocks(alg.num_blocks());
  for (std::size_t k = 0; k < alg.num_blocks(); ++k) {
    for (const auto& a : f.elements) blocks[k].a.push_back(a.block(k));
    blocks[k].z = z0 * Matrix::Identity(alg.dim(k), alg.dim(k));
  }

  MajorantSolution sol;
  sol.gap_tol = bs.gap_tol * majorant_scale(f);
  double mu = bs.mu0_scale * z0;
  for (int outer = 0; outer < bs.max_iters; ++outer) {
    std::vector<Matrix> zb;
    std::vector<std::vector<Matrix>> tb(f.size());
    sol.stationarity = 0.0;
    for (auto& b : blocks) {
      sol.stationarity = std::max(sol.stationarity, center(b, mu, bs, sol.newton_steps));
      const Eigen::Index d = b.z.rows();
      std::vector<Matrix> ts;
      Matrix total = Matrix::Zero(d, d);
      for (const Matrix& ai : b.a) {
        Eigen::LLT<Matrix> llt(b.z - ai);
        Matrix ti = mu * llt.solve(Matrix::Identity(d, d));
        ti = (ti + ti.adjoint()) / 2.0;
        total += ti;
        ts.push_back(std::move(ti));
      }
      // Normalize so that the dual is an exact POVM.
      Eigen::SelfAdjointEigenSolver<Matrix> es(total);
      const Matrix w = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().cast<Complex>().asDiagonal() *
                       es.eigenvectors().adjoint();
      for (std::size_t i = 0; i < ts.size(); ++i) {
        Matrix ti = w * ts[i] * w;
        tb[i].push_back((ti + ti.adjoint()) / 2.0);
      }
      zb.push_back(b.z);
    }
    sol.z = AlgebraElement(std::move(zb));
    sol.t.clear();
    for (auto& ti : tb) sol.t.emplace_back(std::move(ti));
    sol.mu_final = mu;
    recompute(alg, f, sol);
    if (n * mu * dim <= sol.gap_tol && sol.gap <= sol.gap_tol) return sol;
    mu *= bs.mu_shrink;
  }
  std::ostringstream os;
  os << "barrier method did not reach the gap target " << sol.gap_tol << " (gap " << sol.gap << ", mu " << mu << ")";
  throw SolverError(os.str());
}

std::vector<Check> verify_majorant_certificate(const BlockAlgebra& alg, const FunctionalFamily& f,
                                               const MajorantSolution& given, const Tolerances& tol) {
  MajorantSolution sol = given;
  recompute(alg, f, sol);
  const double gap_tol = tol.barrier.gap_tol * majorant_scale(f);
  double t_min = std::numeric_limits<double>::infinity();
  for (const auto& ti : sol.t) t_min = std::min(t_min, min_eigenvalue(ti.hermitian_part()));
  std::vector<Check> out;
  out.push_back(Check::at_least("feasibility", sol.residuals.feasibility, -tol.psd_tol));
  out.push_back(Check::at_least("dual_positivity", t_min, -tol.psd_tol));
  out.push_back(Check::at_most("povm_sum", sol.residuals.povm_sum, 10.0 * tol.cert_tol));
  out.push_back(Check::at_least("gap_lower", sol.gap, -tol.cert_tol));
  out.push_back(Check::at_most("gap_upper", sol.gap, gap_tol));
  out.push_back(Check::at_most("slackness", sol.residuals.slackness, 100.0 * gap_tol));
  out.push_back(Check::at_most("reconstruction", sol.residuals.reconstruction, 100.0 * gap_tol));
  return out;
}

MajorantSolution commuting_majorant_oracle(const BlockAlgebra& alg, const FunctionalFamily& f) {
  if (f.size() == 0) throw PreconditionError("functional family is empty");
  for (std::size_t i = 0; i < f.size(); ++i) {
    require_shape(alg, f[i], "functional");
    for (std::size_t k = 0; k < alg.num_blocks(); ++k) {
      const Matrix& b = f[i].block(k);
      for (Eigen::Index r = 0; r < b.rows(); ++r)
        for (Eigen::Index c = 0; c < b.cols(); ++c)
          if (r != c && b(r, c) != Complex(0.0)) {
            std::ostringstream os;
            os << "functional " << i << " is not diagonal (block " << k << ", entry " << r << "," << c << ")";
            throw PreconditionError(os.str());
          }
    }
  }
  MajorantSolution sol;
  sol.z = AlgebraElement::zero(alg);
  for (std::size_t i = 0; i < f.size(); ++i) sol.t.push_back(AlgebraElement::zero(alg));
  for (std::size_t k = 0; k < alg.num_blocks(); ++k)
    for (int j = 0; j < alg.dim(k); ++j) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < f.size(); ++i)
        if (f[i].block(k)(j, j).real() > f[best].block(k)(j, j).real()) best = i;
      sol.z.block(k)(j, j) = f[best].block(k)(j, j).real();
      sol.t[best].block(k)(j, j) = 1.0;
    }
  recompute(alg, f, sol);
  return sol;
}

}  // namespace povmround
