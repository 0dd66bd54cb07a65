#include "povmround/commute_repair.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "povmround/errors.hpp"

namespace povmround {

namespace {

void require_state_on(const BlockAlgebra& alg, const State& phi) {
  if (!(phi.algebra() == alg)) throw StructuralError("state lives on a different algebra");
}

AlgebraElement power(const AlgebraElement& u, int k, const BlockAlgebra& alg) {
  AlgebraElement r = AlgebraElement::identity(alg);
  for (int i = 0; i < k; ++i) r = r * u;
  return r;
}

}  // namespace

double commutation_defect(const State& phi, const Pvm& p, const Pvm& q) {
  double s = 0.0;
  for (const auto& pi : p.elements)
    for (const auto& qj : q.elements) s += commutator_phi_norm_sq(phi, pi, qj);
  return s;
}

CommutantAlgebra commutant_of(const BlockAlgebra& alg, const Pvm& q, const Tolerances& tol) {
  const auto diag = validate_pvm(alg, q, tol);
  if (!diag.is_valid) {
    std::ostringstream os;
    os << "reference PVM rejected (idempotency " << diag.idempotency_residual << ", sum residual "
       << diag.sum_residual << ", negativity " << diag.max_negativity << ")";
    throw PreconditionError(os.str());
  }
  CommutantAlgebra c;
  c.ambient = alg;
  std::vector<int> dims;
  for (std::size_t k = 0; k < alg.num_blocks(); ++k) {
    int total = 0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      Matrix b = range_basis(q[j].block(k));
      if (b.cols() == 0) continue;
      total += static_cast<int>(b.cols());
      dims.push_back(static_cast<int>(b.cols()));
      c.parent.push_back(k);
      c.label.push_back(j);
      c.basis.push_back(std::move(b));
    }
    if (total != alg.dim(k)) {
      std::ostringstream os;
      os << "reference PVM ranks sum to " << total << " in block " << k << " of dimension " << alg.dim(k);
      throw PreconditionError(os.str());
    }
  }
  c.algebra = BlockAlgebra(dims);
  return c;
}

AlgebraElement CommutantAlgebra::compress(const AlgebraElement& x) const {
  require_shape(ambient, x, "ambient element");
  std::vector<Matrix> blocks;
  for (std::size_t b = 0; b < basis.size(); ++b) blocks.push_back(basis[b].adjoint() * x.block(parent[b]) * basis[b]);
  return AlgebraElement(std::move(blocks));
}

AlgebraElement CommutantAlgebra::expand(const AlgebraElement& y) const {
  require_shape(algebra, y, "commutant element");
  AlgebraElement x = AlgebraElement::zero(ambient);
  for (std::size_t b = 0; b < basis.size(); ++b) x.block(parent[b]) += basis[b] * y.block(b) * basis[b].adjoint();
  return x;
}

State CommutantAlgebra::restrict(const State& phi, const Tolerances& tol) const {
  return State::from_densities(algebra, compress(phi.density()).hermitian_part(), tol);
}

CompressedPovm compress_povm(const BlockAlgebra& alg, const Pvm& p_in, const Pvm& q_in, const State& phi,
                             const Tolerances& tol) {
  require_state_on(alg, phi);
  require_valid_pvm(alg, p_in, tol);
  const Pvm p = symmetrized(p_in);
  const Pvm q = symmetrized(q_in);

  CompressedPovm out;
  out.commutant = commutant_of(alg, q, tol);
  out.phi_restricted = out.commutant.restrict(phi, tol);
  Complex cross = 0.0;
  AlgebraElement squares = AlgebraElement::zero(alg);
  for (const auto& pi : p.elements) {
    AlgebraElement ai = out.commutant.compress(pi).hermitian_part();
    AlgebraElement amb = out.commutant.expand(ai);
    out.distance_sq += phi_norm_sq(phi, pi - amb);
    cross += phi(amb * pi);
    squares += amb * amb;
    out.a.elements.push_back(std::move(ai));
    out.a_ambient.elements.push_back(std::move(amb));
  }
  out.commutation_defect = commutation_defect(phi, p, q);
  out.povm_defect = 1.0 - phi(squares).real();
  out.identity_residual = std::abs(out.commutation_defect - out.distance_sq - out.povm_defect);
  out.imaginary_part = cross.imag();
  return out;
}

RepairReport repair(const BlockAlgebra& alg, const State& phi, const Pvm& p_in, const Pvm& q_in,
                    const Tolerances& tol) {
  RepairReport rep;
  rep.compressed = compress_povm(alg, p_in, q_in, phi, tol);
  const Pvm p = symmetrized(p_in);
  const Pvm q = symmetrized(q_in);
  const CompressedPovm& c = rep.compressed;
  rep.epsilon_c = c.commutation_defect;
  rep.identity_residual = c.identity_residual;
  rep.inner = orthogonalize(c.commutant.algebra, c.phi_restricted, c.a, tol);
  for (std::size_t i = 0; i < p.size(); ++i) {
    AlgebraElement pr = c.commutant.expand(rep.inner.pvm[i]).hermitian_part();
    rep.error += phi_norm_sq(phi, p[i] - pr);
    for (const auto& qj : q.elements)
      rep.commutator_residual = std::max(rep.commutator_residual, frobenius_norm(commutator(pr, qj)));
    rep.pvm_repaired.elements.push_back(std::move(pr));
  }
  return rep;
}

std::vector<Check> certify(const BlockAlgebra& alg, const RepairReport& r, const Tolerances& tol) {
  std::vector<Check> out;
  out.push_back(Check::at_most("bound_10eps", r.error, 10.0 * r.epsilon_c + tol.cert_tol));
  out.push_back(Check::at_most("commutation", r.commutator_residual, tol.cert_tol));
  out.push_back(Check::at_most("defect_identity", r.identity_residual, tol.cert_tol));
  const auto d = validate_pvm(alg, r.pvm_repaired, tol);
  out.push_back(Check::at_most("pvm_idempotency", d.idempotency_residual, tol.cert_tol));
  out.push_back(Check::at_most("pvm_sum", d.sum_residual, tol.cert_tol));
  out.push_back(Check::at_most("inner_bound_9eps", r.inner.error, 9.0 * r.inner.defect + tol.cert_tol));
  return out;
}

AlgebraElement pvm_to_unitary(const BlockAlgebra& alg, const Pvm& p, const Tolerances& tol) {
  require_valid_pvm(alg, p, tol);
  const int n = static_cast<int>(p.size());
  AlgebraElement u = AlgebraElement::zero(alg);
  for (int k = 1; k <= n; ++k) {
    const Complex w = std::polar(1.0, 2.0 * std::numbers::pi * k / n);
    u += w * p[static_cast<std::size_t>(k - 1)].hermitian_part();
  }
  return u;
}

Pvm unitary_to_pvm(const BlockAlgebra& alg, const AlgebraElement& u, int n, const Tolerances& tol) {
  require_shape(alg, u, "unitary");
  if (n < 1) throw PreconditionError("unitary_to_pvm: order must be positive");
  const AlgebraElement one = AlgebraElement::identity(alg);
  const double unit = frobenius_norm(u.adjoint() * u - one);
  if (unit > tol.cert_tol) {
    std::ostringstream os;
    os << "unitary_to_pvm: element is not unitary (residual " << unit << ")";
    throw PreconditionError(os.str());
  }
  std::vector<AlgebraElement> powers;  // u^1 .. u^n
  AlgebraElement acc = one;
  for (int k = 1; k <= n; ++k) {
    acc = acc * u;
    powers.push_back(acc);
  }
  const double order = frobenius_norm(powers.back() - one);
  if (order > tol.cert_tol) {
    std::ostringstream os;
    os << "unitary_to_pvm: u^" << n << " differs from 1 by " << order;
    throw PreconditionError(os.str());
  }
  Pvm p;
  for (int j = 1; j <= n; ++j) {
    AlgebraElement pj = AlgebraElement::zero(alg);
    for (int k = 1; k <= n; ++k) {
      const Complex w = std::polar(1.0, -2.0 * std::numbers::pi * ((static_cast<long>(j) * k) % n) / n);
      pj += w * powers[static_cast<std::size_t>(k - 1)];
    }
    pj *= 1.0 / n;
    p.elements.push_back(pj.hermitian_part());
  }
  return p;
}

UnitaryRepair repair_unitary_pair(const BlockAlgebra& alg, const State& phi, const AlgebraElement& u, int n,
                                  const AlgebraElement& v, int m, const Tolerances& tol) {
  require_state_on(alg, phi);
  const Pvm q = unitary_to_pvm(alg, u, n, tol);
  const Pvm p = unitary_to_pvm(alg, v, m, tol);

  UnitaryRepair out;
  out.repair = repair(alg, phi, p, q, tol);
  out.v_prime = pvm_to_unitary(alg, out.repair.pvm_repaired, tol);

  double lhs = 0.0;
  for (int i = 1; i <= n; ++i) {
    const AlgebraElement ui = power(u, i, alg);
    for (int j = 1; j <= m; ++j) lhs += commutator_phi_norm_sq(phi, ui, power(v, j, alg));
  }
  out.lhs = lhs / (static_cast<double>(n) * m);

  double rhs = 0.0;
  for (int j = 1; j <= m; ++j) rhs += phi_norm_sq(phi, power(v, j, alg) - power(out.v_prime, j, alg));
  out.rhs_error = rhs / m;
  out.commutator_residual = frobenius_norm(commutator(out.v_prime, u));
  return out;
}

std::vector<Check> certify(const UnitaryRepair& r, const Tolerances& tol) {
  std::vector<Check> out;
  out.push_back(Check::at_most("bound_10eps", r.rhs_error, 10.0 * r.lhs + tol.cert_tol));
  out.push_back(Check::at_most("commutation", r.commutator_residual, tol.cert_tol));
  out.push_back(Check::at_most("pvm_bound_10eps", r.repair.error, 10.0 * r.repair.epsilon_c + tol.cert_tol));
  return out;
}

}  // namespace povmround
