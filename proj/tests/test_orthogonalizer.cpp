#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "povmround/errors.hpp"
#include "povmround/generators.hpp"
#include "povmround/orthogonalizer.hpp"
#include "test_util.hpp"

using namespace povmround;
using namespace povmround::test;

namespace {

const Tolerances kTol;

Povm linfty2(double) { return Povm{{el({diag({1}), diag({0.5})}), el({diag({0}), diag({0.5})})}}; }

State linfty2_state(double c) {
  return State::from_densities(BlockAlgebra({1, 1}), el({diag({1.0 - c}), diag({c})}));
}

}  // namespace

TEST_CASE("selection on an exact PVM returns it") {
  const BlockAlgebra alg({2});
  const Povm a{{el({unit(2, 0)}), el({unit(2, 1)})}};
  const auto s = select_projections(alg, State::normalized_trace(alg), a, kTol);
  CHECK(s.value == doctest::Approx(1.0));
  CHECK(max_block_diff(s.q[0], a[0]) <= 1e-12);
  CHECK(max_block_diff(s.q[1], a[1]) <= 1e-12);
  CHECK(s.ranks[0] == std::vector<int>{1, 1});
}

TEST_CASE("selection on the two-point family") {
  const BlockAlgebra alg({1, 1});
  const auto s = select_projections(alg, linfty2_state(0.1), linfty2(0.1), kTol);
  CHECK(s.value == doctest::Approx(0.95).epsilon(1e-14));
  CHECK(s.lp_value == doctest::Approx(0.95).epsilon(1e-14));
  // Coordinate 1 goes to output 1; the tie at coordinate 2 goes to the lower output index.
  CHECK(s.ranks[0] == std::vector<int>{1, 0});
  CHECK(s.ranks[1] == std::vector<int>{1, 0});
}

TEST_CASE("selection on the three-outcome M2 family splits the rank") {
  const BlockAlgebra alg({2});
  const State tr = State::normalized_trace(alg);
  for (double delta : {0.001, 0.01}) {
    const Povm a = counterexample_povm(delta);
    double max_phi = 0.0;
    for (const auto& ai : a.elements) max_phi = std::max(max_phi, tr(ai).real());
    CHECK(max_phi <= 0.5 + 1e-12);
    const auto s = select_projections(alg, tr, a, kTol);
    CHECK(s.value >= 1.0 - defect(tr, a) - kTol.cert_tol);
    int nonzero = 0;
    for (int r : s.ranks[0]) nonzero += r > 0;
    CHECK(nonzero >= 2);
  }
}

TEST_CASE("complete_polar examples") {
  const BlockAlgebra m2({2});
  const std::vector<AlgebraElement> one{AlgebraElement::identity(m2)};

  const Matrix unitary = mat(2, 2, {0.0, Complex(0, 1), 1.0, 0.0});
  const auto u = complete_polar(m2, BlockColumn{{unitary}, 1}, one, kTol);
  CHECK((u.blocks[0] - unitary).norm() <= 1e-12);

  const BlockAlgebra c({1});
  const auto z = complete_polar(c, BlockColumn{{Matrix::Zero(1, 1)}, 1}, {AlgebraElement::identity(c)}, kTol);
  CHECK(std::abs(z.blocks[0](0, 0) - Complex(1.0)) <= 1e-12);

  const auto d = complete_polar(m2, BlockColumn{{diag({0.6, 0})}, 1}, one, kTol);
  CHECK((d.blocks[0] - Matrix::Identity(2, 2)).norm() <= 1e-12);
}

TEST_CASE("complete_polar preconditions") {
  const BlockAlgebra m2({2});
  const std::vector<AlgebraElement> short_rank{el({unit(2, 0)})};
  CHECK_THROWS_AS(complete_polar(m2, BlockColumn{{diag({0.6, 0})}, 1}, short_rank, kTol), PreconditionError);

  // Rank sum 2 but x has a column outside the range of diag(q_1, q_2).
  const std::vector<AlgebraElement> q{el({unit(2, 0)}), el({unit(2, 0)})};
  Matrix x = Matrix::Zero(4, 2);
  x(1, 1) = 1.0;
  CHECK_THROWS_AS(complete_polar(m2, BlockColumn{{x}, 2}, q, kTol), PreconditionError);
}

TEST_CASE("orthogonalize leaves a PVM unchanged") {
  const BlockAlgebra alg({3});
  Rng rng(5);
  const Pvm p = random_pvm(rng, alg, 3);
  const State phi = random_state(rng, alg);
  const auto r = orthogonalize(alg, phi, p.as_povm(), kTol);
  CHECK(r.error <= 1e-12);
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(max_block_diff(r.pvm[i], p[i]) <= 1e-8);
  CHECK(all_passed(certify(alg, r, kTol)));
}

TEST_CASE("orthogonalize on the two-point family matches the enumeration minimum") {
  const BlockAlgebra alg({1, 1});
  for (double c : {0.02, 0.1, 0.5}) {
    const auto r = orthogonalize(alg, linfty2_state(c), linfty2(c), kTol);
    const double best = oracle::abelian_min_error({{1.0, 0.5}, {0.0, 0.5}}, {1.0 - c, c});
    CHECK(std::abs(best - c / 2) <= 1e-15);
    CHECK(std::abs(r.defect - c / 2) <= 1e-12);
    CHECK(std::abs(r.error - best) <= 1e-10);
    CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(all_passed(certify(alg, r, kTol)));
  }
}

TEST_CASE("orthogonalize on the three-outcome M2 family") {
  const BlockAlgebra alg({2});
  const State tr = State::normalized_trace(alg);
  const auto r = orthogonalize(alg, tr, counterexample_povm(0.01), kTol);
  CHECK(r.defect <= 0.06);
  CHECK(r.error <= 9.0 * r.defect);
  CHECK(all_passed(certify(alg, r, kTol)));
}

TEST_CASE("error_ratio conventions") {
  CHECK(error_ratio(0.0, 0.0, 1e-9) == 0.0);
  CHECK(std::isinf(error_ratio(0.5, 0.0, 1e-9)));
  CHECK(error_ratio(0.1, 0.2, 1e-9) == doctest::Approx(0.5));
}

TEST_CASE("property: rounding certificates on random instances") {
  for (std::uint64_t seed = 100; seed < 220; ++seed) {
    const Instance inst = sweep_instance(seed, SweepRanges{});
    const BlockAlgebra& alg = inst.alg;
    const State& phi = *inst.state;
    const Povm& a = *inst.povm;
    const auto r = orthogonalize(alg, phi, a, kTol);
    CAPTURE(seed);
    CHECK(validate_pvm(alg, r.pvm, kTol).is_valid);
    CHECK(r.certificates.idempotency <= 1e-8);
    CHECK(r.error <= 9.0 * r.defect + 1e-7);
    CHECK(r.certificates.midpoint <= 1e-7);
    CHECK(r.certificates.term_projection <= r.defect + 1e-7);
    CHECK(r.certificates.term_modulus <= r.defect + 1e-7);
    CHECK(r.certificates.term_midpoint <= r.defect + 1e-7);
    const double sum_sq = 1.0 - r.defect;
    CHECK(sum_sq >= std::pow(std::max(0.0, 1.0 - std::sqrt(r.error)), 2) - 1e-7);
    CHECK(r.selection.lp_value >= sum_sq - kTol.cert_tol);
    for (std::size_t k = 0; k < alg.num_blocks(); ++k) {
      int total = 0;
      for (int rk : r.selection.ranks[k]) total += rk;
      CHECK(total == alg.dim(k));
    }
    CHECK(all_passed(certify(alg, r, kTol)));
  }
}

TEST_CASE("property: abelian instances never beat the enumeration minimum") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    Rng rng(seed);
    const int d = rng.integer(1, 5);
    const int n = rng.integer(2, 4);
    const BlockAlgebra alg(std::vector<int>(static_cast<std::size_t>(d), 1));
    std::vector<std::vector<double>> av(static_cast<std::size_t>(n), std::vector<double>(d));
    std::vector<double> w(d);
    double wsum = 0.0;
    for (int k = 0; k < d; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += (av[i][k] = rng.uniform());
      for (int i = 0; i < n; ++i) av[i][k] /= s;
      wsum += (w[k] = rng.uniform(0.05, 1.0));
    }
    for (double& x : w) x /= wsum;
    Povm a;
    for (int i = 0; i < n; ++i) {
      std::vector<Matrix> blocks;
      for (int k = 0; k < d; ++k) blocks.push_back(Matrix::Constant(1, 1, av[i][k]));
      a.elements.emplace_back(std::move(blocks));
    }
    std::vector<Matrix> rho;
    for (int k = 0; k < d; ++k) rho.push_back(Matrix::Constant(1, 1, w[k]));
    const State phi = State::from_densities(alg, AlgebraElement(rho));
    const auto r = orthogonalize(alg, phi, a, kTol);
    CAPTURE(seed);
    CHECK(std::abs(r.defect - oracle::abelian_defect(av, w)) <= 1e-12);
    CHECK(r.error >= oracle::abelian_min_error(av, w) - 1e-12);
    CHECK(r.error <= 9.0 * r.defect + 1e-12);
  }
}

TEST_CASE("generated algebra examples") {
  const BlockAlgebra m2({2});
  const auto g1 = decompose_generated_algebra(m2, {el({diag({1, 2})})}, kTol);
  CHECK(g1.algebra.dims() == std::vector<int>{1, 1});
  CHECK(g1.multiplicities == std::vector<int>{1, 1});

  const auto g2 = decompose_generated_algebra(m2, {AlgebraElement::identity(m2)}, kTol);
  CHECK(g2.algebra.dims() == std::vector<int>{1});
  CHECK(g2.multiplicities == std::vector<int>{2});
  CHECK(g2.commutant_basis.size() == 4);

  const BlockAlgebra m4({4});
  const auto g3 = decompose_generated_algebra(m4, {tensor_identity(el({unit(2, 0)}), 2)}, kTol);
  CHECK(g3.algebra.dims() == std::vector<int>{1, 1});
  CHECK(g3.multiplicities == std::vector<int>{2, 2});
  CHECK(g3.commutant_basis.size() == 8);
  CHECK(g3.residual <= 10.0 * kTol.cert_tol);
  const Matrix& w = g3.change_of_basis[0];
  CHECK((w.adjoint() * w - Matrix::Identity(4, 4)).norm() <= 1e-12);
}

TEST_CASE("symmetry-preserving rounding examples") {
  const BlockAlgebra m2({2});
  const Povm diag_povm{{el({diag({0.9, 0.2})}), el({diag({0.1, 0.8})})}};
  const auto r = orthogonalize_symmetry_preserving(m2, State::normalized_trace(m2), diag_povm, kTol);
  for (const auto& p : r.pvm.elements) CHECK(std::abs(p.block(0)(0, 1)) <= 1e-12);
  CHECK(r.symmetry_residual <= 1e-12);
  CHECK(all_passed(certify(m2, r, kTol)));

  const auto single = orthogonalize_symmetry_preserving(m2, State::normalized_trace(m2),
                                                        Povm{{AlgebraElement::identity(m2)}}, kTol);
  CHECK(max_block_diff(single.pvm[0], AlgebraElement::identity(m2)) <= 1e-12);
  CHECK(single.symmetry_residual <= 1e-12);
}

TEST_CASE("symmetry-preserving rounding of tensored POVMs matches plain rounding") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    const BlockAlgebra small({2});
    const BlockAlgebra big({4});
    const Povm a_small = random_povm_near_pvm(rng, small, 3, 0.1);
    Povm a;
    for (const auto& ai : a_small.elements) a.elements.push_back(tensor_identity(ai, 2));
    const State phi = random_state(rng, big);
    // Partial trace over the second tensor factor, by hand.
    Matrix rho = Matrix::Zero(2, 2);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c)
        for (int j = 0; j < 2; ++j) rho(r, c) += phi.density(0)(r * 2 + j, c * 2 + j);
    const State phi_small = State::from_densities(small, el({rho}));
    const auto plain = orthogonalize(small, phi_small, a_small, kTol);
    const auto sym = orthogonalize_symmetry_preserving(big, phi, a, kTol);
    CAPTURE(seed);
    for (std::size_t i = 0; i < a.size(); ++i)
      CHECK(max_block_diff(sym.pvm[i], tensor_identity(plain.pvm[i], 2)) <= 1e-8);
    CHECK(std::abs(sym.error - plain.error) <= 1e-10);
    CHECK(sym.symmetry_residual <= 1e-8);
    CHECK(all_passed(certify(big, sym, kTol)));
  }
}
