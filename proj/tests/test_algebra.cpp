#include <doctest.h>

#include "oracles.hpp"
#include "povmround/algebra.hpp"
#include "povmround/errors.hpp"
#include "povmround/generators.hpp"
#include "povmround/random.hpp"
#include "test_util.hpp"

using namespace povmround;
using namespace povmround::test;

TEST_CASE("block algebra rejects empty or nonpositive dimensions") {
  CHECK_THROWS_AS(BlockAlgebra(std::vector<int>{}), StructuralError);
  CHECK_THROWS_AS(BlockAlgebra(std::vector<int>{2, 0}), StructuralError);
  BlockAlgebra alg({2, 3});
  CHECK(alg.total_dim() == 5);
  CHECK(alg.num_blocks() == 2);
}

TEST_CASE("element shape mismatches are structural errors") {
  const BlockAlgebra alg({2});
  const AlgebraElement x = el({diag({1, 0, 0})});
  CHECK_THROWS_AS(require_shape(alg, x, "x"), StructuralError);
  CHECK_THROWS_AS(validate_povm(alg, Povm{{x}}, Tolerances{}), StructuralError);
  CHECK_THROWS_AS((AlgebraElement::identity(alg) + x), StructuralError);
}

TEST_CASE("state construction validates densities") {
  const BlockAlgebra alg({2});
  CHECK_NOTHROW(State::from_densities(alg, el({diag({0.5, 0.5})})));
  CHECK_THROWS_AS(State::from_densities(alg, el({diag({0.7, 0.7})})), ValidationError);
  CHECK_THROWS_AS(State::from_densities(alg, el({diag({1.5, -0.5})})), ValidationError);
  CHECK_THROWS_AS(State::from_densities(alg, el({mat(2, 2, {0.5, 0.3, 0.0, 0.5})})), ValidationError);

  const State tiny = State::from_densities(alg, el({mat(2, 2, {0.5, Complex(0.1, 1e-12), Complex(0.1, 0.0), 0.5})}));
  CHECK(tiny.symmetrization_residual() > 0.0);
  CHECK(hermiticity_residual(tiny.density()) == 0.0);
}

TEST_CASE("validate_povm examples") {
  const BlockAlgebra alg({2});
  const Tolerances tol;
  const auto exact = validate_povm(alg, Povm{{el({unit(2, 0)}), el({unit(2, 1)})}}, tol);
  CHECK(exact.is_valid);
  CHECK(exact.max_negativity == 0.0);
  CHECK(exact.sum_residual == 0.0);
  CHECK(exact.hermiticity_residual == 0.0);

  const auto doubled = validate_povm(alg, Povm{{el({unit(2, 0)}), el({unit(2, 0)})}}, tol);
  CHECK_FALSE(doubled.is_valid);
  CHECK(doubled.sum_residual == doctest::Approx(1.0));

  CHECK(validate_povm(alg, counterexample_povm(0.01), tol).is_valid);

  const auto negative = validate_povm(alg, Povm{{el({diag({1.1, 0.5})}), el({diag({-0.1, 0.5})})}}, tol);
  CHECK_FALSE(negative.is_valid);
  CHECK(negative.max_negativity == doctest::Approx(0.1));
}

TEST_CASE("validate_pvm rejects non-idempotent elements") {
  const BlockAlgebra alg({2});
  const Tolerances tol;
  CHECK(validate_pvm(alg, Pvm{{el({unit(2, 0)}), el({unit(2, 1)})}}, tol).is_valid);
  const auto half = validate_pvm(alg, Pvm{{el({diag({0.5, 0.5})}), el({diag({0.5, 0.5})})}}, tol);
  CHECK_FALSE(half.is_valid);
  CHECK(half.idempotency_residual > 0.3);
  CHECK_THROWS_AS(require_valid_pvm(alg, Pvm{{el({diag({0.5, 0.5})}), el({diag({0.5, 0.5})})}}, tol),
                  ValidationError);
}

TEST_CASE("phi_norm_sq examples") {
  const BlockAlgebra m2({2});
  const State tr = State::normalized_trace(m2);
  CHECK(phi_norm_sq(tr, AlgebraElement::zero(m2)) == 0.0);
  CHECK(phi_norm_sq(tr, el({unit(2, 0)})) == doctest::Approx(0.5));

  const BlockAlgebra l2({1, 1});
  const State w = State::from_densities(l2, el({diag({0.9}), diag({0.1})}));
  CHECK(phi_norm_sq(w, el({diag({0}), diag({1})})) == doctest::Approx(0.1));
}

TEST_CASE("defect examples") {
  const BlockAlgebra l2({1, 1});
  const State w = State::from_densities(l2, el({diag({0.9}), diag({0.1})}));
  const Povm fam{{el({diag({1}), diag({0.5})}), el({diag({0}), diag({0.5})})}};
  CHECK(defect(w, fam) == doctest::Approx(0.05).epsilon(1e-14));

  const BlockAlgebra m2({2});
  const State tr = State::normalized_trace(m2);
  CHECK(std::abs(defect(tr, Povm{{el({unit(2, 0)}), el({unit(2, 1)})}})) <= 1e-15);

  for (double delta : {0.001, 0.01, 0.1}) {
    const double d = defect(tr, counterexample_povm(delta));
    CHECK(d == doctest::Approx(1.0 - oracle::counterexample_sum_sq(delta)).epsilon(1e-12));
    CHECK(d <= 6.0 * delta);
  }
  // Frozen from the closed form at delta = 0.01.
  CHECK(defect(tr, counterexample_povm(0.01)) == doctest::Approx(0.045567817728729).epsilon(1e-12));
}

TEST_CASE("center-valued trace examples") {
  const BlockAlgebra m2({2});
  CHECK(center_valued_trace(m2, el({unit(2, 0)})).values[0] == Complex(0.5));
  const BlockAlgebra alg({2, 3});
  const auto one = center_valued_trace(alg, AlgebraElement::identity(alg));
  CHECK(one.values.size() == 2);
  CHECK(one.values[0] == Complex(1.0));
  CHECK(one.values[1] == Complex(1.0));
  const auto mixed = center_valued_trace(alg, el({unit(2, 0), Matrix::Identity(3, 3)}));
  CHECK(mixed.values[0] == Complex(0.5));
  CHECK(mixed.values[1] == Complex(1.0));
}

TEST_CASE("spectral_clusters examples") {
  const auto id = spectral_clusters(el({Matrix::Identity(3, 3)}), 1e-8);
  REQUIRE(id.blocks[0].size() == 1);
  CHECK(id.blocks[0][0].value == doctest::Approx(1.0));
  CHECK(id.blocks[0][0].basis.cols() == 3);

  CHECK(spectral_clusters(el({diag({1, 0.5, 0})}), 1e-8).blocks[0].size() == 3);

  const auto merged = spectral_clusters(el({diag({1, 1 + 1e-12, 0})}), 1e-8);
  REQUIRE(merged.blocks[0].size() == 2);
  CHECK(merged.blocks[0][0].value == doctest::Approx(1.0));
  CHECK(merged.blocks[0][0].basis.cols() == 2);
  CHECK(merged.blocks[0][1].value == doctest::Approx(0.0));

  CHECK_THROWS_AS(spectral_clusters(el({mat(2, 2, {1, 1, 0, 1})}), 1e-8), ValidationError);
}

TEST_CASE("commutator_phi_norm_sq examples") {
  const BlockAlgebra m2({2});
  const State tr = State::normalized_trace(m2);
  CHECK(commutator_phi_norm_sq(tr, el({diag({1, 2})}), el({diag({3, -1})})) == 0.0);
  const AlgebraElement x = el({unit(2, 0)});
  const AlgebraElement y = el({mat(2, 2, {0.5, 0.5, 0.5, 0.5})});
  CHECK(commutator_phi_norm_sq(tr, x, y) == doctest::Approx(0.25));
  CHECK(commutator_phi_norm_sq(tr, y, y) == 0.0);
}

TEST_CASE("range_basis extracts the range of a projection") {
  const Matrix p = rotated_e11(0.3);
  const Matrix b = range_basis(p);
  REQUIRE(b.cols() == 1);
  CHECK((b * b.adjoint() - p).norm() <= 1e-14);
  CHECK(range_basis(Matrix::Zero(3, 3)).cols() == 0);
}

TEST_CASE("property: defect range, seminorm, trace cyclicity, cluster reconstruction") {
  const Tolerances tol;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    Rng rng(seed);
    const BlockAlgebra alg({rng.integer(1, 4), rng.integer(1, 4)});
    const int n = rng.integer(1, 5);
    const Povm a = random_povm_near_pvm(rng, alg, n, rng.uniform(0.0, 0.3));
    const State phi = random_state(rng, alg);
    const double d = defect(phi, a);
    CHECK(d >= -tol.cert_tol);
    CHECK(d <= 1.0 + n * tol.cert_tol);

    std::vector<Matrix> xb, yb;
    for (int dk : alg.dims()) {
      xb.push_back(rng.gaussian(dk, dk));
      yb.push_back(rng.gaussian(dk, dk));
    }
    const AlgebraElement x(xb), y(yb);
    const double lhs = phi_norm_sq(phi, x + y);
    const double rhs = std::pow(std::sqrt(phi_norm_sq(phi, x)) + std::sqrt(phi_norm_sq(phi, y)), 2);
    CHECK(lhs <= rhs + 1e-10);

    const auto exy = center_valued_trace(alg, x * y);
    const auto eyx = center_valued_trace(alg, y * x);
    for (std::size_t k = 0; k < alg.num_blocks(); ++k) CHECK(std::abs(exy.values[k] - eyx.values[k]) <= 1e-10);

    const AlgebraElement h = a[0];
    const auto cl = spectral_clusters(h, tol.cluster_tol);
    for (std::size_t k = 0; k < alg.num_blocks(); ++k) {
      Matrix rec = Matrix::Zero(alg.dim(k), alg.dim(k));
      for (const auto& c : cl.blocks[k]) rec += c.value * c.basis * c.basis.adjoint();
      CHECK((rec - h.block(k)).norm() <= std::max(tol.cluster_tol * alg.dim(k), 1e-8));
      for (std::size_t i = 1; i < cl.blocks[k].size(); ++i)
        CHECK(cl.blocks[k][i - 1].value - cl.blocks[k][i].value > tol.cluster_tol);
    }

    const Pvm p = random_pvm(rng, alg, n);
    CHECK(std::abs(defect(phi, p.as_povm())) <= n * tol.cert_tol);
  }
}

TEST_CASE("tolerance overrides") {
  Tolerances tol;
  tol.apply_overrides("cert_tol=1e-7,gap_tol=2e-6");
  CHECK(tol.cert_tol == 1e-7);
  CHECK(tol.barrier.gap_tol == 2e-6);
  CHECK_THROWS_AS(tol.apply_overrides("bogus=1"), ValidationError);
  CHECK_THROWS_AS(tol.apply_overrides("cert_tol"), ValidationError);
  tol.set("mu_shrink", 1.5);
  CHECK_THROWS_AS(tol.validate(), ValidationError);
}
