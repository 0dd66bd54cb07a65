#include <doctest.h>

#include "oracles.hpp"
#include "povmround/errors.hpp"
#include "povmround/generators.hpp"
#include "povmround/majorant.hpp"
#include "test_util.hpp"

using namespace povmround;
using namespace povmround::test;

namespace {

const Tolerances kTol;

FunctionalFamily random_family(Rng& rng, const BlockAlgebra& alg, int n, bool diagonal) {
  FunctionalFamily f;
  for (int i = 0; i < n; ++i) {
    std::vector<Matrix> blocks;
    for (int d : alg.dims()) {
      if (diagonal) {
        Matrix m = Matrix::Zero(d, d);
        for (int r = 0; r < d; ++r) m(r, r) = rng.uniform();
        blocks.push_back(m);
      } else {
        const Matrix g = rng.gaussian(d, rng.integer(1, d));
        blocks.push_back(g * g.adjoint() / d);
      }
    }
    f.elements.emplace_back(std::move(blocks));
  }
  return f;
}

/// A random POVM with full-rank elements: b_i = S^{-1/2} c_i S^{-1/2} with c_i = g g^*.
std::vector<AlgebraElement> random_dual(Rng& rng, const BlockAlgebra& alg, int n) {
  std::vector<std::vector<Matrix>> c(static_cast<std::size_t>(n));
  std::vector<Matrix> s;
  for (int d : alg.dims()) {
    Matrix sum = Matrix::Zero(d, d);
    for (int i = 0; i < n; ++i) {
      const Matrix g = rng.gaussian(d, d);
      c[i].push_back(g * g.adjoint());
      sum += c[i].back();
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(sum);
    s.push_back(es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().cast<Complex>().asDiagonal() *
                es.eigenvectors().adjoint());
  }
  std::vector<AlgebraElement> t;
  for (int i = 0; i < n; ++i) {
    std::vector<Matrix> blocks;
    for (std::size_t k = 0; k < s.size(); ++k) blocks.push_back(s[k] * c[i][k] * s[k]);
    t.emplace_back(std::move(blocks));
  }
  return t;
}

}  // namespace

TEST_CASE("a single functional is its own majorant") {
  const BlockAlgebra m2({2});
  const FunctionalFamily f{{el({mat(2, 2, {0.7, 0.2, 0.2, 0.3})})}};
  const auto s = minimal_majorant(m2, f, kTol);
  CHECK(std::abs(s.primal - 1.0) <= s.gap_tol);
  CHECK(max_block_diff(s.t[0], AlgebraElement::identity(m2)) <= 1e-8);
  CHECK(all_passed(verify_majorant_certificate(m2, f, s, kTol)));
}

TEST_CASE("diagonal family against the coordinatewise maximum") {
  const BlockAlgebra m2({2});
  const FunctionalFamily f{{el({diag({3, 1})}), el({diag({2, 2})})}};
  const auto exact = commuting_majorant_oracle(m2, f);
  CHECK((exact.z.block(0) - diag({3, 2})).norm() == 0.0);
  CHECK(exact.primal == 5.0);
  CHECK((exact.t[0].block(0) - diag({1, 0})).norm() == 0.0);
  const auto s = minimal_majorant(m2, f, kTol);
  CHECK(std::abs(s.primal - 5.0) <= s.gap_tol);
  CHECK(max_block_diff(s.z, exact.z) <= 1e-5);
  CHECK(all_passed(verify_majorant_certificate(m2, f, s, kTol)));
}

TEST_CASE("oracle tie-break goes to the lowest index") {
  const BlockAlgebra l2({1, 1});
  const FunctionalFamily f{{el({diag({1}), diag({0})}), el({diag({1}), diag({0})})}};
  const auto exact = commuting_majorant_oracle(l2, f);
  CHECK(exact.t[0].block(0)(0, 0) == Complex(1.0));
  CHECK(exact.t[1].block(0)(0, 0) == Complex(0.0));
  CHECK(exact.t[0].block(1)(0, 0) == Complex(1.0));
  CHECK_THROWS_AS(commuting_majorant_oracle(BlockAlgebra({2}), FunctionalFamily{{el({mat(2, 2, {1, 0.1, 0.1, 1})})}}),
                  PreconditionError);
}

TEST_CASE("non-commuting 2x2 family against the two-output closed form") {
  const BlockAlgebra m2({2});
  const Matrix a1 = unit(2, 0);
  const Matrix a2 = mat(2, 2, {0.5, 0.5, 0.5, 0.5});
  const double exact = oracle::two_output_majorant(a1, a2);
  CHECK(std::abs(exact - (1.0 + 1.0 / std::sqrt(2.0))) <= 1e-15);
  const auto s = minimal_majorant(m2, FunctionalFamily{{el({a1}), el({a2})}}, kTol);
  CHECK(std::abs(s.primal - 1.7071067811865475) <= s.gap_tol);
}

TEST_CASE("property: two-output families match the closed form") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    Rng rng(seed);
    const int d = rng.integer(1, 6);
    const BlockAlgebra alg({d});
    const FunctionalFamily f = random_family(rng, alg, 2, false);
    const auto s = minimal_majorant(alg, f, kTol);
    CAPTURE(seed);
    CHECK(std::abs(s.primal - oracle::two_output_majorant(f[0].block(0), f[1].block(0))) <= s.gap_tol);
  }
}

TEST_CASE("precondition errors") {
  const BlockAlgebra m2({2});
  CHECK_THROWS_AS(minimal_majorant(m2, FunctionalFamily{}, kTol), PreconditionError);
  CHECK_THROWS_AS(minimal_majorant(m2, FunctionalFamily{{el({diag({1, -0.5})})}}, kTol), PreconditionError);
}

TEST_CASE("tampered certificates are rejected") {
  const BlockAlgebra m2({2});
  const FunctionalFamily f{{el({unit(2, 0)}), el({mat(2, 2, {0.5, 0.5, 0.5, 0.5})})}};
  const auto s = minimal_majorant(m2, f, kTol);

  auto shrunk = s;
  shrunk.z = Complex(0.5) * shrunk.z;
  recompute(m2, f, shrunk);
  CHECK(first_failure(verify_majorant_certificate(m2, f, shrunk, kTol)) == "feasibility");

  auto halved = s;
  for (auto& ti : halved.t) ti = Complex(0.5) * ti;
  recompute(m2, f, halved);
  CHECK(halved.residuals.povm_sum == doctest::Approx(0.5 * std::sqrt(2.0)).epsilon(1e-8));
  CHECK_FALSE(all_passed(verify_majorant_certificate(m2, f, halved, kTol)));
}

TEST_CASE("property: weak duality against random POVMs") {
  Rng rng(11);
  const BlockAlgebra alg({2, 3});
  const FunctionalFamily f = random_family(rng, alg, 3, false);
  const auto s = minimal_majorant(alg, f, kTol);
  for (int trial = 0; trial < 100; ++trial) {
    const auto t = random_dual(rng, alg, 3);
    double value = 0.0;
    for (std::size_t i = 0; i < 3; ++i) value += trace(t[i] * f[i]).real();
    CHECK(value <= s.primal + 1e-10);
  }
}

TEST_CASE("property: barrier solutions on random families") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    Rng rng(seed);
    const BlockAlgebra alg({rng.integer(1, 4), rng.integer(1, 4)});
    const int n = rng.integer(1, 5);
    const bool diagonal = seed % 4 == 0;
    const FunctionalFamily f = random_family(rng, alg, n, diagonal);
    const auto s = minimal_majorant(alg, f, kTol);
    CAPTURE(seed);
    CHECK(s.residuals.feasibility >= -kTol.psd_tol);
    CHECK(s.gap >= -kTol.cert_tol);
    CHECK(s.gap <= s.gap_tol);
    CHECK(s.residuals.povm_sum <= 10.0 * kTol.cert_tol);
    CHECK(s.residuals.slackness <= 100.0 * s.gap_tol);
    CHECK(s.residuals.reconstruction <= 100.0 * s.gap_tol);
    CHECK(s.stationarity <= 10.0 * kTol.barrier.newton_tol);
    CHECK(all_passed(verify_majorant_certificate(alg, f, s, kTol)));
    if (diagonal) {
      const auto exact = commuting_majorant_oracle(alg, f);
      CHECK(std::abs(s.primal - exact.primal) <= s.gap_tol);
    }
  }
}
