#pragma once

// Seeded instance generators. Output is a deterministic function of
// (kind, seed, params) and always passes the validators of the objects it
// contains.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "povmround/algebra.hpp"
#include "povmround/random.hpp"
#include "povmround/serialization.hpp"

namespace povmround {

using ParamMap = std::map<std::string, std::string>;

/// Known generator kinds, in a fixed order.
const std::vector<std::string>& generator_kinds();

/// Throws PreconditionError on an unknown kind, an unknown parameter or a
/// parameter out of range.
///
/// Kinds and parameters (defaults in brackets):
///   random_povm_near_pvm  dims [2,3], n [3], delta [0.05], state [random], copies [1]
///   random_state          dims [3], state [random]
///   paper_counterexample  delta [0.01]
///   linfty2_family        c [0.1]
///   rotated_pvm_pair      dims [2], n [2], theta [0.1], eta [0], basis [haar], state [trace]
///   random_functionals    dims [3], n [3], diagonal [0]
/// dims is a comma-separated list; state is one of trace, random, rank1.
Instance gen_instance(const std::string& kind, std::uint64_t seed, const ParamMap& params = {});

/// Normalized seeded random PSD density (square of a Gaussian matrix).
State random_state(Rng& rng, const BlockAlgebra& alg);
/// A vector state with a Gaussian vector.
State random_vector_state(Rng& rng, const BlockAlgebra& alg);
/// kind is trace, random or rank1.
State make_state(Rng& rng, const BlockAlgebra& alg, const std::string& kind);

/// Spectral projections of a Haar-random basis with a random rank pattern.
Pvm random_pvm(Rng& rng, const BlockAlgebra& alg, int n);

/// p_i + delta h_i shifted to positivity and renormalized to sum to one.
Povm random_povm_near_pvm(Rng& rng, const BlockAlgebra& alg, int n, double delta);

/// The three-outcome POVM on M_2 with every phi(a_i) <= 1/2 for the
/// normalized trace.
Povm counterexample_povm(double delta);

/// a = (x (x) 1_m) blockwise, on dims multiplied by m.
AlgebraElement tensor_identity(const AlgebraElement& x, int m);

/// Ranges for sweep instances.
struct SweepRanges {
  int max_blocks = 3;
  int max_block_dim = 8;
  int max_total_dim = 12;
  int min_outputs = 2;
  int max_outputs = 5;
  double max_delta = 0.2;
};

/// random_povm_near_pvm with dims, n, delta and state kind drawn from seed.
Instance sweep_instance(std::uint64_t seed, const SweepRanges& ranges);

}  // namespace povmround
