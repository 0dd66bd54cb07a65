#pragma once

#include <cstdint>
#include <random>

#include "povmround/algebra.hpp"

namespace povmround {

/// Seedable generator with a platform-independent output stream.
///
/// Raw bits come from std::mt19937_64, whose sequence is fixed by the C++
/// standard. Distributions are derived here (53-bit uniforms, Box-Muller
/// normals) because the standard library distributions are not portable.
class Rng {
 public:
  static constexpr const char* kName = "mt19937_64/box-muller";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [lo, hi].
  int integer(int lo, int hi);
  /// Standard normal.
  double normal();
  /// Complex normal with E|z|^2 = 1.
  Complex complex_normal();

  /// Matrix of i.i.d. complex normals.
  Matrix gaussian(int rows, int cols);
  /// Haar-distributed unitary (QR of a Ginibre matrix with phase fix).
  Matrix haar_unitary(int dim);
  /// Hermitian matrix with operator norm one.
  Matrix hermitian_unit(int dim);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace povmround
