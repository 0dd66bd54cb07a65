#pragma once

#include <cmath>
#include <initializer_list>
#include <vector>

#include "povmround/algebra.hpp"

namespace povmround::test {

inline Matrix mat(int rows, int cols, std::initializer_list<Complex> entries) {
  Matrix m(rows, cols);
  auto it = entries.begin();
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = *it++;
  return m;
}

inline Matrix diag(std::initializer_list<double> d) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double v : d) {
    m(i, i) = v;
    ++i;
  }
  return m;
}

inline AlgebraElement el(std::initializer_list<Matrix> blocks) { return AlgebraElement(std::vector<Matrix>(blocks)); }

/// e_{rr} in M_d.
inline Matrix unit(int d, int r) {
  Matrix m = Matrix::Zero(d, d);
  m(r, r) = 1.0;
  return m;
}

/// Rotation of e_11 by theta in M_2.
inline Matrix rotated_e11(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return mat(2, 2, {c * c, c * s, c * s, s * s});
}

inline double max_block_diff(const AlgebraElement& x, const AlgebraElement& y) {
  double m = 0.0;
  for (std::size_t k = 0; k < x.num_blocks(); ++k) m = std::max(m, (x.block(k) - y.block(k)).norm());
  return m;
}

}  // namespace povmround::test
