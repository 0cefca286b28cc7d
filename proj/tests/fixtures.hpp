#pragma once

// Small hand-checkable models used across the test suites.

#include "cmseq/core.hpp"

#include <initializer_list>

namespace cmseq::testing {

inline Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

inline MatrixList scalars(std::initializer_list<double> values) {
  MatrixList out;
  for (double v : values) out.push_back(scalar(v));
  return out;
}

inline Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

/// x_0 = e_0, x_1 = x_0 + e_1 with unit variances; C = [[1,1],[1,2]].
inline ForwardMarkovModel unit_forward_markov() {
  return {{1, 1}, scalars({1.0}), scalars({1.0, 1.0})};
}

/// Scalar forward chain of length N with unit transitions and variances.
inline ForwardMarkovModel unit_forward_chain(int n) {
  ForwardMarkovModel m{{n, 1}, {}, {}};
  for (int k = 0; k < n; ++k) m.transitions.push_back(scalar(1.0));
  for (int k = 0; k <= n; ++k) m.noise_covs.push_back(scalar(1.0));
  return m;
}

/// Scalar forward CM_L, N = 2: x_0 = x_2 + e_0, x_1 = x_0 + x_2 + e_1, x_2 = e_2.
inline CmModel unit_cml() {
  CmModel m;
  m.shape = {2, 1};
  m.direction = Direction::Forward;
  m.conditioning = Conditioning::Last;
  m.transitions = scalars({1.0});       // G_{1,0}
  m.couplings = scalars({1.0, 1.0});    // G_{0,2}, G_{1,2}
  m.noise_covs = scalars({1.0, 1.0, 1.0});
  return m;
}

/// Scalar reciprocal model with R^0 = (2,1,3), R^+ = (1,1) and a zero corner.
inline ReciprocalModel unit_reciprocal() {
  return {{2, 1}, scalars({2.0, 1.0, 3.0}), scalars({1.0, 1.0}), scalar(0.0)};
}

}  // namespace cmseq::testing
