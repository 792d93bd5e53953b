#pragma once

// Small random-input generators shared by the property tests.

#include <Eigen/Dense>

#include "rpl/common/random.hpp"

namespace testgen {

inline Eigen::VectorXd vec(rpl::Rng& rng, int n, double lo = -1.0, double hi = 1.0) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

inline Eigen::MatrixXd mat(rpl::Rng& rng, int rows, int cols, double lo = -1.0, double hi = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = rng.uniform(lo, hi);
  return m;
}

inline double rel_error(double a, double b) { return std::abs(a - b) / std::max({1e-6, std::abs(a), std::abs(b)}); }

}  // namespace testgen
