#pragma once

// Dense helpers shared by the library translation units.

#include "cmseq/core.hpp"

#include <string>

namespace cmseq::linalg {

/// Symmetric-pivoted LDL' test: every pivot must exceed rel_tol * max diagonal.
bool is_positive_definite(const Matrix& m, double rel_tol = 1e-12);

/// Max-abs asymmetry relative to the max-abs entry (0 for the zero matrix).
double relative_asymmetry(const Matrix& m);

Matrix symmetrized(const Matrix& m);

/// Inverse of a symmetric positive definite matrix; throws NotPositiveDefinite
/// naming `what` on failure.
Matrix spd_inverse(const Matrix& m, const std::string& what);

/// Lower Cholesky factor L with L L' = m; throws NotPositiveDefinite.
Matrix cholesky_lower(const Matrix& m, const std::string& what);

/// Full-pivot LU with the "numerically singular" threshold 1e-12 * max-abs.
class DenseSolver {
 public:
  DenseSolver(const Matrix& m, const std::string& what);
  Vector solve(const Vector& b) const { return lu_.solve(b); }
  Matrix solve(const Matrix& b) const { return lu_.solve(b); }

 private:
  Eigen::FullPivLU<Matrix> lu_;
};

/// ||a - b||_F / ||a||_F, or ||a - b||_F when a vanishes.
double relative_frobenius(const Matrix& a, const Matrix& b);

}  // namespace cmseq::linalg
