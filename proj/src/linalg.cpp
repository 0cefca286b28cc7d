#include "linalg.hpp"

#include <cmath>

namespace cmseq::linalg {

bool is_positive_definite(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  if (!m.allFinite()) return false;
  const double max_diag = m.diagonal().maxCoeff();
  if (!(max_diag > 0.0)) return false;
  Eigen::LDLT<Matrix> ldlt(symmetrized(m));
  if (ldlt.info() != Eigen::Success) return false;
  return (ldlt.vectorD().array() > rel_tol * max_diag).all();
}

double relative_asymmetry(const Matrix& m) {
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff() / scale;
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Matrix spd_inverse(const Matrix& m, const std::string& what) {
  if (!is_positive_definite(m)) {
    throw Error(ErrorCode::NotPositiveDefinite, what + ": not positive definite");
  }
  Eigen::LDLT<Matrix> ldlt(symmetrized(m));
  return symmetrized(ldlt.solve(Matrix::Identity(m.rows(), m.cols())));
}

Matrix cholesky_lower(const Matrix& m, const std::string& what) {
  if (!is_positive_definite(m)) {
    throw Error(ErrorCode::NotPositiveDefinite, what + ": not positive definite");
  }
  Eigen::LLT<Matrix> llt(symmetrized(m));
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, what + ": not positive definite");
  }
  return llt.matrixL();
}

DenseSolver::DenseSolver(const Matrix& m, const std::string& what) {
  const double scale = m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
  lu_.setThreshold(1e-12);
  lu_.compute(m);
  if (scale == 0.0 || !lu_.isInvertible()) {
    throw Error(ErrorCode::Singular, what + " is numerically singular");
  }
}

double relative_frobenius(const Matrix& a, const Matrix& b) {
  const double diff = (a - b).norm();
  const double ref = a.norm();
  return ref > 0.0 ? diff / ref : diff;
}

}  // namespace cmseq::linalg
