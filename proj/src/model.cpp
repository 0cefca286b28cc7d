#include "cmseq/model.hpp"

#include "linalg.hpp"

#include <string>

namespace cmseq {

namespace {

constexpr double kSymmetryTolerance = 1e-10;

std::string field(const char* name, std::size_t index) {
  return std::string(name) + "[" + std::to_string(index) + "]";
}

void check_count(const MatrixList& list, std::size_t expected, const char* name) {
  if (list.size() != expected) {
    throw Error(ErrorCode::DimensionMismatch, std::string(name) + ": expected " + std::to_string(expected) +
                                                  " matrices, got " + std::to_string(list.size()));
  }
}

void check_square(const Matrix& m, int dim, const std::string& what) {
  if (m.rows() != dim || m.cols() != dim) {
    throw Error(ErrorCode::DimensionMismatch, what + ": expected " + std::to_string(dim) + "x" +
                                                  std::to_string(dim) + ", got " + std::to_string(m.rows()) +
                                                  "x" + std::to_string(m.cols()));
  }
  if (!m.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, what + ": non-finite entry");
  }
}

void check_blocks(const MatrixList& list, std::size_t expected, int dim, const char* name) {
  check_count(list, expected, name);
  for (std::size_t i = 0; i < list.size(); ++i) check_square(list[i], dim, field(name, i));
}

void check_covariances(const MatrixList& covs, std::size_t expected, int dim, const char* name) {
  check_blocks(covs, expected, dim, name);
  for (std::size_t i = 0; i < covs.size(); ++i) {
    if (linalg::relative_asymmetry(covs[i]) > kSymmetryTolerance) {
      throw Error(ErrorCode::NotPositiveDefinite, field(name, i) + ": not symmetric");
    }
    if (!linalg::is_positive_definite(covs[i])) {
      throw Error(ErrorCode::NotPositiveDefinite, field(name, i) + ": not positive definite");
    }
  }
}

std::size_t count(int n) { return static_cast<std::size_t>(n); }

BlockMatrix assemble_reciprocal(const ReciprocalModel& m) {
  const int n = m.shape.horizon;
  BlockMatrix t(m.shape);
  for (int k = 0; k <= n; ++k) t.block(k, k) = m.diag_terms[count(k)];
  for (int k = 0; k < n; ++k) {
    t.block(k, k + 1) = -m.super_terms[count(k)];
    t.block(k + 1, k) = -m.super_terms[count(k)].transpose();
  }
  t.block(0, n) = -m.corner_term.transpose();
  t.block(n, 0) = -m.corner_term;
  return t;
}

BlockMatrix block_diagonal(const SequenceShape& shape, const MatrixList& blocks) {
  BlockMatrix p(shape);
  for (int k = 0; k <= shape.horizon; ++k) p.block(k, k) = blocks[count(k)];
  return p;
}

const MatrixList* white_noise_covs(const ModelSpec& model) {
  if (const auto* m = std::get_if<ForwardMarkovModel>(&model)) return &m->noise_covs;
  if (const auto* m = std::get_if<BackwardMarkovModel>(&model)) return &m->noise_covs;
  if (const auto* m = std::get_if<CmModel>(&model)) return &m->noise_covs;
  return nullptr;
}

}  // namespace

void validate(const ModelSpec& model) {
  const SequenceShape& shape = shape_of(model);
  shape.validate();
  const int n = shape.horizon;
  const int dim = shape.dim;
  if (!std::holds_alternative<ForwardMarkovModel>(model) && !std::holds_alternative<BackwardMarkovModel>(model) &&
      n < 2) {
    throw Error(ErrorCode::InvalidArgument, std::string(model_kind_name(kind_of(model))) +
                                                " models need horizon N >= 2, got " + std::to_string(n));
  }
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ForwardMarkovModel> || std::is_same_v<T, BackwardMarkovModel>) {
          check_blocks(m.transitions, count(n), dim, "transitions");
          check_covariances(m.noise_covs, count(n + 1), dim, "noise_covs");
        } else if constexpr (std::is_same_v<T, ReciprocalModel>) {
          check_blocks(m.diag_terms, count(n + 1), dim, "diag_terms");
          check_blocks(m.super_terms, count(n), dim, "super_terms");
          check_square(m.corner_term, dim, "corner_term");
          for (std::size_t i = 0; i < m.diag_terms.size(); ++i) {
            if (linalg::relative_asymmetry(m.diag_terms[i]) > kSymmetryTolerance) {
              throw Error(ErrorCode::NotPositiveDefinite, field("diag_terms", i) + ": not symmetric");
            }
          }
          if (!linalg::is_positive_definite(assemble_reciprocal(m).dense())) {
            throw Error(ErrorCode::NotWellPosed, "reciprocal matrix R: not positive definite");
          }
        } else {
          check_blocks(m.transitions, count(n - 1), dim, "transitions");
          check_blocks(m.couplings, count(n), dim, "couplings");
          check_covariances(m.noise_covs, count(n + 1), dim, "noise_covs");
        }
      },
      model);
}

BlockMatrix assemble_system_matrix(const ModelSpec& model) {
  validate(model);
  const SequenceShape& shape = shape_of(model);
  const int n = shape.horizon;
  const Matrix identity = Matrix::Identity(shape.dim, shape.dim);

  if (const auto* m = std::get_if<ReciprocalModel>(&model)) return assemble_reciprocal(*m);

  BlockMatrix t(shape);
  for (int k = 0; k <= n; ++k) t.block(k, k) = identity;

  if (const auto* m = std::get_if<ForwardMarkovModel>(&model)) {
    for (int k = 1; k <= n; ++k) t.block(k, k - 1) = -m->transitions[count(k - 1)];
  } else if (const auto* m = std::get_if<BackwardMarkovModel>(&model)) {
    for (int k = 0; k < n; ++k) t.block(k, k + 1) = -m->transitions[count(k)];
  } else {
    const auto& cm = std::get<CmModel>(model);
    const int c = cm.conditioning_index();
    for (int k = 0; k <= n; ++k) {
      const CmRowLayout row = cm.row_layout(k);
      if (row.neighbor_col >= 0) t.block(k, row.neighbor_col) -= cm.transitions[count(row.transition_index)];
      if (row.coupling_index >= 0) t.block(k, c) -= cm.couplings[count(row.coupling_index)];
    }
  }
  return t;
}

BlockMatrix assemble_noise_covariance(const ModelSpec& model) {
  if (std::holds_alternative<ReciprocalModel>(model)) return assemble_system_matrix(model);
  validate(model);
  return block_diagonal(shape_of(model), *white_noise_covs(model));
}

Matrix raw_information_product(const ModelSpec& model) {
  const BlockMatrix t = assemble_system_matrix(model);
  const SequenceShape& shape = t.shape();
  if (const MatrixList* covs = white_noise_covs(model)) {
    BlockMatrix weighted(shape);
    for (int k = 0; k <= shape.horizon; ++k) {
      weighted.block(k, k) = linalg::spd_inverse((*covs)[count(k)], field("noise_covs", count(k)));
    }
    return t.dense().transpose() * weighted.dense() * t.dense();
  }
  // Reciprocal: P = T = R.
  Eigen::LDLT<Matrix> ldlt(t.dense());
  return t.dense().transpose() * ldlt.solve(t.dense());
}

BlockMatrix information_matrix(const ModelSpec& model) {
  return BlockMatrix(shape_of(model), linalg::symmetrized(raw_information_product(model)));
}

BlockMatrix covariance(const ModelSpec& model) {
  const BlockMatrix j = information_matrix(model);
  if (!linalg::is_positive_definite(j.dense())) {
    throw Error(ErrorCode::NotWellPosed, "information matrix is not positive definite; model is not well-posed");
  }
  Eigen::LDLT<Matrix> ldlt(j.dense());
  return BlockMatrix(j.shape(), linalg::symmetrized(ldlt.solve(Matrix::Identity(j.dense().rows(), j.dense().cols()))));
}

NoiseRealization solve_path(const ModelSpec& model, const NoiseRealization& xi) {
  const BlockMatrix t = assemble_system_matrix(model);
  if (!(xi.shape == t.shape())) {
    throw Error(ErrorCode::DimensionMismatch, "realization shape does not match the model");
  }
  const linalg::DenseSolver solver(t.dense(), "system matrix T");
  return NoiseRealization(t.shape(), solver.solve(xi.values));
}

}  // namespace cmseq
