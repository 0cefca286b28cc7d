#include "cmseq/core.hpp"

#include <array>
#include <utility>

namespace cmseq {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::NotPositiveDefinite: return "not positive definite";
    case ErrorCode::NotWellPosed: return "not well-posed";
    case ErrorCode::Inadmissible: return "inadmissible target";
    case ErrorCode::Singular: return "numerically singular";
    case ErrorCode::Parse: return "parse error";
    case ErrorCode::Io: return "i/o error";
  }
  return "unknown error";
}

void SequenceShape::validate() const {
  if (horizon < 1) {
    throw Error(ErrorCode::InvalidArgument, "horizon N must be at least 1, got " + std::to_string(horizon));
  }
  if (dim < 1) {
    throw Error(ErrorCode::InvalidArgument, "state dimension must be at least 1, got " + std::to_string(dim));
  }
}

BlockMatrix::BlockMatrix(SequenceShape shape) : shape_(shape), dense_(Matrix::Zero(shape.size(), shape.size())) {}

BlockMatrix::BlockMatrix(SequenceShape shape, Matrix dense) : shape_(shape), dense_(std::move(dense)) {
  if (dense_.rows() != shape_.size() || dense_.cols() != shape_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "block matrix of size " + std::to_string(dense_.rows()) + "x" +
                                                  std::to_string(dense_.cols()) + " does not match " +
                                                  std::to_string(shape_.blocks()) + " blocks of dim " +
                                                  std::to_string(shape_.dim));
  }
}

NoiseRealization::NoiseRealization(SequenceShape s, Vector v) : shape(s), values(std::move(v)) {
  if (values.size() != shape.size()) {
    throw Error(ErrorCode::DimensionMismatch, "realization has length " + std::to_string(values.size()) +
                                                  ", expected " + std::to_string(shape.size()));
  }
}

Matrix ReciprocalModel::sub_term(int k) const {
  if (k == 0) return corner_term.transpose();
  return super_terms.at(static_cast<std::size_t>(k - 1)).transpose();
}

CmRowLayout CmModel::row_layout(int k) const {
  const int n = shape.horizon;
  CmRowLayout row;
  if (direction == Direction::Forward && conditioning == Conditioning::Last) {
    if (k == 0) {
      row.coupling_index = 0;
    } else if (k < n) {
      row = {k - 1, k - 1, k};
    }
  } else if (direction == Direction::Forward) {
    if (k == 1) {
      row.coupling_index = 0;
    } else if (k >= 2) {
      row = {k - 1, k - 2, k - 1};
    }
  } else if (conditioning == Conditioning::First) {
    if (k == n) {
      row.coupling_index = n - 1;
    } else if (k >= 1) {
      row = {k + 1, k - 1, k - 1};
    }
  } else {
    if (k == n - 1) {
      row.coupling_index = n - 1;
    } else if (k < n - 1) {
      row = {k + 1, k, k};
    }
  }
  return row;
}

Matrix CmModel::transition(int k) const {
  const auto row = row_layout(k);
  if (row.transition_index < 0) return Matrix::Zero(shape.dim, shape.dim);
  return transitions.at(static_cast<std::size_t>(row.transition_index));
}

Matrix CmModel::coupling(int k) const {
  const auto row = row_layout(k);
  if (row.coupling_index < 0) return Matrix::Zero(shape.dim, shape.dim);
  return couplings.at(static_cast<std::size_t>(row.coupling_index));
}

namespace {

constexpr std::array<std::pair<ModelKind, std::string_view>, 7> kKindNames{{
    {ModelKind::ForwardMarkov, "forward_markov"},
    {ModelKind::BackwardMarkov, "backward_markov"},
    {ModelKind::Reciprocal, "reciprocal"},
    {ModelKind::CmlForward, "cml_forward"},
    {ModelKind::CmfForward, "cmf_forward"},
    {ModelKind::CmlBackward, "cml_backward"},
    {ModelKind::CmfBackward, "cmf_backward"},
}};

}  // namespace

std::string_view model_kind_name(ModelKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

ModelKind model_kind_from_name(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown model class '" + std::string(name) + "'");
}

bool is_cm_kind(ModelKind kind) {
  return kind == ModelKind::CmlForward || kind == ModelKind::CmfForward || kind == ModelKind::CmlBackward ||
         kind == ModelKind::CmfBackward;
}

Direction cm_direction(ModelKind kind) {
  return (kind == ModelKind::CmlForward || kind == ModelKind::CmfForward) ? Direction::Forward
                                                                          : Direction::Backward;
}

Conditioning cm_conditioning(ModelKind kind) {
  return (kind == ModelKind::CmlForward || kind == ModelKind::CmlBackward) ? Conditioning::Last
                                                                           : Conditioning::First;
}

ModelKind kind_of(const ModelSpec& model) {
  struct Visitor {
    ModelKind operator()(const ForwardMarkovModel&) const { return ModelKind::ForwardMarkov; }
    ModelKind operator()(const BackwardMarkovModel&) const { return ModelKind::BackwardMarkov; }
    ModelKind operator()(const ReciprocalModel&) const { return ModelKind::Reciprocal; }
    ModelKind operator()(const CmModel& m) const {
      if (m.direction == Direction::Forward) {
        return m.conditioning == Conditioning::Last ? ModelKind::CmlForward : ModelKind::CmfForward;
      }
      return m.conditioning == Conditioning::Last ? ModelKind::CmlBackward : ModelKind::CmfBackward;
    }
  };
  return std::visit(Visitor{}, model);
}

const SequenceShape& shape_of(const ModelSpec& model) {
  return std::visit([](const auto& m) -> const SequenceShape& { return m.shape; }, model);
}

}  // namespace cmseq
