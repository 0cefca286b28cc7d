#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cmseq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixList = std::vector<Matrix>;

enum class ErrorCode {
  InvalidArgument = 1,
  DimensionMismatch,
  NotPositiveDefinite,
  NotWellPosed,
  Inadmissible,
  Singular,
  Parse,
  Io,
};

std::string_view error_code_name(ErrorCode code);

/// Exception type thrown by every fallible operation in the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Index set [0, horizon] with a uniform state dimension per index.
struct SequenceShape {
  int horizon = 1;
  int dim = 1;

  int blocks() const { return horizon + 1; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(blocks()) * dim; }

  /// Throws unless horizon >= 1 and dim >= 1. Reciprocal and CM models
  /// additionally need an interior index (horizon >= 2); see validate().
  void validate() const;

  friend bool operator==(const SequenceShape&, const SequenceShape&) = default;
};

/// Dense square matrix on a (N+1)x(N+1) grid of dim x dim cells.
class BlockMatrix {
 public:
  explicit BlockMatrix(SequenceShape shape);
  BlockMatrix(SequenceShape shape, Matrix dense);

  const SequenceShape& shape() const { return shape_; }
  const Matrix& dense() const { return dense_; }
  Matrix& dense() { return dense_; }

  auto block(int i, int j) { return dense_.block(i * shape_.dim, j * shape_.dim, shape_.dim, shape_.dim); }
  auto block(int i, int j) const {
    return dense_.block(i * shape_.dim, j * shape_.dim, shape_.dim, shape_.dim);
  }

  double max_abs() const { return dense_.cwiseAbs().maxCoeff(); }
  BlockMatrix transpose() const { return BlockMatrix(shape_, dense_.transpose()); }

 private:
  SequenceShape shape_;
  Matrix dense_;
};

/// One sample path of a model's stacked noise and boundary values, or of the
/// state sequence itself; both share the stacked layout [v_0; ...; v_N].
struct NoiseRealization {
  SequenceShape shape;
  Vector values;

  NoiseRealization(SequenceShape s, Vector v);
  explicit NoiseRealization(SequenceShape s) : NoiseRealization(s, Vector::Zero(s.size())) {}

  auto block(int k) { return values.segment(static_cast<Eigen::Index>(k) * shape.dim, shape.dim); }
  auto block(int k) const { return values.segment(static_cast<Eigen::Index>(k) * shape.dim, shape.dim); }
};

/// x_k = M_{k,k-1} x_{k-1} + e_k for k in [1,N], x_0 = e_0.
struct ForwardMarkovModel {
  SequenceShape shape;
  MatrixList transitions;  // M_{k,k-1}, k = 1..N  (index k-1)
  MatrixList noise_covs;   // M_k, k = 0..N
};

/// x_k = M^B_{k,k+1} x_{k+1} + e_k for k in [0,N-1], x_N = e_N.
struct BackwardMarkovModel {
  SequenceShape shape;
  MatrixList transitions;  // M^B_{k,k+1}, k = 0..N-1
  MatrixList noise_covs;   // M^B_k, k = 0..N
};

/// R^0_k x_k - R^-_k x_{k-1} - R^+_k x_{k+1} = e^R_k with cyclic boundary rows.
/// R^-_{k+1} = (R^+_k)' and R^-_0 = (R^+_N)'; the stacked noise has covariance R.
struct ReciprocalModel {
  SequenceShape shape;
  MatrixList diag_terms;   // R^0_k, k = 0..N
  MatrixList super_terms;  // R^+_k, k = 0..N-1
  Matrix corner_term;      // R^+_N

  Matrix sub_term(int k) const;  // R^-_k
};

enum class Direction { Forward, Backward };
enum class Conditioning { First, Last };  // c = 0 or c = N

/// Column layout of one row of a CM model:
///   x_k = neighbor * x_{neighbor_col} + coupling * x_c + e_k
/// Rows where the neighbor collides with c carry only the (combined) coupling.
struct CmRowLayout {
  int neighbor_col = -1;       // -1: no neighbor term
  int transition_index = -1;   // index into CmModel::transitions
  int coupling_index = -1;     // index into CmModel::couplings, -1: none
};

/// Forward/backward CM model conditioned at the first or last index.
///
/// Parameter storage, with c the conditioning index:
///   forward  c=N: transitions G_{k,k-1}, k=1..N-1;   couplings G_{k,N}, k=0..N-1
///   forward  c=0: transitions G_{k,k-1}, k=2..N;     couplings G_{k,0}, k=1..N
///   backward c=0: transitions G_{k,k+1}, k=1..N-1;   couplings G_{k,0}, k=1..N
///   backward c=N: transitions G_{k,k+1}, k=0..N-2;   couplings G_{k,N}, k=0..N-1
/// The forward c=0 row k=1 and backward c=N row k=N-1 have neighbor == c, so
/// only their combined coefficient is stored (in couplings).
struct CmModel {
  SequenceShape shape;
  Direction direction = Direction::Forward;
  Conditioning conditioning = Conditioning::Last;
  MatrixList transitions;  // N-1 entries
  MatrixList couplings;    // N entries
  MatrixList noise_covs;   // N+1 entries

  int conditioning_index() const { return conditioning == Conditioning::Last ? shape.horizon : 0; }
  CmRowLayout row_layout(int k) const;

  /// Neighbor coefficient of row k; zero matrix when the row has none.
  Matrix transition(int k) const;
  /// Coupling of row k to x_c; zero matrix when the row has none.
  Matrix coupling(int k) const;
};

enum class ModelKind {
  ForwardMarkov,
  BackwardMarkov,
  Reciprocal,
  CmlForward,
  CmfForward,
  CmlBackward,
  CmfBackward,
};

inline constexpr ModelKind kAllModelKinds[] = {
    ModelKind::ForwardMarkov, ModelKind::BackwardMarkov, ModelKind::Reciprocal, ModelKind::CmlForward,
    ModelKind::CmfForward,    ModelKind::CmlBackward,    ModelKind::CmfBackward,
};

std::string_view model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(std::string_view name);

using ModelSpec = std::variant<ForwardMarkovModel, BackwardMarkovModel, ReciprocalModel, CmModel>;

ModelKind kind_of(const ModelSpec& model);
const SequenceShape& shape_of(const ModelSpec& model);

Direction cm_direction(ModelKind kind);
Conditioning cm_conditioning(ModelKind kind);
bool is_cm_kind(ModelKind kind);

}  // namespace cmseq
