#pragma once

#include "cmseq/core.hpp"

#include <vector>

namespace cmseq {

/// Blocks of a precision matrix named after the CM_L / CM_F layouts:
/// A_k = J[k,k], B_k = J[k,k+1], and the dense column (CM_L) or row (CM_F).
struct StructurePattern {
  MatrixList diagonal;        // A_0..A_N
  MatrixList super_diagonal;  // B_0..B_{N-1}
  MatrixList last_column;     // J[k,N], k = 0..N-2
  MatrixList first_row;       // J[0,k], k = 2..N

  static StructurePattern extract(const BlockMatrix& j);
};

struct BlockViolation {
  int row = 0;
  int col = 0;
  double max_abs = 0.0;
};

struct StructureReport {
  bool is_cml = false;
  bool is_cmf = false;
  bool is_reciprocal = false;
  bool is_markov = false;
  /// Upper-triangle blocks off the tri-diagonal band whose max-abs entry
  /// exceeds tolerance * max|J|.
  std::vector<BlockViolation> violations;
  double tolerance = 0.0;
};

inline constexpr double kDefaultStructureTolerance = 1e-8;

/// Classifies a symmetric positive definite precision matrix. Throws
/// InvalidArgument for a non-symmetric J and NotPositiveDefinite otherwise.
StructureReport classify(const BlockMatrix& j, double tol = kDefaultStructureTolerance);

/// True when a sequence with this precision structure admits a model of `kind`.
bool admits(const StructureReport& report, ModelKind kind);

enum class ConditionOutcome { Holds, Fails, NotApplicable };

struct ConditionCheck {
  ConditionOutcome outcome = ConditionOutcome::Holds;
  std::vector<int> failing_indices;  // k values where the identity fails
};

/// Reciprocity identity for a CM model, checked at every required k:
///   forward:  G_k^{-1} G_{k,c} = G_{k+1,k}' G_{k+1}^{-1} G_{k+1,c}
///   backward: G_{k+1}^{-1} G_{k+1,c} = G_{k,k+1}' G_k^{-1} G_{k,c}
/// Empty index ranges hold vacuously.
ConditionCheck cm_reciprocal_condition(const CmModel& model, double tol = kDefaultStructureTolerance);
bool check_cm_reciprocal_condition(const CmModel& model, double tol = kDefaultStructureTolerance);

/// Extra boundary identity making a reciprocal CM model Markov. NotApplicable
/// when the reciprocal condition itself fails.
ConditionCheck cm_markov_condition(const CmModel& model, double tol = kDefaultStructureTolerance);
ConditionOutcome check_cm_markov_condition(const CmModel& model, double tol = kDefaultStructureTolerance);

}  // namespace cmseq
