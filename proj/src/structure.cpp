#include "cmseq/structure.hpp"

#include "linalg.hpp"

#include <algorithm>
#include <string>

namespace cmseq {

StructurePattern StructurePattern::extract(const BlockMatrix& j) {
  const int n = j.shape().horizon;
  StructurePattern p;
  for (int k = 0; k <= n; ++k) p.diagonal.emplace_back(j.block(k, k));
  for (int k = 0; k < n; ++k) p.super_diagonal.emplace_back(j.block(k, k + 1));
  for (int k = 0; k <= n - 2; ++k) p.last_column.emplace_back(j.block(k, n));
  for (int k = 2; k <= n; ++k) p.first_row.emplace_back(j.block(0, k));
  return p;
}

StructureReport classify(const BlockMatrix& j, double tol) {
  if (!(tol >= 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be non-negative");
  const Matrix& dense = j.dense();
  if (linalg::relative_asymmetry(dense) > std::max(tol, 1e-14)) {
    throw Error(ErrorCode::InvalidArgument, "precision matrix is not symmetric");
  }
  if (!linalg::is_positive_definite(dense)) {
    throw Error(ErrorCode::NotPositiveDefinite, "precision matrix is not positive definite");
  }

  StructureReport report;
  report.tolerance = tol;
  report.is_cml = report.is_cmf = report.is_reciprocal = report.is_markov = true;

  const int n = j.shape().horizon;
  const double threshold = tol * j.max_abs();
  for (int row = 0; row <= n; ++row) {
    for (int col = row + 2; col <= n; ++col) {
      const double entry = std::max(j.block(row, col).cwiseAbs().maxCoeff(), j.block(col, row).cwiseAbs().maxCoeff());
      if (entry <= threshold) continue;
      report.violations.push_back({row, col, entry});
      report.is_markov = false;
      if (!(row == 0 && col == n)) report.is_reciprocal = false;
      if (col != n) report.is_cml = false;
      if (row != 0) report.is_cmf = false;
    }
  }
  return report;
}

bool admits(const StructureReport& report, ModelKind kind) {
  switch (kind) {
    case ModelKind::ForwardMarkov:
    case ModelKind::BackwardMarkov: return report.is_markov;
    case ModelKind::Reciprocal: return report.is_reciprocal;
    case ModelKind::CmlForward:
    case ModelKind::CmlBackward: return report.is_cml;
    case ModelKind::CmfForward:
    case ModelKind::CmfBackward: return report.is_cmf;
  }
  return false;
}

namespace {

struct IdentityTerms {
  Matrix lhs;
  Matrix rhs;
};

class ConditionEvaluator {
 public:
  ConditionEvaluator(const CmModel& model, double tol) : model_(model), tol_(tol) {
    for (std::size_t k = 0; k < model.noise_covs.size(); ++k) {
      inverses_.push_back(linalg::spd_inverse(model.noise_covs[k], "noise_covs[" + std::to_string(k) + "]"));
      scale_ = std::max(scale_, inverses_.back().cwiseAbs().maxCoeff());
    }
  }

  // Both sides of the reciprocity identity at index k.
  IdentityTerms terms(int k) const {
    if (model_.direction == Direction::Forward) {
      return {inverse(k) * model_.coupling(k),
              model_.transition(k + 1).transpose() * inverse(k + 1) * model_.coupling(k + 1)};
    }
    return {inverse(k + 1) * model_.coupling(k + 1),
            model_.transition(k).transpose() * inverse(k) * model_.coupling(k)};
  }

  bool holds(const IdentityTerms& t) const {
    const double diff = (t.lhs - t.rhs).norm();
    const double ref = std::max({t.lhs.norm(), t.rhs.norm(), scale_});
    return diff <= tol_ * ref;
  }

  // G_k^{-1} G_{k,c} must vanish.
  bool coupling_vanishes(int k) const {
    return holds({inverse(k) * model_.coupling(k), Matrix::Zero(model_.shape.dim, model_.shape.dim)});
  }

 private:
  const Matrix& inverse(int k) const { return inverses_[static_cast<std::size_t>(k)]; }

  const CmModel& model_;
  double tol_;
  MatrixList inverses_;
  double scale_ = 0.0;
};

// Index range [first, last] on which the reciprocity identity is required.
std::pair<int, int> reciprocal_range(const CmModel& m) {
  const int n = m.shape.horizon;
  if (m.direction == Direction::Forward) {
    return m.conditioning == Conditioning::Last ? std::pair{1, n - 2} : std::pair{2, n - 1};
  }
  return m.conditioning == Conditioning::First ? std::pair{1, n - 2} : std::pair{0, n - 3};
}

}  // namespace

ConditionCheck cm_reciprocal_condition(const CmModel& model, double tol) {
  ConditionEvaluator eval(model, tol);
  ConditionCheck check;
  const auto [first, last] = reciprocal_range(model);
  for (int k = first; k <= last; ++k) {
    if (!eval.holds(eval.terms(k))) check.failing_indices.push_back(k);
  }
  check.outcome = check.failing_indices.empty() ? ConditionOutcome::Holds : ConditionOutcome::Fails;
  return check;
}

bool check_cm_reciprocal_condition(const CmModel& model, double tol) {
  return cm_reciprocal_condition(model, tol).outcome == ConditionOutcome::Holds;
}

ConditionCheck cm_markov_condition(const CmModel& model, double tol) {
  ConditionCheck check;
  if (!check_cm_reciprocal_condition(model, tol)) {
    check.outcome = ConditionOutcome::NotApplicable;
    return check;
  }
  ConditionEvaluator eval(model, tol);
  const int n = model.shape.horizon;
  int k = 0;
  bool ok = true;
  if (model.direction == Direction::Forward) {
    if (model.conditioning == Conditioning::Last) {
      k = 0;
      ok = eval.holds(eval.terms(0));
    } else {
      k = n;
      ok = eval.coupling_vanishes(n);
    }
  } else {
    if (model.conditioning == Conditioning::First) {
      k = n - 1;
      ok = eval.holds(eval.terms(n - 1));
    } else {
      k = 0;
      ok = eval.coupling_vanishes(0);
    }
  }
  if (!ok) check.failing_indices.push_back(k);
  check.outcome = ok ? ConditionOutcome::Holds : ConditionOutcome::Fails;
  return check;
}

ConditionOutcome check_cm_markov_condition(const CmModel& model, double tol) {
  return cm_markov_condition(model, tol).outcome;
}

}  // namespace cmseq
