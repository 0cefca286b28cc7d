#include "cmseq/equivalence.hpp"

#include "cmseq/model.hpp"
#include "linalg.hpp"

#include <sstream>
#include <string>
#include <vector>

namespace cmseq {

namespace {

std::size_t at(int k) { return static_cast<std::size_t>(k); }

Matrix information_from(const BlockMatrix& t, const BlockMatrix& p) {
  Eigen::LDLT<Matrix> ldlt(p.dense());
  return linalg::symmetrized(t.dense().transpose() * ldlt.solve(t.dense()));
}

MatrixList inverses(const MatrixList& covs, const char* name) {
  MatrixList out;
  out.reserve(covs.size());
  for (std::size_t k = 0; k < covs.size(); ++k) {
    out.push_back(linalg::spd_inverse(covs[k], std::string(name) + "[" + std::to_string(k) + "]"));
  }
  return out;
}

// Linear regression of x_target on the blocks listed in `given`:
//   x_target = sum_i coefficients[i] x_given[i] + e,  Cov(e) = residual_cov.
struct Regression {
  MatrixList coefficients;
  Matrix residual_cov;
};

Regression regress(const BlockMatrix& c, int target, const std::vector<int>& given) {
  const int dim = c.shape().dim;
  const auto m = static_cast<Eigen::Index>(given.size()) * dim;
  Regression out;
  if (given.empty()) {
    out.residual_cov = c.block(target, target);
    return out;
  }
  Matrix c_gg(m, m);
  Matrix c_gt(m, dim);
  for (std::size_t a = 0; a < given.size(); ++a) {
    const auto ra = static_cast<Eigen::Index>(a) * dim;
    c_gt.block(ra, 0, dim, dim) = c.block(given[a], target);
    for (std::size_t b = 0; b < given.size(); ++b) {
      c_gg.block(ra, static_cast<Eigen::Index>(b) * dim, dim, dim) = c.block(given[a], given[b]);
    }
  }
  Eigen::LDLT<Matrix> ldlt(c_gg);
  const Matrix coef = ldlt.solve(c_gt).transpose();  // dim x m
  out.residual_cov = linalg::symmetrized(c.block(target, target) - coef * c_gt);
  if (!linalg::is_positive_definite(out.residual_cov)) {
    throw Error(ErrorCode::NotWellPosed,
                "ill-conditioned conditional covariance at index " + std::to_string(target));
  }
  for (std::size_t a = 0; a < given.size(); ++a) {
    out.coefficients.emplace_back(coef.block(0, static_cast<Eigen::Index>(a) * dim, dim, dim));
  }
  return out;
}

ModelSpec generic_target(const ModelSpec& source, ModelKind kind) {
  const SequenceShape shape = shape_of(source);
  const int n = shape.horizon;

  if (kind == ModelKind::Reciprocal) {
    const BlockMatrix j = information_matrix(source);
    ReciprocalModel r{shape, {}, {}, -j.block(n, 0)};
    for (int k = 0; k <= n; ++k) r.diag_terms.emplace_back(j.block(k, k));
    for (int k = 0; k < n; ++k) r.super_terms.emplace_back(-j.block(k, k + 1));
    return r;
  }

  const BlockMatrix c = covariance(source);

  if (kind == ModelKind::ForwardMarkov) {
    ForwardMarkovModel m{shape, {}, {}};
    m.noise_covs.push_back(regress(c, 0, {}).residual_cov);
    for (int k = 1; k <= n; ++k) {
      auto r = regress(c, k, {k - 1});
      m.transitions.push_back(std::move(r.coefficients[0]));
      m.noise_covs.push_back(std::move(r.residual_cov));
    }
    return m;
  }
  if (kind == ModelKind::BackwardMarkov) {
    BackwardMarkovModel m{shape, {}, MatrixList(at(n + 1))};
    for (int k = 0; k < n; ++k) {
      auto r = regress(c, k, {k + 1});
      m.transitions.push_back(std::move(r.coefficients[0]));
      m.noise_covs[at(k)] = std::move(r.residual_cov);
    }
    m.noise_covs[at(n)] = regress(c, n, {}).residual_cov;
    return m;
  }

  CmModel m;
  m.shape = shape;
  m.direction = cm_direction(kind);
  m.conditioning = cm_conditioning(kind);
  m.transitions.resize(at(n - 1));
  m.couplings.resize(at(n));
  m.noise_covs.resize(at(n + 1));
  const int cond = m.conditioning_index();
  for (int k = 0; k <= n; ++k) {
    const CmRowLayout row = m.row_layout(k);
    std::vector<int> given;
    if (row.neighbor_col >= 0) given.push_back(row.neighbor_col);
    if (row.coupling_index >= 0) given.push_back(cond);
    auto r = regress(c, k, given);
    std::size_t next = 0;
    if (row.neighbor_col >= 0) m.transitions[at(row.transition_index)] = r.coefficients[next++];
    if (row.coupling_index >= 0) m.couplings[at(row.coupling_index)] = r.coefficients[next];
    m.noise_covs[at(k)] = std::move(r.residual_cov);
  }
  return m;
}

std::string describe_failure(const ModelSpec& source, const StructureReport& report, ModelKind target,
                             double tol) {
  std::ostringstream msg;
  msg << "cannot convert " << model_kind_name(kind_of(source)) << " to " << model_kind_name(target) << ": ";
  switch (target) {
    case ModelKind::ForwardMarkov:
    case ModelKind::BackwardMarkov: msg << "sequence is not Markov (markov=false)"; break;
    case ModelKind::Reciprocal: msg << "sequence is not reciprocal (reciprocal=false)"; break;
    case ModelKind::CmlForward:
    case ModelKind::CmlBackward: msg << "sequence is not CM_L (cml=false)"; break;
    case ModelKind::CmfForward:
    case ModelKind::CmfBackward: msg << "sequence is not CM_F (cmf=false)"; break;
  }
  if (const auto* cm = std::get_if<CmModel>(&source)) {
    const ConditionCheck recip = cm_reciprocal_condition(*cm, tol);
    if (recip.outcome == ConditionOutcome::Fails) {
      msg << "; reciprocal condition violated at k=";
      for (std::size_t i = 0; i < recip.failing_indices.size(); ++i) {
        msg << (i ? "," : "") << recip.failing_indices[i];
      }
    } else {
      const ConditionCheck markov = cm_markov_condition(*cm, tol);
      if (markov.outcome == ConditionOutcome::Fails) {
        msg << "; Markov condition violated at k=" << markov.failing_indices.front();
      }
    }
  }
  if (!report.violations.empty()) {
    msg << "; nonzero precision blocks:";
    for (const auto& v : report.violations) msg << " (" << v.row << "," << v.col << ")";
  }
  return msg.str();
}

ForwardMarkovModel reversed(const BackwardMarkovModel& bwd) {
  const int n = bwd.shape.horizon;
  ForwardMarkovModel fwd{bwd.shape, {}, {}};
  for (int j = 1; j <= n; ++j) fwd.transitions.push_back(bwd.transitions[at(n - j)]);
  for (int j = 0; j <= n; ++j) fwd.noise_covs.push_back(bwd.noise_covs[at(n - j)]);
  return fwd;
}

BackwardMarkovModel reversed(const ForwardMarkovModel& fwd) {
  const int n = fwd.shape.horizon;
  BackwardMarkovModel bwd{fwd.shape, {}, {}};
  for (int j = 0; j < n; ++j) bwd.transitions.push_back(fwd.transitions[at(n - j - 1)]);
  for (int j = 0; j <= n; ++j) bwd.noise_covs.push_back(fwd.noise_covs[at(n - j)]);
  return bwd;
}

NoiseRealization reversed(const NoiseRealization& v) {
  const int n = v.shape.horizon;
  NoiseRealization out(v.shape);
  for (int k = 0; k <= n; ++k) out.block(k) = v.block(n - k);
  return out;
}

NoiseRealization fwd_to_bwd_noise(const ForwardMarkovModel& fwd, const BackwardMarkovModel& bwd,
                                  const NoiseRealization& e) {
  const int n = fwd.shape.horizon;
  const MatrixList m_inv = inverses(fwd.noise_covs, "noise_covs");
  const MatrixList b_inv = inverses(bwd.noise_covs, "noise_covs");
  const auto& f = fwd.transitions;  // f[k-1] = M_{k,k-1}
  const auto& b = bwd.transitions;  // b[k] = M^B_{k,k+1}

  NoiseRealization out(fwd.shape);
  Vector u = m_inv[0] * e.block(0) - f[0].transpose() * m_inv[1] * e.block(1);
  out.block(0) = bwd.noise_covs[0] * u;
  for (int k = 1; k < n; ++k) {
    u = b[at(k - 1)].transpose() * b_inv[at(k - 1)] * out.block(k - 1) + m_inv[at(k)] * e.block(k) -
        f[at(k)].transpose() * m_inv[at(k + 1)] * e.block(k + 1);
    out.block(k) = bwd.noise_covs[at(k)] * u;
  }
  u = b[at(n - 1)].transpose() * b_inv[at(n - 1)] * out.block(n - 1) + m_inv[at(n)] * e.block(n);
  out.block(n) = bwd.noise_covs[at(n)] * u;
  return out;
}

void check_realization(const EquivalencePair& pair, const NoiseRealization& xi) {
  if (!(xi.shape == pair.source_system().shape())) {
    throw Error(ErrorCode::DimensionMismatch, "realization shape does not match the pair");
  }
}

}  // namespace

std::string_view conversion_method_name(ConversionMethod method) {
  return method == ConversionMethod::Generic ? "generic" : "closed-form";
}

ConversionMethod conversion_method_from_name(std::string_view name) {
  if (name == "generic") return ConversionMethod::Generic;
  if (name == "closed-form" || name == "closed_form") return ConversionMethod::ClosedForm;
  throw Error(ErrorCode::InvalidArgument, "unknown conversion method '" + std::string(name) + "'");
}

EquivalencePair::EquivalencePair(ModelSpec source, ModelSpec target, ConversionMethod method)
    : source_(std::move(source)),
      target_(std::move(target)),
      method_(method),
      t1_(assemble_system_matrix(source_)),
      p1_(assemble_noise_covariance(source_)),
      t2_(assemble_system_matrix(target_)),
      p2_(assemble_noise_covariance(target_)) {
  if (!(shape_of(source_) == shape_of(target_))) {
    throw Error(ErrorCode::DimensionMismatch, "source and target models have different shapes");
  }
  if (method_ == ConversionMethod::ClosedForm && !has_closed_form(kind_of(source_), kind_of(target_))) {
    throw Error(ErrorCode::InvalidArgument, "no closed form for " + std::string(model_kind_name(kind_of(source_))) +
                                                " -> " + std::string(model_kind_name(kind_of(target_))));
  }
}

double EquivalencePair::precision_residual() const {
  return linalg::relative_frobenius(information_from(t1_, p1_), information_from(t2_, p2_));
}

bool has_closed_form(ModelKind source, ModelKind target) {
  return (source == ModelKind::ForwardMarkov && target == ModelKind::BackwardMarkov) ||
         (source == ModelKind::BackwardMarkov && target == ModelKind::ForwardMarkov) ||
         (source == ModelKind::CmlForward && target == ModelKind::Reciprocal);
}

EquivalencePair convert(const ModelSpec& source, ModelKind target, ConversionMethod method, double tol) {
  validate(source);
  const ModelKind source_kind = kind_of(source);
  if (method == ConversionMethod::ClosedForm && !has_closed_form(source_kind, target)) {
    throw Error(ErrorCode::InvalidArgument, "no closed form for " + std::string(model_kind_name(source_kind)) +
                                                " -> " + std::string(model_kind_name(target)));
  }
  const StructureReport report = classify(information_matrix(source), tol);
  if (!admits(report, target)) {
    throw Error(ErrorCode::Inadmissible, describe_failure(source, report, target, tol));
  }

  if (method == ConversionMethod::Generic) {
    return EquivalencePair(source, generic_target(source, target), method);
  }
  if (source_kind == ModelKind::ForwardMarkov) {
    return EquivalencePair(source, markov_fwd_to_bwd_params(std::get<ForwardMarkovModel>(source)), method);
  }
  if (source_kind == ModelKind::BackwardMarkov) {
    return EquivalencePair(source, markov_bwd_to_fwd_params(std::get<BackwardMarkovModel>(source)), method);
  }
  return EquivalencePair(source, cml_to_reciprocal_params(std::get<CmModel>(source), tol), method);
}

BackwardMarkovModel markov_fwd_to_bwd_params(const ForwardMarkovModel& fwd) {
  validate(fwd);
  const int n = fwd.shape.horizon;
  const MatrixList m_inv = inverses(fwd.noise_covs, "noise_covs");
  const auto& f = fwd.transitions;  // f[k-1] = M_{k,k-1}

  BackwardMarkovModel bwd{fwd.shape, MatrixList(at(n)), MatrixList(at(n + 1))};
  MatrixList b_inv(at(n + 1));
  auto set_cov = [&](int k, Matrix inv_cov) {
    const std::string what = "backward noise covariance " + std::to_string(k);
    bwd.noise_covs[at(k)] = linalg::spd_inverse(inv_cov, what);
    b_inv[at(k)] = linalg::symmetrized(inv_cov);
  };

  set_cov(0, m_inv[0] + f[0].transpose() * m_inv[1] * f[0]);
  bwd.transitions[0] = bwd.noise_covs[0] * f[0].transpose() * m_inv[1];
  for (int k = 2; k <= n; ++k) {
    const Matrix& prev = bwd.transitions[at(k - 2)];
    set_cov(k - 1, m_inv[at(k - 1)] + f[at(k - 1)].transpose() * m_inv[at(k)] * f[at(k - 1)] -
                       prev.transpose() * b_inv[at(k - 2)] * prev);
    bwd.transitions[at(k - 1)] = bwd.noise_covs[at(k - 1)] * f[at(k - 1)].transpose() * m_inv[at(k)];
  }
  const Matrix& last = bwd.transitions[at(n - 1)];
  set_cov(n, m_inv[at(n)] - last.transpose() * b_inv[at(n - 1)] * last);
  return bwd;
}

ForwardMarkovModel markov_bwd_to_fwd_params(const BackwardMarkovModel& bwd) {
  return reversed(markov_fwd_to_bwd_params(reversed(bwd)));
}

NoiseRealization markov_noise_map(const EquivalencePair& pair, const NoiseRealization& xi) {
  check_realization(pair, xi);
  if (const auto* fwd = std::get_if<ForwardMarkovModel>(&pair.source())) {
    const auto* bwd = std::get_if<BackwardMarkovModel>(&pair.target());
    if (bwd == nullptr) throw Error(ErrorCode::InvalidArgument, "markov_noise_map needs a Markov pair");
    return fwd_to_bwd_noise(*fwd, *bwd, xi);
  }
  const auto* bwd = std::get_if<BackwardMarkovModel>(&pair.source());
  const auto* fwd = std::get_if<ForwardMarkovModel>(&pair.target());
  if (bwd == nullptr || fwd == nullptr) {
    throw Error(ErrorCode::InvalidArgument, "markov_noise_map needs a Markov pair");
  }
  return reversed(fwd_to_bwd_noise(reversed(*bwd), reversed(*fwd), reversed(xi)));
}

ReciprocalModel cml_to_reciprocal_params(const CmModel& cml, double tol) {
  validate(cml);
  if (cml.direction != Direction::Forward || cml.conditioning != Conditioning::Last) {
    throw Error(ErrorCode::InvalidArgument, "closed-form reciprocal conversion needs a forward CM_L model");
  }
  const ConditionCheck check = cm_reciprocal_condition(cml, tol);
  if (check.outcome != ConditionOutcome::Holds) {
    std::ostringstream msg;
    msg << "reciprocal condition violated at k=";
    for (std::size_t i = 0; i < check.failing_indices.size(); ++i) {
      msg << (i ? "," : "") << check.failing_indices[i];
    }
    throw Error(ErrorCode::Inadmissible, msg.str());
  }

  const int n = cml.shape.horizon;
  const MatrixList g_inv = inverses(cml.noise_covs, "noise_covs");
  auto trans = [&](int k) { return cml.transition(k); };  // G_{k,k-1}
  auto coup = [&](int k) { return cml.coupling(k); };     // G_{k,N}

  ReciprocalModel r;
  r.shape = cml.shape;
  r.diag_terms.resize(at(n + 1));
  r.super_terms.resize(at(n));

  r.diag_terms[0] = g_inv[0] + trans(1).transpose() * g_inv[1] * trans(1);
  for (int k = 1; k <= n - 2; ++k) {
    r.diag_terms[at(k)] = g_inv[at(k)] + trans(k + 1).transpose() * g_inv[at(k + 1)] * trans(k + 1);
  }
  r.diag_terms[at(n - 1)] = g_inv[at(n - 1)];
  Matrix last = g_inv[at(n)] + coup(0).transpose() * g_inv[0] * coup(0);
  for (int k = 1; k <= n - 1; ++k) last += coup(k).transpose() * g_inv[at(k)] * coup(k);
  r.diag_terms[at(n)] = last;
  for (auto& d : r.diag_terms) d = linalg::symmetrized(d);

  for (int k = 0; k <= n - 2; ++k) r.super_terms[at(k)] = trans(k + 1).transpose() * g_inv[at(k + 1)];
  r.super_terms[at(n - 1)] = g_inv[at(n - 1)] * coup(n - 1);

  const Matrix sub0 = g_inv[0] * coup(0) - trans(1).transpose() * g_inv[1] * coup(1);  // R^-_0
  r.corner_term = sub0.transpose();
  return r;
}

NoiseRealization cml_to_reciprocal_noise_map(const EquivalencePair& pair, const NoiseRealization& xi) {
  check_realization(pair, xi);
  const auto* cml = std::get_if<CmModel>(&pair.source());
  if (cml == nullptr || kind_of(pair.source()) != ModelKind::CmlForward ||
      kind_of(pair.target()) != ModelKind::Reciprocal) {
    throw Error(ErrorCode::InvalidArgument, "cml_to_reciprocal_noise_map needs a CM_L forward -> reciprocal pair");
  }
  const int n = cml->shape.horizon;
  const MatrixList g_inv = inverses(cml->noise_covs, "noise_covs");
  const NoiseRealization& e = xi;

  NoiseRealization out(cml->shape);
  for (int k = 0; k <= n - 2; ++k) {
    out.block(k) = g_inv[at(k)] * e.block(k) - cml->transition(k + 1).transpose() * g_inv[at(k + 1)] * e.block(k + 1);
  }
  out.block(n - 1) = g_inv[at(n - 1)] * e.block(n - 1);
  Vector last = g_inv[at(n)] * e.block(n) - cml->coupling(0).transpose() * g_inv[0] * e.block(0);
  for (int k = 1; k <= n - 1; ++k) last -= cml->coupling(k).transpose() * g_inv[at(k)] * e.block(k);
  out.block(n) = last;
  return out;
}

NoiseRealization map_noise(const EquivalencePair& pair, const NoiseRealization& xi) {
  check_realization(pair, xi);
  if (pair.method() == ConversionMethod::ClosedForm) {
    const ModelKind src = kind_of(pair.source());
    if (src == ModelKind::CmlForward) return cml_to_reciprocal_noise_map(pair, xi);
    return markov_noise_map(pair, xi);
  }
  const linalg::DenseSolver t1(pair.source_system().dense(), "source system matrix T1");
  const Vector x = t1.solve(xi.values);
  return NoiseRealization(xi.shape, pair.target_system().dense() * x);
}

NoiseRealization map_noise_normal_equations(const EquivalencePair& pair, const NoiseRealization& xi) {
  check_realization(pair, xi);
  Eigen::LDLT<Matrix> p1(pair.source_noise_cov().dense());
  const Vector rhs = pair.source_system().dense().transpose() * p1.solve(xi.values);
  const linalg::DenseSolver t2_transposed(pair.target_system().dense().transpose(), "target system matrix T2'");
  return NoiseRealization(xi.shape, pair.target_noise_cov().dense() * t2_transposed.solve(rhs));
}

}  // namespace cmseq
