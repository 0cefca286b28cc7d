#pragma once

// Random model generators and reference computations shared by the unit tests
// and the acceptance runner. Nothing here calls into the conversion code: the
// oracles work from dense covariances built with plain Eigen.

#include "cmseq/core.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace cmseq::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline Matrix random_matrix(Rng& rng, int dim, double scale) {
  Matrix m(dim, dim);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, -scale, scale);
  return m;
}

inline Matrix random_spd(Rng& rng, int dim) {
  const Matrix a = random_matrix(rng, dim, 1.0);
  return a * a.transpose() + uniform(rng, 0.3, 1.5) * Matrix::Identity(dim, dim);
}

inline Vector random_vector(Rng& rng, Eigen::Index size) {
  std::normal_distribution<double> normal;
  Vector v(size);
  for (Eigen::Index i = 0; i < size; ++i) v[i] = normal(rng);
  return v;
}

/// Rank-one dim x dim matrix (a plain zero for dim == 1).
inline Matrix rank_deficient(Rng& rng, int dim, double scale) {
  if (dim == 1) return Matrix::Zero(1, 1);
  const Vector u = random_vector(rng, dim), v = random_vector(rng, dim);
  return scale * (u * v.transpose()) / (u.norm() * v.norm());
}

/// Transition flavours used to reach degenerate corners of the parameter space.
enum class TransitionStyle { Regular, Zero, RankDeficient };

inline Matrix random_transition(Rng& rng, int dim, TransitionStyle style, double scale = 0.9) {
  switch (style) {
    case TransitionStyle::Zero: return Matrix::Zero(dim, dim);
    case TransitionStyle::RankDeficient: return rank_deficient(rng, dim, scale);
    case TransitionStyle::Regular: break;
  }
  return random_matrix(rng, dim, scale / dim);
}

inline TransitionStyle random_style(Rng& rng) {
  const int r = uniform_int(rng, 0, 9);
  if (r == 0) return TransitionStyle::Zero;
  if (r == 1) return TransitionStyle::RankDeficient;
  return TransitionStyle::Regular;
}

inline MatrixList random_covs(Rng& rng, int n, int dim) {
  MatrixList covs;
  for (int k = 0; k <= n; ++k) covs.push_back(random_spd(rng, dim));
  return covs;
}

inline ForwardMarkovModel random_forward_markov(Rng& rng, SequenceShape shape, bool degenerate = false) {
  ForwardMarkovModel m{shape, {}, random_covs(rng, shape.horizon, shape.dim)};
  for (int k = 1; k <= shape.horizon; ++k) {
    m.transitions.push_back(random_transition(rng, shape.dim, degenerate ? random_style(rng) : TransitionStyle::Regular));
  }
  return m;
}

inline BackwardMarkovModel random_backward_markov(Rng& rng, SequenceShape shape, bool degenerate = false) {
  BackwardMarkovModel m{shape, {}, random_covs(rng, shape.horizon, shape.dim)};
  for (int k = 0; k < shape.horizon; ++k) {
    m.transitions.push_back(random_transition(rng, shape.dim, degenerate ? random_style(rng) : TransitionStyle::Regular));
  }
  return m;
}

/// Block-diagonally dominant cyclic tri-diagonal R, hence positive definite.
inline ReciprocalModel random_reciprocal(Rng& rng, SequenceShape shape, bool markov = false) {
  const int n = shape.horizon;
  const int dim = shape.dim;
  ReciprocalModel m{shape, {}, {}, Matrix::Zero(dim, dim)};
  for (int k = 0; k < n; ++k) m.super_terms.push_back(random_matrix(rng, dim, 1.0));
  if (!markov) m.corner_term = random_matrix(rng, dim, 0.7);
  auto norm2 = [](const Matrix& a) { return a.jacobiSvd().singularValues()(0); };
  for (int k = 0; k <= n; ++k) {
    double off = 0.0;
    if (k < n) off += norm2(m.super_terms[static_cast<std::size_t>(k)]);
    if (k > 0) off += norm2(m.super_terms[static_cast<std::size_t>(k - 1)]);
    if (k == 0 || k == n) off += norm2(m.corner_term);
    m.diag_terms.push_back(random_spd(rng, dim) + (off + 0.2) * Matrix::Identity(dim, dim));
  }
  return m;
}

/// Which structure a generated CM model is built to have.
enum class CmVariant { Generic, Reciprocal, Markov };

inline Matrix& cm_transition_slot(CmModel& m, int k) {
  return m.transitions[static_cast<std::size_t>(m.row_layout(k).transition_index)];
}
inline Matrix& cm_coupling_slot(CmModel& m, int k) {
  return m.couplings[static_cast<std::size_t>(m.row_layout(k).coupling_index)];
}

/// CM model of the given kind. The Reciprocal and Markov variants pick the
/// coupling blocks by substituting through the reciprocity identities, so the
/// resulting precision matrices carry the corresponding pattern exactly.
inline CmModel random_cm(Rng& rng, ModelKind kind, SequenceShape shape, CmVariant variant, bool degenerate = false) {
  const int n = shape.horizon;
  const int dim = shape.dim;
  CmModel m;
  m.shape = shape;
  m.direction = cm_direction(kind);
  m.conditioning = cm_conditioning(kind);
  m.noise_covs = random_covs(rng, n, dim);
  for (int i = 0; i < n - 1; ++i) {
    m.transitions.push_back(random_transition(rng, dim, degenerate ? random_style(rng) : TransitionStyle::Regular));
  }
  for (int i = 0; i < n; ++i) m.couplings.push_back(random_matrix(rng, dim, 0.6 / dim));
  if (variant == CmVariant::Generic) return m;

  auto g_inv = [&](int k) -> Matrix { return m.noise_covs[static_cast<std::size_t>(k)].inverse(); };
  auto cov = [&](int k) -> const Matrix& { return m.noise_covs[static_cast<std::size_t>(k)]; };
  const bool markov = variant == CmVariant::Markov;

  if (kind == ModelKind::CmlForward) {
    // G_{k,N} = G_k G_{k+1,k}' G_{k+1}^{-1} G_{k+1,N}, k = N-2 .. 1 (and k = 0 for Markov).
    for (int k = n - 2; k >= (markov ? 0 : 1); --k) {
      cm_coupling_slot(m, k) = cov(k) * cm_transition_slot(m, k + 1).transpose() * g_inv(k + 1) * cm_coupling_slot(m, k + 1);
    }
  } else if (kind == ModelKind::CmfForward) {
    // G_{k,0} = G_k G_{k+1,k}' G_{k+1}^{-1} G_{k+1,0}, k = N-1 .. 2; Markov needs G_{N,0} = 0.
    if (markov) cm_coupling_slot(m, n).setZero();
    for (int k = n - 1; k >= 2; --k) {
      cm_coupling_slot(m, k) = cov(k) * cm_transition_slot(m, k + 1).transpose() * g_inv(k + 1) * cm_coupling_slot(m, k + 1);
    }
  } else if (kind == ModelKind::CmfBackward) {
    // G_{k+1,0} = G_{k+1} G_{k,k+1}' G_k^{-1} G_{k,0}, k = 1 .. N-2 (and k = N-1 for Markov).
    for (int k = 1; k <= (markov ? n - 1 : n - 2); ++k) {
      cm_coupling_slot(m, k + 1) = cov(k + 1) * cm_transition_slot(m, k).transpose() * g_inv(k) * cm_coupling_slot(m, k);
    }
  } else {
    // Backward CM_L: G_{k+1,N} = G_{k+1} G_{k,k+1}' G_k^{-1} G_{k,N}, k = 0 .. N-3; Markov needs G_{0,N} = 0.
    if (markov) cm_coupling_slot(m, 0).setZero();
    for (int k = 0; k <= n - 3; ++k) {
      cm_coupling_slot(m, k + 1) = cov(k + 1) * cm_transition_slot(m, k).transpose() * g_inv(k) * cm_coupling_slot(m, k);
    }
  }
  return m;
}

/// Random model of any kind. For CM kinds the variant controls its structure;
/// Markov and reciprocal kinds ignore it (a reciprocal model with
/// variant == Markov gets a zero corner).
inline ModelSpec random_model(Rng& rng, ModelKind kind, SequenceShape shape, CmVariant variant = CmVariant::Generic,
                              bool degenerate = false) {
  switch (kind) {
    case ModelKind::ForwardMarkov: return random_forward_markov(rng, shape, degenerate);
    case ModelKind::BackwardMarkov: return random_backward_markov(rng, shape, degenerate);
    case ModelKind::Reciprocal: return random_reciprocal(rng, shape, variant == CmVariant::Markov);
    default: return random_cm(rng, kind, shape, variant, degenerate);
  }
}

/// Structure flags a generated model is known to have by construction.
struct ExpectedFlags {
  bool cml, cmf, reciprocal, markov;
};

inline ExpectedFlags expected_flags(ModelKind kind, CmVariant variant, int horizon) {
  if (kind == ModelKind::ForwardMarkov || kind == ModelKind::BackwardMarkov || variant == CmVariant::Markov) {
    return {true, true, true, true};
  }
  if (kind == ModelKind::Reciprocal || variant == CmVariant::Reciprocal || horizon == 2) {
    // With N = 2 the only off-band block is the corner, so every CM pattern is reciprocal.
    return {true, true, true, false};
  }
  const bool last = cm_conditioning(kind) == Conditioning::Last;
  return {last, !last, false, false};
}

// ---------------------------------------------------------------------------
// Oracles

/// Dense T written out row by row from the defining equations.
inline Matrix oracle_system_matrix(const ModelSpec& model) {
  const SequenceShape s = shape_of(model);
  const int n = s.horizon, d = s.dim;
  Matrix t = Matrix::Zero(s.size(), s.size());
  auto blk = [&](int i, int j) { return t.block(i * d, j * d, d, d); };
  if (const auto* r = std::get_if<ReciprocalModel>(&model)) {
    for (int k = 0; k <= n; ++k) blk(k, k) = r->diag_terms[static_cast<std::size_t>(k)];
    for (int k = 0; k < n; ++k) {
      blk(k, k + 1) = -r->super_terms[static_cast<std::size_t>(k)];
      blk(k + 1, k) = -r->super_terms[static_cast<std::size_t>(k)].transpose();
    }
    blk(n, 0) = -r->corner_term;
    blk(0, n) = -r->corner_term.transpose();
    return t;
  }
  for (int k = 0; k <= n; ++k) blk(k, k) = Matrix::Identity(d, d);
  if (const auto* f = std::get_if<ForwardMarkovModel>(&model)) {
    for (int k = 1; k <= n; ++k) blk(k, k - 1) = -f->transitions[static_cast<std::size_t>(k - 1)];
  } else if (const auto* b = std::get_if<BackwardMarkovModel>(&model)) {
    for (int k = 0; k < n; ++k) blk(k, k + 1) = -b->transitions[static_cast<std::size_t>(k)];
  } else {
    const auto& cm = std::get<CmModel>(model);
    const int c = cm.conditioning_index();
    for (int k = 0; k <= n; ++k) {
      const CmRowLayout row = cm.row_layout(k);
      if (row.neighbor_col >= 0) blk(k, row.neighbor_col) -= cm.transitions[static_cast<std::size_t>(row.transition_index)];
      if (row.coupling_index >= 0) blk(k, c) -= cm.couplings[static_cast<std::size_t>(row.coupling_index)];
    }
  }
  return t;
}

inline Matrix oracle_noise_covariance(const ModelSpec& model) {
  if (std::holds_alternative<ReciprocalModel>(model)) return oracle_system_matrix(model);
  const SequenceShape s = shape_of(model);
  const MatrixList* covs = nullptr;
  if (const auto* f = std::get_if<ForwardMarkovModel>(&model)) covs = &f->noise_covs;
  if (const auto* b = std::get_if<BackwardMarkovModel>(&model)) covs = &b->noise_covs;
  if (const auto* cm = std::get_if<CmModel>(&model)) covs = &cm->noise_covs;
  Matrix p = Matrix::Zero(s.size(), s.size());
  for (int k = 0; k <= s.horizon; ++k) p.block(k * s.dim, k * s.dim, s.dim, s.dim) = (*covs)[static_cast<std::size_t>(k)];
  return p;
}

/// C = T^{-1} P T^{-T}, the covariance of x straight from x = T^{-1} xi.
inline Matrix oracle_covariance(const ModelSpec& model) {
  const Matrix t = oracle_system_matrix(model);
  const Matrix tinv = t.fullPivLu().inverse();
  const Matrix c = tinv * oracle_noise_covariance(model) * tinv.transpose();
  return 0.5 * (c + c.transpose());
}

/// J as the inverse of the oracle covariance.
inline Matrix oracle_precision(const ModelSpec& model) {
  const Matrix j = oracle_covariance(model).inverse();
  return 0.5 * (j + j.transpose());
}

inline double rel_frobenius(const Matrix& a, const Matrix& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

inline Eigen::Index block_start(int k, int dim) { return static_cast<Eigen::Index>(k) * dim; }

/// Regression of x_k on the whole index set `given`, computed from the
/// precision of the joint marginal of (x_k, x_given): coefficients on each
/// conditioning block and the conditional covariance.
struct Regression {
  std::vector<Matrix> coefficients;  // aligned with `given`
  Matrix conditional_cov;
};

inline Regression oracle_regression(const Matrix& c, int dim, int k, const std::vector<int>& given) {
  std::vector<int> order{k};
  order.insert(order.end(), given.begin(), given.end());
  const Eigen::Index m = static_cast<Eigen::Index>(order.size()) * dim;
  Matrix sub(m, m);
  for (std::size_t a = 0; a < order.size(); ++a) {
    for (std::size_t b = 0; b < order.size(); ++b) {
      sub.block(static_cast<Eigen::Index>(a) * dim, static_cast<Eigen::Index>(b) * dim, dim, dim) =
          c.block(block_start(order[a], dim), block_start(order[b], dim), dim, dim);
    }
  }
  const Matrix lambda = sub.inverse();
  const Matrix lkk_inv = lambda.topLeftCorner(dim, dim).inverse();
  Regression r;
  r.conditional_cov = lkk_inv;
  for (std::size_t b = 1; b < order.size(); ++b) {
    r.coefficients.push_back(-lkk_inv * lambda.block(0, static_cast<Eigen::Index>(b) * dim, dim, dim));
  }
  return r;
}

/// Every earlier variable of row k in the triangular ordering of a white-noise
/// model of this kind; conditioning on all of them must give the same
/// regression as the sparse parameterization.
inline std::vector<int> full_conditioning_set(ModelKind kind, int n, int k) {
  std::vector<int> s;
  switch (kind) {
    case ModelKind::ForwardMarkov:
    case ModelKind::CmfForward:
      for (int j = 0; j < k; ++j) s.push_back(j);
      break;
    case ModelKind::BackwardMarkov:
    case ModelKind::CmlBackward:
      for (int j = k + 1; j <= n; ++j) s.push_back(j);
      break;
    case ModelKind::CmlForward:
      if (k < n) {
        for (int j = 0; j < k; ++j) s.push_back(j);
        s.push_back(n);
      }
      break;
    case ModelKind::CmfBackward:
      if (k > 0) {
        s.push_back(0);
        for (int j = k + 1; j <= n; ++j) s.push_back(j);
      }
      break;
    case ModelKind::Reciprocal:
      for (int j = 0; j <= n; ++j)
        if (j != k) s.push_back(j);
      break;
  }
  return s;
}

/// Dense T row block k implied by regressing on the full conditioning set;
/// for white-noise kinds this is [I at k, -coefficients elsewhere].
inline Matrix oracle_row(const Matrix& c, ModelKind kind, int n, int dim, int k, Matrix* noise_cov) {
  const std::vector<int> given = full_conditioning_set(kind, n, k);
  const Regression r = oracle_regression(c, dim, k, given);
  Matrix row = Matrix::Zero(dim, static_cast<Eigen::Index>(n + 1) * dim);
  row.block(0, block_start(k, dim), dim, dim) = Matrix::Identity(dim, dim);
  for (std::size_t i = 0; i < given.size(); ++i) row.block(0, block_start(given[i], dim), dim, dim) = -r.coefficients[i];
  if (noise_cov) *noise_cov = r.conditional_cov;
  return row;
}

}  // namespace cmseq::testing
