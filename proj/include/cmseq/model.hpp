#pragma once

#include "cmseq/core.hpp"

namespace cmseq {

/// Checks list lengths, block sizes and positive definiteness of every noise
/// covariance (or of the assembled R for the reciprocal model). Messages carry
/// the offending field path, e.g. "noise_covs[2]: not positive definite".
void validate(const ModelSpec& model);

/// Stacked system matrix T with T x = xi.
BlockMatrix assemble_system_matrix(const ModelSpec& model);

/// Cov(xi): block diagonal for the white-noise models, R itself for the
/// reciprocal model.
BlockMatrix assemble_noise_covariance(const ModelSpec& model);

/// J = T' P^{-1} T, symmetrized. The precision matrix of the governed sequence.
BlockMatrix information_matrix(const ModelSpec& model);

/// Same product without the final symmetrization; used to measure rounding
/// asymmetry.
Matrix raw_information_product(const ModelSpec& model);

/// C = J^{-1}. Throws NotWellPosed when J is not positive definite.
BlockMatrix covariance(const ModelSpec& model);

/// Sample path x solving T x = xi.
NoiseRealization solve_path(const ModelSpec& model, const NoiseRealization& xi);

}  // namespace cmseq
