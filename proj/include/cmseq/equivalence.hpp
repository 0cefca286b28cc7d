#pragma once

#include "cmseq/core.hpp"
#include "cmseq/structure.hpp"

namespace cmseq {

enum class ConversionMethod { Generic, ClosedForm };

std::string_view conversion_method_name(ConversionMethod method);
ConversionMethod conversion_method_from_name(std::string_view name);

/// Source and target models together with their stacked system and noise
/// matrices. Construction does not require the two to be equivalent; use
/// precision_residual() to measure how far apart their precision matrices are.
class EquivalencePair {
 public:
  EquivalencePair(ModelSpec source, ModelSpec target, ConversionMethod method = ConversionMethod::Generic);

  const ModelSpec& source() const { return source_; }
  const ModelSpec& target() const { return target_; }
  ConversionMethod method() const { return method_; }

  const BlockMatrix& source_system() const { return t1_; }
  const BlockMatrix& source_noise_cov() const { return p1_; }
  const BlockMatrix& target_system() const { return t2_; }
  const BlockMatrix& target_noise_cov() const { return p2_; }

  /// ||J1 - J2||_F / ||J1||_F.
  double precision_residual() const;

 private:
  ModelSpec source_;
  ModelSpec target_;
  ConversionMethod method_;
  BlockMatrix t1_, p1_, t2_, p2_;
};

/// Builds the unique model of `target` kind governing the same sequence as
/// `source`. Generic conversion reads each target parameter off Gaussian
/// conditioning on C; ClosedForm uses the forward/backward Markov or the
/// CM_L-to-reciprocal recursions and is rejected for any other pair.
///
/// Throws Inadmissible when the source sequence lacks the structure the target
/// class requires (at tolerance `tol`).
EquivalencePair convert(const ModelSpec& source, ModelKind target,
                        ConversionMethod method = ConversionMethod::Generic,
                        double tol = kDefaultStructureTolerance);

/// True when a closed-form recursion exists for source -> target.
bool has_closed_form(ModelKind source, ModelKind target);

BackwardMarkovModel markov_fwd_to_bwd_params(const ForwardMarkovModel& fwd);
/// Backward-to-forward by applying the forward recursion to the time-reversed chain.
ForwardMarkovModel markov_bwd_to_fwd_params(const BackwardMarkovModel& bwd);

/// Noise map for a forward<->backward Markov pair (either direction).
NoiseRealization markov_noise_map(const EquivalencePair& pair, const NoiseRealization& xi);

/// Reciprocal parameters of a forward CM_L model that satisfies the
/// reciprocity identity; throws Inadmissible otherwise.
ReciprocalModel cml_to_reciprocal_params(const CmModel& cml, double tol = kDefaultStructureTolerance);

/// e^R from the CM_L noise e for a forward CM_L -> reciprocal pair.
NoiseRealization cml_to_reciprocal_noise_map(const EquivalencePair& pair, const NoiseRealization& xi);

/// Target noise/boundary realization producing the same sample path as xi
/// under the source. ClosedForm pairs use their recursions; everything else
/// solves T1 x = xi and returns T2 x.
NoiseRealization map_noise(const EquivalencePair& pair, const NoiseRealization& xi);

/// Solves the normal-equation form T2' P2^{-1} zeta = T1' P1^{-1} xi directly.
NoiseRealization map_noise_normal_equations(const EquivalencePair& pair, const NoiseRealization& xi);

}  // namespace cmseq
