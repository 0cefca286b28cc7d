#pragma once

#include "cmseq/core.hpp"
#include "cmseq/equivalence.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace cmseq {

/// Portable per-path random stream.
///
/// Path i of a batch drawn with seed s uses a std::mt19937_64 seeded with
/// splitmix64(s + (i + 1) * 0x9E3779B97F4A7C15). Standard normals come from
/// Box-Muller over 53-bit uniforms, so streams do not depend on the standard
/// library's distribution implementations.
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t path_index);

  double uniform();  // in (0, 1]
  double normal();

  static std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t path_index);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct SampleBatch {
  SequenceShape shape;
  std::uint64_t seed = 0;
  std::size_t count = 0;
  std::vector<Vector> paths;
};

struct SamplingOptions {
  /// 0 picks the hardware concurrency. Output does not depend on this value.
  unsigned workers = 1;
};

/// Draws `count` noise/boundary realizations xi ~ N(0, P) of the model.
std::vector<NoiseRealization> sample_noise(const ModelSpec& model, std::uint64_t seed, std::size_t count,
                                           SamplingOptions options = {});

/// Draws `count` state paths by solving T x = xi for each sampled xi.
SampleBatch sample(const ModelSpec& model, std::uint64_t seed, std::size_t count, SamplingOptions options = {});

/// Zero-mean sample covariance (divisor = count). Requires count >= 2.
BlockMatrix empirical_covariance(const SampleBatch& batch);

struct VerificationTolerances {
  double path = 1e-8;
  double precision = 1e-8;
  double noise_cov = 1e-8;
};

struct VerificationReport {
  double max_path_error = 0.0;   // max ||x1 - x2|| / (1 + ||x1||)
  double precision_error = 0.0;  // ||J1 - J2||_F / ||J1||_F
  double noise_cov_error = 0.0;  // ||T2 C T2' - P2||_F / ||P2||_F
  bool passed = false;
  VerificationTolerances tolerances;
  std::size_t count = 0;
};

/// Draws source realizations, maps each through map_noise and through the
/// normal-equation form, and compares the reconstructed paths. Failures are
/// reported in the result; nothing is thrown for a non-equivalent pair.
VerificationReport verify_equivalence(const EquivalencePair& pair, std::uint64_t seed, std::size_t count,
                                      VerificationTolerances tolerances = {});

}  // namespace cmseq
