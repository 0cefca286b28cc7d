#include "cmseq/sampling.hpp"

#include "cmseq/model.hpp"
#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

namespace cmseq {

namespace {

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64(std::uint64_t z) {
  z += kGoldenGamma;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Symmetric factors L with L L' = Cov(xi): one per block for white-noise
// models, a single full factor for the reciprocal model.
struct NoiseFactor {
  MatrixList blocks;
  Matrix full;
};

NoiseFactor noise_factor(const ModelSpec& model) {
  NoiseFactor f;
  if (std::holds_alternative<ReciprocalModel>(model)) {
    f.full = linalg::cholesky_lower(assemble_noise_covariance(model).dense(), "reciprocal matrix R");
    return f;
  }
  const BlockMatrix p = assemble_noise_covariance(model);
  for (int k = 0; k <= p.shape().horizon; ++k) {
    f.blocks.push_back(linalg::cholesky_lower(p.block(k, k), "noise_covs[" + std::to_string(k) + "]"));
  }
  return f;
}

template <typename Fn>
void for_each_path(std::size_t count, unsigned workers, Fn&& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
}

}  // namespace

PathRng::PathRng(std::uint64_t seed, std::uint64_t path_index) : engine_(stream_seed(seed, path_index)) {}

std::uint64_t PathRng::stream_seed(std::uint64_t seed, std::uint64_t path_index) {
  return splitmix64(seed + (path_index + 1) * kGoldenGamma);
}

double PathRng::uniform() {
  // 53 random mantissa bits mapped to (0, 1].
  return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double PathRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double radius = std::sqrt(-2.0 * std::log(uniform()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::vector<NoiseRealization> sample_noise(const ModelSpec& model, std::uint64_t seed, std::size_t count,
                                           SamplingOptions options) {
  if (count == 0) throw Error(ErrorCode::InvalidArgument, "sample count must be at least 1");
  validate(model);
  const SequenceShape shape = shape_of(model);
  const NoiseFactor factor = noise_factor(model);

  std::vector<NoiseRealization> out(count, NoiseRealization(shape));
  for_each_path(count, options.workers, [&](std::size_t i) {
    PathRng rng(seed, i);
    Vector z(shape.size());
    for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = rng.normal();
    if (factor.blocks.empty()) {
      out[i].values = factor.full * z;
      return;
    }
    for (int k = 0; k <= shape.horizon; ++k) {
      out[i].block(k) = factor.blocks[static_cast<std::size_t>(k)] * z.segment(static_cast<Eigen::Index>(k) * shape.dim, shape.dim);
    }
  });
  return out;
}

SampleBatch sample(const ModelSpec& model, std::uint64_t seed, std::size_t count, SamplingOptions options) {
  const auto noises = sample_noise(model, seed, count, options);
  const linalg::DenseSolver solver(assemble_system_matrix(model).dense(), "system matrix T");
  SampleBatch batch{shape_of(model), seed, count, std::vector<Vector>(count)};
  for_each_path(count, options.workers, [&](std::size_t i) { batch.paths[i] = solver.solve(noises[i].values); });
  return batch;
}

BlockMatrix empirical_covariance(const SampleBatch& batch) {
  if (batch.paths.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "empirical covariance needs at least 2 paths");
  }
  const auto size = batch.shape.size();
  Matrix stacked(size, static_cast<Eigen::Index>(batch.paths.size()));
  for (std::size_t i = 0; i < batch.paths.size(); ++i) {
    if (batch.paths[i].size() != size) {
      throw Error(ErrorCode::DimensionMismatch, "path " + std::to_string(i) + " has the wrong length");
    }
    stacked.col(static_cast<Eigen::Index>(i)) = batch.paths[i];
  }
  return BlockMatrix(batch.shape, stacked * stacked.transpose() / static_cast<double>(batch.paths.size()));
}

VerificationReport verify_equivalence(const EquivalencePair& pair, std::uint64_t seed, std::size_t count,
                                      VerificationTolerances tolerances) {
  VerificationReport report;
  report.tolerances = tolerances;
  report.count = count;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  try {
    report.precision_error = pair.precision_residual();

    const Matrix c = covariance(pair.source()).dense();
    const Matrix& t2 = pair.target_system().dense();
    const Matrix& p2 = pair.target_noise_cov().dense();
    report.noise_cov_error = linalg::relative_frobenius(p2, t2 * c * t2.transpose());

    const linalg::DenseSolver t1_solver(pair.source_system().dense(), "source system matrix T1");
    const linalg::DenseSolver t2_solver(t2, "target system matrix T2");
    for (const auto& xi : sample_noise(pair.source(), seed, count)) {
      const Vector x1 = t1_solver.solve(xi.values);
      const double scale = 1.0 + x1.norm();
      for (const auto& zeta : {map_noise(pair, xi), map_noise_normal_equations(pair, xi)}) {
        const Vector x2 = t2_solver.solve(zeta.values);
        report.max_path_error = std::max(report.max_path_error, (x1 - x2).norm() / scale);
      }
    }
  } catch (const Error&) {
    report.max_path_error = std::max(report.max_path_error, kInf);
    if (report.precision_error == 0.0) report.precision_error = kInf;
    report.passed = false;
    return report;
  }
  report.passed = report.max_path_error <= tolerances.path && report.precision_error <= tolerances.precision &&
                  report.noise_cov_error <= tolerances.noise_cov && std::isfinite(report.max_path_error);
  return report;
}

}  // namespace cmseq
