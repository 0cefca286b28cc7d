#include "cmseq/model.hpp"
#include "cmseq/sampling.hpp"

#include "fixtures.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace cmseq;
using namespace cmseq::testing;

TEST_CASE("sampling is a pure function of model, seed and count") {
  Rng rng(1);
  const ModelSpec model = random_model(rng, ModelKind::CmfBackward, {5, 2});
  const SampleBatch a = sample(model, 7, 1);
  const SampleBatch b = sample(model, 7, 1);
  REQUIRE(a.paths.size() == 1);
  CHECK(a.paths[0] == b.paths[0]);
  CHECK(sample(model, 8, 1).paths[0] != a.paths[0]);

  // Path i does not depend on how many paths are drawn or on the worker count.
  const SampleBatch serial = sample(model, 7, 64);
  const SampleBatch threaded = sample(model, 7, 64, SamplingOptions{4});
  const SampleBatch automatic = sample(model, 7, 64, SamplingOptions{0});
  CHECK(serial.paths[0] == a.paths[0]);
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(serial.paths[i] == threaded.paths[i]);
    CHECK(serial.paths[i] == automatic.paths[i]);
  }
}

TEST_CASE("count must be positive") {
  CHECK_THROWS_AS(sample(unit_forward_markov(), 1, 0), Error);
  CHECK_THROWS_AS(sample_noise(unit_forward_markov(), 1, 0), Error);
}

TEST_CASE("path streams are portable") {
  // splitmix64 of seed + (i + 1) * golden gamma, fed to mt19937_64.
  auto splitmix = [](std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  const std::uint64_t seed = 42;
  CHECK(PathRng::stream_seed(seed, 3) == splitmix(seed + 4 * 0x9E3779B97F4A7C15ULL));

  PathRng rng(seed, 0);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
  }
}

TEST_CASE("empirical covariance of constructed batches") {
  SampleBatch zeros{{1, 1}, 0, 4, std::vector<Vector>(4, Vector::Zero(2))};
  CHECK(empirical_covariance(zeros).dense().isZero());

  const std::size_t count = 3;
  SampleBatch rows{{2, 1}, 0, count, {}};
  for (std::size_t i = 0; i < count; ++i) rows.paths.push_back(std::sqrt(double(count)) * Vector::Unit(3, Eigen::Index(i)));
  CHECK((empirical_covariance(rows).dense() - Matrix::Identity(3, 3)).norm() < 1e-14);

  SampleBatch single{{1, 1}, 0, 1, {Vector::Zero(2)}};
  CHECK_THROWS_AS(empirical_covariance(single), Error);
}

TEST_CASE("large batches reproduce the model covariance") {
  const BlockMatrix unit = empirical_covariance(sample(unit_forward_markov(), 2024, 100000, SamplingOptions{0}));
  const Matrix expected = (Matrix(2, 2) << 1, 1, 1, 2).finished();
  CHECK((unit.dense() - expected).norm() / expected.norm() < 0.05);

  const ForwardMarkovModel iid{{3, 1}, scalars({0, 0, 0}), scalars({1, 1, 1, 1})};
  const BlockMatrix white = empirical_covariance(sample(iid, 99, 100000, SamplingOptions{0}));
  CHECK((white.dense() - Matrix::Identity(4, 4)).norm() / 2.0 < 0.05);

  // Correlated reciprocal noise goes through a factor of the full R.
  Rng rng(8);
  const ModelSpec recip = random_reciprocal(rng, {4, 2});
  const auto noise = sample_noise(recip, 5, 100000, SamplingOptions{0});
  Matrix acc = Matrix::Zero(10, 10);
  for (const auto& xi : noise) acc.noalias() += xi.values * xi.values.transpose();
  acc /= double(noise.size());
  const Matrix r = oracle_system_matrix(recip);
  CHECK((acc - r).norm() / r.norm() < 0.05);
}

TEST_CASE("verification of known pairs") {
  const EquivalencePair markov = convert(unit_forward_markov(), ModelKind::BackwardMarkov);
  const VerificationReport ok = verify_equivalence(markov, 3, 1000);
  CHECK(ok.passed);
  CHECK(ok.max_path_error <= 1e-9);
  CHECK(ok.count == 1000);

  Rng rng(9);
  const ModelSpec model = random_model(rng, ModelKind::CmlBackward, {6, 3});
  const VerificationReport same = verify_equivalence(EquivalencePair(model, model), 1, 50);
  CHECK(same.passed);
  CHECK(same.max_path_error < 1e-14);
  CHECK(same.precision_error == 0.0);
  CHECK(same.noise_cov_error < 1e-12);

  auto bwd = std::get<BackwardMarkovModel>(markov.target());
  for (auto& m : bwd.transitions) m *= 1.01;
  for (auto& m : bwd.noise_covs) m *= 1.01;
  const VerificationReport bad = verify_equivalence(EquivalencePair(unit_forward_markov(), bwd), 3, 100);
  CHECK_FALSE(bad.passed);
  CHECK(bad.precision_error > 1e-3);
  CHECK(bad.precision_error < 1e-1);
  CHECK(bad.max_path_error > 1e-8);
}

TEST_CASE("property: every supported conversion verifies") {
  Rng rng(10);
  for (int trial = 0; trial < 42; ++trial) {
    const ModelKind kind = kAllModelKinds[trial % 7];
    const SequenceShape shape{uniform_int(rng, 2, 10), uniform_int(rng, 1, 3)};
    const ModelSpec source = random_model(rng, kind, shape, static_cast<CmVariant>((trial / 7) % 3), trial % 2 == 0);
    const StructureReport r = classify(information_matrix(source));
    for (ModelKind target : kAllModelKinds) {
      if (!admits(r, target)) continue;
      CAPTURE(model_kind_name(kind));
      CAPTURE(model_kind_name(target));
      const VerificationReport v = verify_equivalence(convert(source, target), std::uint64_t(trial), 20);
      CHECK(v.passed);
    }
  }
}
