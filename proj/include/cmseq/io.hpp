#pragma once

#include "cmseq/core.hpp"
#include "cmseq/sampling.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace cmseq::io {

inline constexpr std::string_view kFormatVersion = "1.0";

/// Parses a JSON model document. Schema and validation failures throw Error
/// with a field-path prefix such as "noise_covs[1]".
ModelSpec parse_model(std::string_view text);
std::string serialize_model(const ModelSpec& model);

ModelSpec load_model(const std::filesystem::path& path);
void save_model(const ModelSpec& model, const std::filesystem::path& path);

/// Stacked realization document: class "realization", optional "path" holding
/// the sample path the realization generates.
struct RealizationDocument {
  NoiseRealization values;
  std::optional<Vector> path;
};

RealizationDocument parse_realization(std::string_view text);
std::string serialize_realization(const RealizationDocument& doc);
RealizationDocument load_realization(const std::filesystem::path& path);
void save_realization(const RealizationDocument& doc, const std::filesystem::path& path);

std::string serialize_batch(const SampleBatch& batch);
void save_batch(const SampleBatch& batch, const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view text);

}  // namespace cmseq::io
