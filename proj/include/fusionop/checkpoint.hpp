#pragma once

#include "fusionop/model.hpp"

#include <json.hpp>

#include <filesystem>
#include <memory>
#include <span>

namespace fusionop::model {

inline constexpr int kCheckpointVersion = 1;

/// Writes `dir/manifest.json` plus one little-endian row-major f64 blob per
/// tensor (branch{i}_layer{j}_{W|b}.f64, pod{i}_modes.f64, pod{i}_mean.f64,
/// freq{i}.f64, weights.f64, ...). `extra` is stored under "hyperparameters".
/// The directory is assembled under a temporary name and renamed into place.
void save_checkpoint(const OperatorModel& model, const std::filesystem::path& dir,
                     const nlohmann::json& extra = nlohmann::json::object());

std::unique_ptr<OperatorModel> load_checkpoint(const std::filesystem::path& dir);

nlohmann::json read_checkpoint_manifest(const std::filesystem::path& dir);

/// FNV-1a over the raw bytes of the given tensors, in order.
std::uint64_t tensor_digest(std::span<const ConstParamRef> tensors);

} // namespace fusionop::model
