#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sensegen/data.hpp"
#include "sensegen/discriminator.hpp"
#include "sensegen/generator.hpp"
#include "sensegen/tensor.hpp"

namespace sensegen {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Versioned container of named parameter tensors plus a free-form JSON
// metadata document (model config, normalization record, training config,
// metric history).
//
// Byte layout, all integers little-endian:
//   8 bytes   magic "SGENCKPT"
//   u32       format version
//   u64       metadata length, then that many UTF-8 bytes (JSON)
//   u32       tensor count
//   per tensor: u32 name length, name bytes, u32 rank, u64 extents[rank],
//               f64 payload (row-major)
struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  nlohmann::json meta;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor& tensor(const std::string& name) const;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// JSON forms of the model configs and the normalization record.
nlohmann::json to_json(const GeneratorConfig& cfg);
nlohmann::json to_json(const DiscriminatorConfig& cfg);
nlohmann::json to_json(const NormRecord& rec);
GeneratorConfig generator_config_from_json(const nlohmann::json& j);
DiscriminatorConfig discriminator_config_from_json(const nlohmann::json& j);
NormRecord norm_record_from_json(const nlohmann::json& j);

// Model packing. extra_meta entries are merged into the checkpoint metadata
// (normalization record, training config, metric history, ...).
Checkpoint make_checkpoint(GeneratorModel& model, const nlohmann::json& extra_meta);
Checkpoint make_checkpoint(DiscriminatorModel& model, const nlohmann::json& extra_meta);
GeneratorModel generator_from_checkpoint(const Checkpoint& ckpt);
DiscriminatorModel discriminator_from_checkpoint(const Checkpoint& ckpt);

}  // namespace sensegen
