#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dan/corpus.hpp"
#include "dan/model.hpp"
#include "json.hpp"

namespace dan {

// Binary layout, little-endian throughout:
//   magic "DANCKPT1" | u32 format version | u64 manifest bytes | manifest JSON
//   u32 parameter count, then per parameter (sorted by name):
//   u32 name bytes | name | u32 rank | u64 extents[rank] | f64 values[numel]
constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
    std::vector<std::string> vocab_tokens;
    std::uint64_t vocab_hash = 0;
    std::uint64_t split_seed = 0;
    nlohmann::json extra = nlohmann::json::object();
};

struct Checkpoint {
    Model model;
    CheckpointMeta meta;
};

nlohmann::json config_to_json(const ModelConfig& cfg);
ModelConfig config_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const Model& model, const CheckpointMeta& meta);
std::vector<char> serialize_checkpoint(const Model& model, const CheckpointMeta& meta);

// Rebuilds the model from the manifest and verifies every declared shape.
Checkpoint load_checkpoint(const std::filesystem::path& path);
Checkpoint deserialize_checkpoint(const std::vector<char>& bytes);

}  // namespace dan
