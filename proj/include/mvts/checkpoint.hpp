#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mvts/optim.hpp"
#include "mvts/tensor.hpp"

namespace mvts {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointTensor {
  std::string name;
  Shape shape;
  std::vector<float> data;

  bool operator==(const CheckpointTensor&) const = default;
};

// Named parameter table plus the JSON echo of the config that produced it.
// Binary layout, little-endian:
//   "CKPT" | u32 version | u32 param_count |
//   per param: u16 name_len, name, u8 rank, u32 dims[rank], f32 data[] |
//   u32 config_len, config JSON (UTF-8)
struct ModelCheckpoint {
  std::uint32_t version = kCheckpointVersion;
  std::vector<CheckpointTensor> parameters;
  std::string config_json = "{}";
  // Mirrors the "seed" field of config_json.
  std::uint64_t seed = 0;

  const CheckpointTensor* find(const std::string& name) const;
  bool operator==(const ModelCheckpoint&) const = default;
};

// Rounds every parameter to f32.
ModelCheckpoint make_checkpoint(const ParameterList& params, std::string config_json, std::uint64_t seed);

// Copies checkpoint values into `targets` by name. Every target must be present
// with a matching shape; extra checkpoint entries are ignored.
void load_parameters(const ModelCheckpoint& checkpoint, const ParameterList& targets);

std::vector<std::uint8_t> encode_checkpoint(const ModelCheckpoint& checkpoint);
ModelCheckpoint decode_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const ModelCheckpoint& checkpoint, const std::filesystem::path& path);
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mvts
