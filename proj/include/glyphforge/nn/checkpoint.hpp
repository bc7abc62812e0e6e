#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "glyphforge/nn/network.hpp"

namespace glyphforge::nn {

// On-disk layout, all integers little-endian, no padding:
//   "CNNW" | version u32 (=1) | count u32 |
//   per tensor: name_len u16 | name bytes | ndim u8 | dims u32... | f32 data...
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointEntry {
  std::string name;
  Shape shape;
  std::vector<float> data;
};

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  std::vector<CheckpointEntry> entries;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
// Throws FormatError on bad magic, unknown version or truncated/trailing bytes.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

Checkpoint make_checkpoint(const Network& net);

enum class LoadMode { strict, feature_extractor_only };

// Validates everything before touching the network, so a failed load leaves
// it unmodified. strict: names and shapes must match one-to-one.
// feature_extractor_only: the same rule restricted to feature-extractor
// parameters; classifier parameters keep their current values.
void apply_checkpoint(Network& net, const Checkpoint& ckpt, LoadMode mode);

void save_checkpoint(const Network& net, const std::filesystem::path& path);
void load_checkpoint(Network& net, const std::filesystem::path& path, LoadMode mode);

}  // namespace glyphforge::nn
