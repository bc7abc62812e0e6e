#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "glyphforge/nn/network.hpp"

namespace glyphforge::nn {

// Miniature architectures. Each keeps the signature mechanism of the design
// it is named after and ends in the same classifier head:
// flatten -> fc(128) -> relu -> fc(K).
enum class Preset { vanilla, mini_alexnet, mini_vgg, mini_resnet, mini_densenet };

std::optional<Preset> parse_preset(std::string_view name);
std::string_view to_string(Preset preset);

inline constexpr std::size_t kHeadWidth = 128;

NetworkSpec preset_spec(Preset preset, InputShape input, std::size_t num_classes);

// Throws ConfigError for K < 2 and ShapeError when the input cannot pass
// through the preset's pooling stages.
Network build_network(Preset preset, InputShape input, std::size_t num_classes, std::uint64_t seed);

}  // namespace glyphforge::nn
