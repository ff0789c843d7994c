#pragma once

#include <string>

#include "kge/model.hpp"

namespace kge {

// Binary model format: magic "DREM", u32 version, u32 alpha, the entity
// type table (name, count), the relation table (name, signature, dynamic
// flag), then little-endian float32 blocks: one embedding table per type,
// one vector per static relation, W row-major, b. Round trips are bit
// exact; a version mismatch is rejected.
inline constexpr uint32_t kModelFormatVersion = 1;

void save_model(const std::string& path, const ModelParams& params);
ModelParams load_model(const std::string& path);

}  // namespace kge
