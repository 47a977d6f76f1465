#pragma once

#include "ease/config.hpp"
#include "ease/optimizer.hpp"
#include "ease/rng.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace ease {

inline constexpr std::uint32_t k_checkpoint_version = 1;

/// Full training state: loading one and continuing reproduces the
/// uninterrupted trajectory bit for bit.
struct Checkpoint {
    TrainConfig config;
    ParamMap params;
    std::map<std::string, Tensor> adam_m;
    std::map<std::string, Tensor> adam_v;
    std::int64_t adam_step = 0;
    std::int64_t step = 0;
    RngState rng;
};

/// Container: magic "EASE", u32 version, u64 manifest length, JSON manifest
/// (config snapshot, tensor names/shapes/dtypes, step, RngState), then raw
/// little-endian f64 payloads in manifest order. Written atomically via a
/// temp file + rename.
void save_checkpoint(const Checkpoint& state, const std::string& path);

/// Distinct errors for a wrong magic, a version mismatch, truncation
/// (including a corrupted manifest length), and manifest/payload
/// inconsistencies naming the offending tensor.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace ease
