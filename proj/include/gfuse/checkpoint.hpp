#pragma once

#include <optional>
#include <string>

#include "gfuse/training.hpp"

namespace gfuse {

// Versioned binary container: magic, format version, network config, named
// parameter tensors with shape headers (doubles, little-endian), optional
// optimizer state for resuming. Writes are atomic (temp file + rename).
inline constexpr uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    NetworkConfig config;
    NetworkParams params;
    std::optional<OptimizerState> opt;
    uint64_t seed = 0;
    int next_epoch = 0;
};

void save_checkpoint(const std::string& path, const NetworkConfig& cfg,
                     const NetworkParams& params, const OptimizerState* opt,
                     uint64_t seed, int next_epoch);

// Throws FormatError on bad magic/version, ShapeError on tensor mismatches.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace gfuse
