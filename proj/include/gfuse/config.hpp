#pragma once

#include <map>
#include <string>

#include "gfuse/training.hpp"

namespace gfuse {

using KeyValues = std::map<std::string, std::string>;

// Flat `key = value` lines; '#' starts a comment. Keys mirror the
// NetworkConfig / TrainConfig field names.
KeyValues parse_config_text(const std::string& text);
KeyValues load_config_file(const std::string& path);

// Applies recognized keys onto the two configs; unknown keys are an error so
// typos do not silently fall back to defaults.
void apply_config(const KeyValues& kv, NetworkConfig& net, TrainConfig& train);

}  // namespace gfuse
