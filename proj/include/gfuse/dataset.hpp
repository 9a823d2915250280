#pragma once

#include <string>
#include <vector>

#include "gfuse/training.hpp"

namespace gfuse {

struct PairPath {
    std::string name;  // shared file name without extension
    std::string ir, vis;
};

// Same-named files under <ir_dir> and <vis_dir>, sorted by name. Unmatched
// files on either side raise a DataError naming the orphans.
std::vector<PairPath> list_pair_dirs(const std::string& ir_dir, const std::string& vis_dir);

// A dataset root containing ir/ and vis/ subdirectories.
std::vector<PairPath> list_pair_root(const std::string& root);

// Tab-separated listing: name<TAB>ir_path<TAB>vis_path
std::vector<PairPath> read_pair_manifest(const std::string& path);

// Accepts either a dataset root directory or a .tsv manifest.
std::vector<PairPath> resolve_pair_listing(const std::string& path);

// Loads pairs as single-channel images (color inputs reduced to luminance).
std::vector<ImagePair> load_training_pairs(const std::vector<PairPath>& listing);

}  // namespace gfuse
