#include "gfuse/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "gfuse/image_io.hpp"

namespace fs = std::filesystem;

namespace gfuse {

namespace {

bool raster_ext(const fs::path& p) {
    std::string e = p.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), ::tolower);
    return e == ".png" || e == ".bmp";
}

std::map<std::string, std::string> list_rasters(const std::string& dir) {
    if (!fs::is_directory(dir)) throw DataError("dataset: not a directory: " + dir);
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && raster_ext(entry.path()))
            out[entry.path().filename().string()] = entry.path().string();
    return out;
}

}  // namespace

std::vector<PairPath> list_pair_dirs(const std::string& ir_dir, const std::string& vis_dir) {
    auto ir = list_rasters(ir_dir);
    auto vis = list_rasters(vis_dir);
    std::string orphans;
    for (const auto& [name, _] : ir)
        if (!vis.count(name)) orphans += " ir/" + name;
    for (const auto& [name, _] : vis)
        if (!ir.count(name)) orphans += " vis/" + name;
    if (!orphans.empty()) throw DataError("dataset: unpaired files:" + orphans);
    if (ir.empty()) throw DataError("dataset: no image pairs under " + ir_dir);

    std::vector<PairPath> pairs;
    for (const auto& [name, path] : ir)
        pairs.push_back({fs::path(name).stem().string(), path, vis.at(name)});
    return pairs;
}

std::vector<PairPath> list_pair_root(const std::string& root) {
    return list_pair_dirs((fs::path(root) / "ir").string(), (fs::path(root) / "vis").string());
}

std::vector<PairPath> read_pair_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("dataset: cannot open manifest " + path);
    std::vector<PairPath> pairs;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        PairPath p;
        if (!std::getline(ss, p.name, '\t') || !std::getline(ss, p.ir, '\t') ||
            !std::getline(ss, p.vis, '\t') || p.name.empty() || p.ir.empty() || p.vis.empty())
            throw DataError("dataset: malformed manifest line " + std::to_string(lineno) +
                            " in " + path);
        pairs.push_back(std::move(p));
    }
    if (pairs.empty()) throw DataError("dataset: empty manifest " + path);
    return pairs;
}

std::vector<PairPath> resolve_pair_listing(const std::string& path) {
    if (fs::is_directory(path)) return list_pair_root(path);
    return read_pair_manifest(path);
}

std::vector<ImagePair> load_training_pairs(const std::vector<PairPath>& listing) {
    std::vector<ImagePair> pairs;
    pairs.reserve(listing.size());
    for (const auto& p : listing)
        pairs.emplace_back(luminance(load_image(p.ir)), luminance(load_image(p.vis)));
    return pairs;
}

}  // namespace gfuse
