#include "gfuse/config.hpp"

#include <fstream>
#include <sstream>

namespace gfuse {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw DataError("config: bad numeric value for " + key + ": '" + v + "'");
    }
}

int parse_int(const std::string& key, const std::string& v) {
    const double x = parse_double(key, v);
    const int i = static_cast<int>(x);
    if (static_cast<double>(i) != x) throw DataError("config: expected integer for " + key);
    return i;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw DataError("config: bad boolean value for " + key + ": '" + v + "'");
}

}  // namespace

KeyValues parse_config_text(const std::string& text) {
    KeyValues kv;
    std::istringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw DataError("config: line " + std::to_string(lineno) + " has no '='");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw DataError("config: empty key on line " + std::to_string(lineno));
        kv[key] = value;
    }
    return kv;
}

KeyValues load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("config: cannot open " + path);
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_config_text(buf.str());
}

void apply_config(const KeyValues& kv, NetworkConfig& net, TrainConfig& train) {
    for (const auto& [key, v] : kv) {
        if (key == "patch_size") net.patch_size = parse_int(key, v);
        else if (key == "feature_dim") net.feature_dim = parse_int(key, v);
        else if (key == "intra_blocks") net.intra_blocks = parse_int(key, v);
        else if (key == "inter_blocks") net.inter_blocks = parse_int(key, v);
        else if (key == "ffn_ratio") net.ffn_ratio = parse_int(key, v);
        else if (key == "ffn_residual") net.ffn_residual = parse_bool(key, v);
        else if (key == "identity_init") net.identity_init = parse_bool(key, v);
        else if (key == "fixed_k") net.fixed_k = parse_int(key, v);
        else if (key == "no_dilation") net.no_dilation = parse_bool(key, v);
        else if (key == "no_inter_modal") net.no_inter_modal = parse_bool(key, v);
        else if (key == "lr0") train.lr0 = parse_double(key, v);
        else if (key == "decay") train.decay = parse_double(key, v);
        else if (key == "batch") train.batch = parse_int(key, v);
        else if (key == "epochs") train.epochs = parse_int(key, v);
        else if (key == "max_steps") train.max_steps = parse_int(key, v);
        else if (key == "lambda") train.lambda = parse_double(key, v);
        else if (key == "seed") train.seed = static_cast<uint64_t>(parse_double(key, v));
        else if (key == "beta1") train.adam.beta1 = parse_double(key, v);
        else if (key == "beta2") train.adam.beta2 = parse_double(key, v);
        else if (key == "eps") train.adam.eps = parse_double(key, v);
        else if (key == "crop_size") train.crop_size = parse_int(key, v);
        else if (key == "crop_stride") train.crop_stride = parse_int(key, v);
        else if (key == "grad_clip") train.grad_clip = parse_bool(key, v);
        else if (key == "clip_norm") train.clip_norm = parse_double(key, v);
        else throw DataError("config: unknown key '" + key + "'");
    }
}

}  // namespace gfuse
