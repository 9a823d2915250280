#include "gfuse/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

namespace gfuse {

namespace {

constexpr char kMagic[4] = {'G', 'F', 'C', 'K'};

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_i32(std::string& out, int32_t v) { put_u32(out, static_cast<uint32_t>(v)); }
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<uint64_t>(v)); }

struct Reader {
    const std::string& buf;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > buf.size()) throw FormatError("checkpoint: truncated file");
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<uint8_t>(buf[pos++])) << (8 * i);
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<uint8_t>(buf[pos++])) << (8 * i);
        return v;
    }
    int32_t i32() { return static_cast<int32_t>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }
    uint8_t u8() {
        need(1);
        return static_cast<uint8_t>(buf[pos++]);
    }
    std::string str() {
        const uint32_t n = u32();
        need(n);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
};

void put_tensor(std::string& out, const std::string& name, const Matrix& m) {
    put_u32(out, static_cast<uint32_t>(name.size()));
    out.append(name);
    put_u32(out, static_cast<uint32_t>(m.rows()));
    put_u32(out, static_cast<uint32_t>(m.cols()));
    for (size_t i = 0; i < m.size(); ++i) put_f64(out, m.data()[i]);
}

void read_tensor_into(Reader& r, const std::string& expect_name, Matrix& m) {
    const std::string name = r.str();
    if (name != expect_name)
        throw ShapeError("checkpoint: tensor '" + name + "' where '" + expect_name + "' expected");
    const int rows = r.i32();
    const int cols = r.i32();
    if (rows != m.rows() || cols != m.cols())
        throw ShapeError("checkpoint: shape mismatch for tensor '" + name + "'");
    for (size_t i = 0; i < m.size(); ++i) m.data()[i] = r.f64();
}

}  // namespace

void save_checkpoint(const std::string& path, const NetworkConfig& cfg,
                     const NetworkParams& params, const OptimizerState* opt,
                     uint64_t seed, int next_epoch) {
    std::string out;
    out.append(kMagic, 4);
    put_u32(out, kCheckpointVersion);
    put_i32(out, cfg.patch_size);
    put_i32(out, cfg.feature_dim);
    put_i32(out, cfg.intra_blocks);
    put_i32(out, cfg.inter_blocks);
    put_i32(out, cfg.ffn_ratio);
    out.push_back(cfg.ffn_residual ? 1 : 0);
    out.push_back(cfg.identity_init ? 1 : 0);
    put_i32(out, cfg.fixed_k);
    out.push_back(cfg.no_dilation ? 1 : 0);
    out.push_back(cfg.no_inter_modal ? 1 : 0);
    put_u64(out, seed);
    put_i32(out, next_epoch);

    uint32_t count = 0;
    for_each_param(params, [&](const std::string&, const Matrix&) { ++count; });
    put_u32(out, count);
    for_each_param(params, [&](const std::string& name, const Matrix& m) {
        put_tensor(out, name, m);
    });

    out.push_back(opt ? 1 : 0);
    if (opt) {
        put_u64(out, static_cast<uint64_t>(opt->t));
        for (const auto* bank : {&opt->m, &opt->v}) {
            if (bank->size() != count) throw ShapeError("checkpoint: optimizer state size mismatch");
            size_t i = 0;
            for_each_param(params, [&](const std::string& name, const Matrix&) {
                put_tensor(out, name, (*bank)[i++]);
            });
        }
    }

    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw FormatError("checkpoint: cannot open " + tmp + " for writing");
        f.write(out.data(), static_cast<std::streamsize>(out.size()));
        if (!f) throw FormatError("checkpoint: write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FormatError("checkpoint: cannot open " + path);
    std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    Reader r{buf};
    r.need(4);
    if (std::memcmp(buf.data(), kMagic, 4) != 0)
        throw FormatError("checkpoint: bad magic in " + path);
    r.pos = 4;
    const uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        throw FormatError("checkpoint: unsupported version " + std::to_string(version));

    Checkpoint ck;
    ck.config.patch_size = r.i32();
    ck.config.feature_dim = r.i32();
    ck.config.intra_blocks = r.i32();
    ck.config.inter_blocks = r.i32();
    ck.config.ffn_ratio = r.i32();
    ck.config.ffn_residual = r.u8() != 0;
    ck.config.identity_init = r.u8() != 0;
    ck.config.fixed_k = r.i32();
    ck.config.no_dilation = r.u8() != 0;
    ck.config.no_inter_modal = r.u8() != 0;
    ck.config.validate();
    ck.seed = r.u64();
    ck.next_epoch = r.i32();

    ck.params = make_params(ck.config);
    uint32_t count = 0;
    for_each_param(ck.params, [&](const std::string&, const Matrix&) { ++count; });
    if (r.u32() != count) throw ShapeError("checkpoint: tensor count mismatch");
    for_each_param(ck.params, [&](const std::string& name, Matrix& m) {
        read_tensor_into(r, name, m);
    });

    if (r.u8()) {
        OptimizerState opt = make_optimizer_state(ck.params);
        opt.t = static_cast<int64_t>(r.u64());
        for (auto* bank : {&opt.m, &opt.v}) {
            size_t i = 0;
            for_each_param(ck.params, [&](const std::string& name, Matrix&) {
                read_tensor_into(r, name, (*bank)[i++]);
            });
        }
        ck.opt = std::move(opt);
    }
    if (r.pos != buf.size()) throw FormatError("checkpoint: trailing bytes in " + path);
    return ck;
}

}  // namespace gfuse
