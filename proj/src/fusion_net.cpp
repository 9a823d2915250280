#include "gfuse/fusion_net.hpp"

namespace gfuse {

void NetworkConfig::validate() const {
    if (patch_size < 1) throw ShapeError("config: patch_size must be >= 1");
    if (feature_dim < 1) throw ShapeError("config: feature_dim must be >= 1");
    if (intra_blocks < 1 || inter_blocks < 1) throw ShapeError("config: need at least one block");
    if (ffn_ratio < 1) throw ShapeError("config: ffn_ratio must be >= 1");
    intra_schedule().validate();
    if (!no_inter_modal) inter_schedule().validate();
}

NetworkParams make_params(const NetworkConfig& cfg) {
    const int p2 = cfg.patch_size * cfg.patch_size;
    const int d = cfg.feature_dim;
    NetworkParams params;
    params.embed_ir = Linear::make(p2, d);
    params.embed_vis = Linear::make(p2, d);
    for (int i = 0; i < cfg.intra_blocks; ++i) {
        params.intra_ir.push_back(GcbParams::make(d, cfg.ffn_ratio));
        params.intra_vis.push_back(GcbParams::make(d, cfg.ffn_ratio));
    }
    if (!cfg.no_inter_modal)
        for (int i = 0; i < cfg.inter_blocks; ++i)
            params.inter.push_back(GcbParams::make(2 * d, cfg.ffn_ratio));
    params.rho = Linear::make(2 * d, p2);
    return params;
}

NetworkParams init_params(const NetworkConfig& cfg, uint64_t seed) {
    NetworkParams p = make_params(cfg);
    Rng rng(mix_seed(seed, 0x494e4954));  // independent init stream
    init_linear(p.embed_ir, rng);
    init_linear(p.embed_vis, rng);
    for (auto& b : p.intra_ir) init_gcb(b, rng, cfg.identity_init);
    for (auto& b : p.intra_vis) init_gcb(b, rng, cfg.identity_init);
    for (auto& b : p.inter) init_gcb(b, rng, cfg.identity_init);
    init_linear(p.rho, rng);
    return p;
}

namespace {

template <typename Params, typename Fn>
void walk_linear(const std::string& name, Params& l, Fn& fn) {
    fn(name + ".w", l.w);
    fn(name + ".b", l.b);
}

template <typename Params, typename Fn>
void walk_gcb(const std::string& name, Params& g, Fn& fn) {
    walk_linear(name + ".fc_in", g.fc_in, fn);
    fn(name + ".gconv.w_agg", g.gconv.w_agg);
    fn(name + ".gconv.w_update", g.gconv.w_update);
    fn(name + ".gconv.bias", g.gconv.bias);
    walk_linear(name + ".fc_out", g.fc_out, fn);
    walk_linear(name + ".ffn1", g.ffn1, fn);
    walk_linear(name + ".ffn2", g.ffn2, fn);
}

template <typename Params, typename Fn>
void walk_params(Params& p, Fn&& fn) {
    walk_linear("embed_ir", p.embed_ir, fn);
    walk_linear("embed_vis", p.embed_vis, fn);
    for (size_t i = 0; i < p.intra_ir.size(); ++i)
        walk_gcb("intra_ir." + std::to_string(i), p.intra_ir[i], fn);
    for (size_t i = 0; i < p.intra_vis.size(); ++i)
        walk_gcb("intra_vis." + std::to_string(i), p.intra_vis[i], fn);
    for (size_t i = 0; i < p.inter.size(); ++i)
        walk_gcb("inter." + std::to_string(i), p.inter[i], fn);
    walk_linear("rho", p.rho, fn);
}

}  // namespace

void for_each_param(NetworkParams& p, const std::function<void(const std::string&, Matrix&)>& fn) {
    walk_params(p, fn);
}

void for_each_param(const NetworkParams& p,
                    const std::function<void(const std::string&, const Matrix&)>& fn) {
    walk_params(p, fn);
}

Matrix intra_forward(const Matrix& x, Branch branch, const NetworkParams& p,
                     const NetworkConfig& cfg, std::vector<GcbCache>* caches) {
    const auto& blocks = branch == Branch::ir ? p.intra_ir : p.intra_vis;
    const KdSchedule sched = cfg.intra_schedule();
    if (blocks.size() != sched.layers.size())
        throw ShapeError("intra_forward: schedule/block count mismatch");
    Matrix cur = x;
    if (caches) caches->resize(blocks.size());
    for (size_t i = 0; i < blocks.size(); ++i) {
        auto [k, d] = sched.layers[i];
        cur = gcb_forward(cur, blocks[i], k, d, cfg.ffn_residual,
                          caches ? &(*caches)[i] : nullptr);
    }
    return cur;
}

Matrix concat_intra(const Matrix& ir_feat, const Matrix& vis_feat) {
    if (ir_feat.rows() != vis_feat.rows() || ir_feat.cols() != vis_feat.cols())
        throw ShapeError("concat_intra: branch outputs differ in shape");
    return hconcat(ir_feat, vis_feat);
}

namespace {

Matrix inter_stack(const Matrix& f, const NetworkParams& p, const NetworkConfig& cfg,
                   std::vector<GcbCache>* caches) {
    if (cfg.no_inter_modal) return f;
    const KdSchedule sched = cfg.inter_schedule();
    if (p.inter.size() != sched.layers.size())
        throw ShapeError("inter stack: schedule/block count mismatch");
    Matrix cur = f;
    if (caches) caches->resize(p.inter.size());
    for (size_t i = 0; i < p.inter.size(); ++i) {
        auto [k, d] = sched.layers[i];
        cur = gcb_forward(cur, p.inter[i], k, d, cfg.ffn_residual,
                          caches ? &(*caches)[i] : nullptr);
    }
    return cur;
}

}  // namespace

Image inter_forward(const Matrix& f, const NetworkParams& p, const NetworkConfig& cfg,
                    int h, int w) {
    Matrix y = inter_stack(f, p, cfg, nullptr);
    Image img = unpatchify(linear_forward(y, p.rho), h, w, cfg.patch_size);
    clamp01_inplace(img);
    return img;
}

Image fuse(const Image& ir, const Image& vis_y, const NetworkParams& p,
           const NetworkConfig& cfg, bool clamp_output, NetCache* cache) {
    if (ir.height != vis_y.height || ir.width != vis_y.width)
        throw ShapeError("fuse: pair dimensions differ");
    if (ir.channels != 1 || vis_y.channels != 1)
        throw ShapeError("fuse: inputs must be single-channel");

    NetCache local;
    NetCache& c = cache ? *cache : local;
    c.h = ir.height;
    c.w = ir.width;
    c.patches_ir = patchify(ir, cfg.patch_size);
    c.patches_vis = patchify(vis_y, cfg.patch_size);

    Matrix e_ir = linear_forward(c.patches_ir, p.embed_ir);
    Matrix e_vis = linear_forward(c.patches_vis, p.embed_vis);
    Matrix f_ir = intra_forward(e_ir, Branch::ir, p, cfg, &c.intra_ir);
    Matrix f_vis = intra_forward(e_vis, Branch::vis, p, cfg, &c.intra_vis);
    c.concat = concat_intra(f_ir, f_vis);
    c.rho_in = inter_stack(c.concat, p, cfg, &c.inter);
    Image fused = unpatchify(linear_forward(c.rho_in, p.rho), c.h, c.w, cfg.patch_size);
    if (clamp_output) clamp01_inplace(fused);
    return fused;
}

Image fuse_color(const Image& ir, const Image& vis_rgb, const NetworkParams& p,
                 const NetworkConfig& cfg) {
    if (vis_rgb.channels != 3) throw ShapeError("fuse_color: visible image must be RGB");
    YcbcrImage ycc = rgb_to_ycbcr(vis_rgb);
    Image yf = fuse(luminance(ir), ycc.y, p, cfg);
    return ycbcr_to_rgb(yf, ycc.cb, ycc.cr);
}

void fuse_backward(const NetCache& cache, const NetworkParams& p, const NetworkConfig& cfg,
                   const Image& dfused, NetworkParams& grads) {
    Matrix drho_out = unpatchify_backward(dfused, cfg.patch_size);
    Matrix dcur = linear_backward(cache.rho_in, p.rho, drho_out, grads.rho);

    if (!cfg.no_inter_modal) {
        for (int i = static_cast<int>(p.inter.size()) - 1; i >= 0; --i)
            dcur = gcb_backward(cache.inter[i], p.inter[i], dcur, grads.inter[i],
                                cfg.ffn_residual);
    }

    const int d = cfg.feature_dim;
    Matrix d_ir = col_slice(dcur, 0, d);
    Matrix d_vis = col_slice(dcur, d, 2 * d);

    for (int i = static_cast<int>(p.intra_ir.size()) - 1; i >= 0; --i)
        d_ir = gcb_backward(cache.intra_ir[i], p.intra_ir[i], d_ir, grads.intra_ir[i],
                            cfg.ffn_residual);
    for (int i = static_cast<int>(p.intra_vis.size()) - 1; i >= 0; --i)
        d_vis = gcb_backward(cache.intra_vis[i], p.intra_vis[i], d_vis, grads.intra_vis[i],
                             cfg.ffn_residual);

    linear_backward(cache.patches_ir, p.embed_ir, d_ir, grads.embed_ir);
    linear_backward(cache.patches_vis, p.embed_vis, d_vis, grads.embed_vis);
}

}  // namespace gfuse
