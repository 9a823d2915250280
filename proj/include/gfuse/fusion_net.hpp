#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gfuse/graph_conv.hpp"
#include "gfuse/image.hpp"

namespace gfuse {

struct NetworkConfig {
    int patch_size = 4;
    int feature_dim = 16;
    int intra_blocks = 6;
    int inter_blocks = 6;
    int ffn_ratio = 4;
    bool ffn_residual = true;
    bool identity_init = false;
    // ablation switches
    int fixed_k = 0;          // 0 = progressive k from the ramp
    bool no_dilation = false;
    bool no_inter_modal = false;

    KdSchedule intra_schedule() const { return KdSchedule::ramp(intra_blocks, fixed_k, no_dilation); }
    KdSchedule inter_schedule() const { return KdSchedule::ramp(inter_blocks, fixed_k, no_dilation); }
    void validate() const;
};

// Two embedding maps, two independent intra-modal GCB stacks over D features,
// one cross-modal stack over the 2D concatenation, and the reduction back to
// patch intensities.
struct NetworkParams {
    Linear embed_ir, embed_vis;              // patch^2 -> D
    std::vector<GcbParams> intra_ir, intra_vis;
    std::vector<GcbParams> inter;            // over 2D features
    Linear rho;                              // 2D -> patch^2
};

NetworkParams make_params(const NetworkConfig& cfg);              // zero-filled
NetworkParams init_params(const NetworkConfig& cfg, uint64_t seed);

// Stable-order traversal of every parameter tensor; the order defines the
// optimizer-state and checkpoint layout.
void for_each_param(NetworkParams& p, const std::function<void(const std::string&, Matrix&)>& fn);
void for_each_param(const NetworkParams& p,
                    const std::function<void(const std::string&, const Matrix&)>& fn);

enum class Branch { ir, vis };

struct NetCache {
    int h = 0, w = 0;
    Matrix patches_ir, patches_vis;
    std::vector<GcbCache> intra_ir, intra_vis, inter;
    Matrix concat;   // [intra_ir || intra_vis]
    Matrix rho_in;   // input of the reduction map
};

Matrix intra_forward(const Matrix& x, Branch branch, const NetworkParams& p,
                     const NetworkConfig& cfg, std::vector<GcbCache>* caches = nullptr);

// Channel-wise concatenation: columns [0,D) from ir, [D,2D) from vis.
Matrix concat_intra(const Matrix& ir_feat, const Matrix& vis_feat);

// Cross-modal stack + reduction + unpatchify back to h x w, clamped to [0,1].
Image inter_forward(const Matrix& f, const NetworkParams& p, const NetworkConfig& cfg,
                    int h, int w);

// Full pipeline on an aligned single-channel pair. Training passes
// clamp_output=false so the loss sees the unclamped raster.
Image fuse(const Image& ir, const Image& vis_y, const NetworkParams& p,
           const NetworkConfig& cfg, bool clamp_output = true, NetCache* cache = nullptr);

// Fuses the Y channel and carries the visible chroma through.
Image fuse_color(const Image& ir, const Image& vis_rgb, const NetworkParams& p,
                 const NetworkConfig& cfg);

// Accumulates d(loss)/d(theta) into `grads` given d(loss)/d(fused raster).
void fuse_backward(const NetCache& cache, const NetworkParams& p, const NetworkConfig& cfg,
                   const Image& dfused, NetworkParams& grads);

}  // namespace gfuse
