#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gfuse/fusion_net.hpp"
#include "gfuse/losses.hpp"

namespace gfuse {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct TrainConfig {
    double lr0 = 1e-4;
    double decay = 0.95;   // multiplicative per epoch
    int batch = 4;
    int epochs = 5;
    int max_steps = 0;     // 0 = run all epochs
    double lambda = 1.5;
    uint64_t seed = 1;
    AdamConfig adam;
    int crop_size = 64;
    int crop_stride = 20;
    bool grad_clip = false;
    double clip_norm = 5.0;

    void validate() const;
};

// First/second moment accumulators, laid out in for_each_param order.
struct OptimizerState {
    int64_t t = 0;
    std::vector<Matrix> m, v;
};

OptimizerState make_optimizer_state(const NetworkParams& p);

// Standard bias-corrected Adam on a single tensor; t is the post-increment
// step count (>= 1).
void adam_update_tensor(Matrix& theta, const Matrix& g, Matrix& m, Matrix& v,
                        int64_t t, const AdamConfig& cfg, double lr);

// One optimizer step over every parameter tensor. Rejects non-finite
// gradients before touching any parameter.
void adam_step(NetworkParams& params, const NetworkParams& grads, OptimizerState& state,
               const AdamConfig& cfg, double lr);

double lr_at(int epoch, const TrainConfig& cfg);

struct StepRecord {
    int64_t step = 0;
    int epoch = 0;
    double lr = 0.0;
    LossBreakdown loss;
};

using ImagePair = std::pair<Image, Image>;  // (ir, vis), single-channel

struct TrainResult {
    NetworkParams params;
    OptimizerState opt;
    std::vector<StepRecord> history;
    int next_epoch = 0;
};

// Seeded mini-batch loop: shuffle, fuse forward, loss, backward, Adam.
// Batch loss is the mean over items. checkpoint_path, when non-empty, gets a
// rolling checkpoint after every epoch (written atomically).
TrainResult train(const std::vector<ImagePair>& pairs, const NetworkConfig& net_cfg,
                  const TrainConfig& cfg, const std::string& checkpoint_path = "");

// Continues from a loaded state; replays the exact trajectory of an unbroken
// run because shuffle streams are derived from (seed, epoch).
TrainResult train_continue(const std::vector<ImagePair>& pairs, const NetworkConfig& net_cfg,
                           const TrainConfig& cfg, NetworkParams params, OptimizerState opt,
                           int start_epoch, const std::string& checkpoint_path = "");

void write_history_csv(const std::vector<StepRecord>& history, const std::string& path);

}  // namespace gfuse
