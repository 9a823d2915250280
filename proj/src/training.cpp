#include "gfuse/training.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "gfuse/checkpoint.hpp"
#include "gfuse/rng.hpp"

namespace gfuse {

void TrainConfig::validate() const {
    if (lr0 <= 0.0) throw NumericError("train config: lr0 must be > 0");
    if (decay <= 0.0 || decay > 1.0) throw NumericError("train config: decay must be in (0,1]");
    if (batch < 1) throw NumericError("train config: batch must be >= 1");
    if (epochs < 0 || max_steps < 0) throw NumericError("train config: negative run length");
    if (crop_size < 1 || crop_stride < 1) throw SizeError("train config: bad crop geometry");
}

namespace {

std::vector<Matrix*> tensor_refs(NetworkParams& p) {
    std::vector<Matrix*> out;
    for_each_param(p, [&](const std::string&, Matrix& m) { out.push_back(&m); });
    return out;
}

std::vector<const Matrix*> tensor_refs(const NetworkParams& p) {
    std::vector<const Matrix*> out;
    for_each_param(p, [&](const std::string&, const Matrix& m) { out.push_back(&m); });
    return out;
}

}  // namespace

OptimizerState make_optimizer_state(const NetworkParams& p) {
    OptimizerState s;
    for_each_param(p, [&](const std::string&, const Matrix& m) {
        s.m.emplace_back(m.rows(), m.cols());
        s.v.emplace_back(m.rows(), m.cols());
    });
    return s;
}

void adam_update_tensor(Matrix& theta, const Matrix& g, Matrix& m, Matrix& v,
                        int64_t t, const AdamConfig& cfg, double lr) {
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (size_t i = 0; i < theta.size(); ++i) {
        const double gi = g.data()[i];
        m.data()[i] = cfg.beta1 * m.data()[i] + (1.0 - cfg.beta1) * gi;
        v.data()[i] = cfg.beta2 * v.data()[i] + (1.0 - cfg.beta2) * gi * gi;
        const double m_hat = m.data()[i] / bc1;
        const double v_hat = v.data()[i] / bc2;
        theta.data()[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
}

void adam_step(NetworkParams& params, const NetworkParams& grads, OptimizerState& state,
               const AdamConfig& cfg, double lr) {
    auto thetas = tensor_refs(params);
    auto gs = tensor_refs(grads);
    if (thetas.size() != gs.size() || thetas.size() != state.m.size())
        throw ShapeError("adam_step: parameter/gradient/state layouts differ");
    for (const Matrix* g : gs)
        if (!g->all_finite()) throw NumericError("adam_step: non-finite gradient");
    state.t += 1;
    for (size_t i = 0; i < thetas.size(); ++i)
        adam_update_tensor(*thetas[i], *gs[i], state.m[i], state.v[i], state.t, cfg, lr);
}

double lr_at(int epoch, const TrainConfig& cfg) {
    return cfg.lr0 * std::pow(cfg.decay, static_cast<double>(epoch));
}

namespace {

void clip_gradients(NetworkParams& grads, double clip_norm) {
    double sq = 0.0;
    for_each_param(grads, [&](const std::string&, const Matrix& m) {
        for (size_t i = 0; i < m.size(); ++i) sq += m.data()[i] * m.data()[i];
    });
    const double norm = std::sqrt(sq);
    if (norm <= clip_norm || norm == 0.0) return;
    const double s = clip_norm / norm;
    for_each_param(grads, [&](const std::string&, Matrix& m) { scale_inplace(m, s); });
}

TrainResult run_loop(const std::vector<ImagePair>& pairs, const NetworkConfig& net_cfg,
                     const TrainConfig& cfg, NetworkParams params, OptimizerState opt,
                     int start_epoch, const std::string& checkpoint_path) {
    net_cfg.validate();
    cfg.validate();
    if (pairs.empty()) throw DataError("train: empty dataset");
    for (const auto& [ir, vis] : pairs)
        if (!ir.same_shape(vis) || ir.channels != 1)
            throw ShapeError("train: pairs must be aligned single-channel crops");

    const int n = static_cast<int>(pairs.size());
    const int steps_per_epoch = (n + cfg.batch - 1) / cfg.batch;

    TrainResult res;
    res.next_epoch = start_epoch;
    res.history.reserve(static_cast<size_t>(steps_per_epoch) *
                        std::max(0, cfg.epochs - start_epoch));
    int64_t step = static_cast<int64_t>(start_epoch) * steps_per_epoch;

    std::vector<int> order(pairs.size());
    bool done = cfg.max_steps > 0 && step >= cfg.max_steps;
    for (int epoch = start_epoch; epoch < cfg.epochs && !done; ++epoch) {
        const double lr = lr_at(epoch, cfg);
        std::iota(order.begin(), order.end(), 0);
        Rng shuffle_rng(mix_seed(cfg.seed, 0x45504f43u + static_cast<uint64_t>(epoch)));
        shuffle(order, shuffle_rng);

        for (int b = 0; b < n && !done; b += cfg.batch) {
            const int count = std::min(cfg.batch, n - b);
            NetworkParams grads = make_params(net_cfg);
            double sum_ir = 0.0, sum_vi = 0.0;
            for (int j = 0; j < count; ++j) {
                const auto& [ir, vis] = pairs[order[b + j]];
                NetCache cache;
                Image fused = fuse(ir, vis, params, net_cfg, /*clamp_output=*/false, &cache);
                LossBreakdown lb = total_loss(fused, ir, vis, cfg.lambda);
                if (!std::isfinite(lb.total)) {
                    std::ostringstream oss;
                    oss << "train: non-finite loss at step " << step << " (epoch " << epoch
                        << "), batch pairs:";
                    for (int q = 0; q < count; ++q) oss << ' ' << order[b + q];
                    throw NumericError(oss.str());
                }
                Image dfused = total_loss_grad(fused, ir, vis, cfg.lambda);
                for (double& v : dfused.data) v /= count;  // batch mean
                fuse_backward(cache, params, net_cfg, dfused, grads);
                sum_ir += lb.l_ir;
                sum_vi += lb.l_vi;
            }

            if (cfg.grad_clip) clip_gradients(grads, cfg.clip_norm);
            adam_step(params, grads, opt, cfg.adam, lr);

            StepRecord rec;
            rec.step = step;
            rec.epoch = epoch;
            rec.lr = lr;
            rec.loss.l_ir = sum_ir / count;
            rec.loss.l_vi = sum_vi / count;
            rec.loss.lambda = cfg.lambda;
            rec.loss.total = rec.loss.l_ir + cfg.lambda * rec.loss.l_vi;
            res.history.push_back(rec);

            ++step;
            done = cfg.max_steps > 0 && step >= cfg.max_steps;
        }
        res.next_epoch = epoch + 1;
        if (!checkpoint_path.empty())
            save_checkpoint(checkpoint_path, net_cfg, params, &opt, cfg.seed, epoch + 1);
    }

    res.params = std::move(params);
    res.opt = std::move(opt);
    return res;
}

}  // namespace

TrainResult train(const std::vector<ImagePair>& pairs, const NetworkConfig& net_cfg,
                  const TrainConfig& cfg, const std::string& checkpoint_path) {
    NetworkParams params = init_params(net_cfg, cfg.seed);
    OptimizerState opt = make_optimizer_state(params);
    return run_loop(pairs, net_cfg, cfg, std::move(params), std::move(opt), 0, checkpoint_path);
}

TrainResult train_continue(const std::vector<ImagePair>& pairs, const NetworkConfig& net_cfg,
                           const TrainConfig& cfg, NetworkParams params, OptimizerState opt,
                           int start_epoch, const std::string& checkpoint_path) {
    return run_loop(pairs, net_cfg, cfg, std::move(params), std::move(opt), start_epoch,
                    checkpoint_path);
}

void write_history_csv(const std::vector<StepRecord>& history, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw FormatError("history: cannot open " + path);
    std::fputs("step,epoch,lr,l_ir,l_vi,total\n", f);
    for (const auto& r : history)
        std::fprintf(f, "%" PRId64 ",%d,%.12g,%.12g,%.12g,%.12g\n", r.step, r.epoch, r.lr,
                     r.loss.l_ir, r.loss.l_vi, r.loss.total);
    std::fclose(f);
}

}  // namespace gfuse
