// gfuse: graph-based infrared/visible image fusion pipeline.
// Subcommands: prepare (crop training pairs), train, fuse, eval.

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "gfuse/checkpoint.hpp"
#include "gfuse/config.hpp"
#include "gfuse/dataset.hpp"
#include "gfuse/fusion_net.hpp"
#include "gfuse/image_io.hpp"
#include "gfuse/metrics.hpp"
#include "gfuse/sha256.hpp"
#include "gfuse/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

json config_json(const gfuse::NetworkConfig& net, const gfuse::TrainConfig& train) {
    json j;
    j["patch_size"] = net.patch_size;
    j["feature_dim"] = net.feature_dim;
    j["intra_blocks"] = net.intra_blocks;
    j["inter_blocks"] = net.inter_blocks;
    j["ffn_ratio"] = net.ffn_ratio;
    j["ffn_residual"] = net.ffn_residual;
    j["identity_init"] = net.identity_init;
    j["fixed_k"] = net.fixed_k;
    j["no_dilation"] = net.no_dilation;
    j["no_inter_modal"] = net.no_inter_modal;
    j["lr0"] = train.lr0;
    j["decay"] = train.decay;
    j["batch"] = train.batch;
    j["epochs"] = train.epochs;
    j["max_steps"] = train.max_steps;
    j["lambda"] = train.lambda;
    j["seed"] = train.seed;
    j["beta1"] = train.adam.beta1;
    j["beta2"] = train.adam.beta2;
    j["eps"] = train.adam.eps;
    j["crop_size"] = train.crop_size;
    j["crop_stride"] = train.crop_stride;
    j["grad_clip"] = train.grad_clip;
    j["clip_norm"] = train.clip_norm;
    return j;
}

json schedule_json(const gfuse::KdSchedule& s) {
    json arr = json::array();
    for (auto [k, d] : s.layers) arr.push_back(json::array({k, d}));
    return arr;
}

// git-style content identity: per-file hashes plus one hash over the sorted
// "path:hash" listing.
json outputs_json(const fs::path& root, const std::vector<std::string>& rel_files) {
    json files = json::object();
    std::string listing;
    for (const auto& rel : rel_files) {
        const std::string h = gfuse::sha256_file_hex((root / rel).string());
        files[rel] = h;
        listing += rel + ":" + h + "\n";
    }
    json j;
    j["files"] = files;
    j["combined_sha256"] = gfuse::sha256_hex(listing);
    return j;
}

void write_manifest(const fs::path& out_root, const json& m) {
    std::ofstream f(out_root / "manifest.json", std::ios::trunc);
    if (!f) throw gfuse::DataError("cannot write manifest under " + out_root.string());
    f << m.dump(2) << "\n";
}

std::string crop_name(int pair_idx, int y, int x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "pair_%04d_%04d_%04d.png", pair_idx, y, x);
    return buf;
}

struct TrainFlags {
    std::string data, config_file, out;
    int fixed_k = -1;
    bool no_dilation = false, no_inter_modal = false, identity_init = false;
    int epochs = -1, max_steps = -1, batch = -1, patch_size = -1, feature_dim = -1;
    double lr0 = -1.0, decay = -1.0, lambda = -1.0;
    long long seed = -1;
};

int run_prepare(const std::string& ir_dir, const std::string& vis_dir, const std::string& out,
                int size, int stride) {
    auto listing = gfuse::list_pair_dirs(ir_dir, vis_dir);
    fs::create_directories(fs::path(out) / "ir");
    fs::create_directories(fs::path(out) / "vis");

    std::vector<std::string> rel_files;
    int pair_idx = 0;
    for (const auto& p : listing) {
        gfuse::Image ir = gfuse::load_image(p.ir);
        gfuse::Image vis = gfuse::load_image(p.vis);
        if (ir.height != vis.height || ir.width != vis.width)
            throw gfuse::DataError("prepare: pair '" + p.name + "' is not aligned");
        if (size > std::min(ir.height, ir.width))
            throw gfuse::SizeError("prepare: crop size exceeds pair '" + p.name + "'");
        for (int y = 0; y + size <= ir.height; y += stride) {
            for (int x = 0; x + size <= ir.width; x += stride) {
                const std::string name = crop_name(pair_idx, y, x);
                gfuse::save_image(gfuse::crop_window(ir, y, x, size),
                                  (fs::path(out) / "ir" / name).string());
                gfuse::save_image(gfuse::crop_window(vis, y, x, size),
                                  (fs::path(out) / "vis" / name).string());
                rel_files.push_back("ir/" + name);
                rel_files.push_back("vis/" + name);
            }
        }
        ++pair_idx;
    }

    json m;
    m["command"] = "prepare";
    m["inputs"] = {{"ir_dir", ir_dir}, {"vis_dir", vis_dir}, {"pairs", pair_idx}};
    m["size"] = size;
    m["stride"] = stride;
    m["crops"] = rel_files.size() / 2;
    m["outputs"] = outputs_json(out, rel_files);
    write_manifest(out, m);
    std::printf("prepare: %zu crop pairs from %d source pairs -> %s\n", rel_files.size() / 2,
                pair_idx, out.c_str());
    return 0;
}

int run_train(const TrainFlags& f) {
    gfuse::NetworkConfig net;
    gfuse::TrainConfig cfg;
    if (!f.config_file.empty())
        gfuse::apply_config(gfuse::load_config_file(f.config_file), net, cfg);
    // flags override the file, the file overrides defaults
    if (f.fixed_k >= 0) net.fixed_k = f.fixed_k;
    if (f.no_dilation) net.no_dilation = true;
    if (f.no_inter_modal) net.no_inter_modal = true;
    if (f.identity_init) net.identity_init = true;
    if (f.epochs >= 0) cfg.epochs = f.epochs;
    if (f.max_steps >= 0) cfg.max_steps = f.max_steps;
    if (f.batch >= 0) cfg.batch = f.batch;
    if (f.patch_size >= 0) net.patch_size = f.patch_size;
    if (f.feature_dim >= 0) net.feature_dim = f.feature_dim;
    if (f.lr0 >= 0.0) cfg.lr0 = f.lr0;
    if (f.decay >= 0.0) cfg.decay = f.decay;
    if (f.lambda >= 0.0) cfg.lambda = f.lambda;
    if (f.seed >= 0) cfg.seed = static_cast<uint64_t>(f.seed);
    net.validate();
    cfg.validate();

    auto listing = gfuse::resolve_pair_listing(f.data);
    auto pairs = gfuse::load_training_pairs(listing);

    fs::create_directories(f.out);
    const std::string ckpt = (fs::path(f.out) / "checkpoint.gfck").string();
    gfuse::TrainResult result = gfuse::train(pairs, net, cfg, ckpt);
    gfuse::save_checkpoint(ckpt, net, result.params, &result.opt, cfg.seed, result.next_epoch);
    gfuse::write_history_csv(result.history, (fs::path(f.out) / "history.csv").string());

    json m;
    m["command"] = "train";
    m["seed"] = cfg.seed;
    m["inputs"] = {{"data", f.data}, {"pairs", pairs.size()}};
    m["config"] = config_json(net, cfg);
    m["schedule"] = {{"intra", schedule_json(net.intra_schedule())},
                     {"inter", net.no_inter_modal ? json::array()
                                                  : schedule_json(net.inter_schedule())}};
    m["checkpoint"] = ckpt;
    m["steps"] = result.history.size();
    if (!result.history.empty()) {
        m["initial_total_loss"] = result.history.front().loss.total;
        m["final_total_loss"] = result.history.back().loss.total;
    }
    m["outputs"] = outputs_json(f.out, {"checkpoint.gfck", "history.csv"});
    write_manifest(f.out, m);
    if (!result.history.empty())
        std::printf("train: %zu steps, total loss %.6g -> %.6g\n", result.history.size(),
                    result.history.front().loss.total, result.history.back().loss.total);
    return 0;
}

int run_fuse(const std::string& ckpt_path, const std::string& ir_path,
             const std::string& vis_path, const std::string& out) {
    gfuse::Checkpoint ck = gfuse::load_checkpoint(ckpt_path);
    fs::create_directories(fs::path(out) / "fused");

    std::vector<gfuse::PairPath> listing;
    if (fs::is_directory(ir_path) != fs::is_directory(vis_path))
        throw gfuse::DataError("fuse: --ir and --vis must both be files or both directories");
    if (fs::is_directory(ir_path)) {
        listing = gfuse::list_pair_dirs(ir_path, vis_path);
    } else {
        listing.push_back({fs::path(ir_path).stem().string(), ir_path, vis_path});
    }

    std::vector<std::string> rel_files;
    for (const auto& p : listing) {
        gfuse::Image ir = gfuse::load_image(p.ir);
        gfuse::Image vis = gfuse::load_image(p.vis);
        gfuse::Image fused = vis.channels == 3
                                 ? gfuse::fuse_color(ir, vis, ck.params, ck.config)
                                 : gfuse::fuse(gfuse::luminance(ir), vis, ck.params, ck.config);
        const std::string rel = "fused/" + p.name + ".png";
        gfuse::save_image(fused, (fs::path(out) / rel).string());
        rel_files.push_back(rel);
    }

    json m;
    m["command"] = "fuse";
    m["seed"] = ck.seed;
    m["inputs"] = {{"ir", ir_path}, {"vis", vis_path}, {"pairs", listing.size()}};
    m["checkpoint"] = ckpt_path;
    m["outputs"] = outputs_json(out, rel_files);
    write_manifest(out, m);
    std::printf("fuse: %zu image(s) -> %s/fused\n", listing.size(), out.c_str());
    return 0;
}

int run_eval(const std::string& fused_dir, const std::string& ir_dir,
             const std::string& vis_dir, const std::string& out) {
    auto pairs = gfuse::list_pair_dirs(ir_dir, vis_dir);   // raises on orphans
    std::vector<gfuse::EvalTriple> triples;
    std::string missing;
    for (const auto& p : pairs) {
        const fs::path base = fs::path(p.ir).filename();
        const fs::path fused_path = fs::path(fused_dir) / base;
        fs::path actual = fused_path;
        if (!fs::exists(actual)) {
            // fused outputs are always written as .png
            actual = fs::path(fused_dir) / (fs::path(base).stem().string() + ".png");
        }
        if (!fs::exists(actual)) {
            missing += " " + base.string();
            continue;
        }
        triples.push_back({p.name, gfuse::load_image(actual.string()),
                           gfuse::load_image(p.ir), gfuse::load_image(p.vis)});
    }
    if (!missing.empty()) throw gfuse::DataError("eval: missing fused images:" + missing);
    if (triples.empty()) throw gfuse::DataError("eval: no triples found");

    gfuse::MetricReport rep = gfuse::evaluate_corpus(triples);
    fs::create_directories(out);
    gfuse::write_report_csv(rep, (fs::path(out) / "report.csv").string());

    json m;
    m["command"] = "eval";
    m["inputs"] = {{"fused_dir", fused_dir}, {"ir_dir", ir_dir}, {"vis_dir", vis_dir},
                   {"pairs", triples.size()}};
    m["cc_flagged"] = rep.cc_flagged;
    m["summary"] = {{"ssim", {rep.ssim.mean, rep.ssim.stddev}},
                    {"psnr", {rep.psnr.mean, rep.psnr.stddev}},
                    {"cc", {rep.cc.mean, rep.cc.stddev}},
                    {"nabf", {rep.nabf.mean, rep.nabf.stddev}}};
    m["outputs"] = outputs_json(out, {"report.csv"});
    write_manifest(out, m);
    std::printf("eval: %zu pairs -> %s/report.csv\n", triples.size(), out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"graph-based infrared/visible image fusion"};
    app.require_subcommand(1);

    // prepare
    auto* prep = app.add_subcommand("prepare", "crop aligned pairs into training patches");
    std::string prep_ir, prep_vis, prep_out;
    int prep_size = 64, prep_stride = 20;
    prep->add_option("--ir-dir", prep_ir, "directory of infrared images")->required();
    prep->add_option("--vis-dir", prep_vis, "directory of visible images")->required();
    prep->add_option("--out", prep_out, "output root")->required();
    prep->add_option("--size", prep_size, "crop size (default 64)");
    prep->add_option("--stride", prep_stride, "crop stride (default 20)");

    // train
    auto* tr = app.add_subcommand("train", "train a fusion network on prepared crops");
    TrainFlags tf;
    tr->add_option("--data", tf.data, "crop root (ir/, vis/) or .tsv listing")->required();
    tr->add_option("--config", tf.config_file, "key=value config file");
    tr->add_option("--out", tf.out, "output root")->required();
    tr->add_option("--fixed-k", tf.fixed_k, "pin every block's k (ablation)");
    tr->add_flag("--no-dilation", tf.no_dilation, "pin every block's dilation to 1 (ablation)");
    tr->add_flag("--no-inter-modal", tf.no_inter_modal, "drop the cross-modal stack (ablation)");
    tr->add_flag("--identity-init", tf.identity_init, "zero-init fc_out/ffn2 branches");
    tr->add_option("--epochs", tf.epochs, "training epochs");
    tr->add_option("--max-steps", tf.max_steps, "stop after this many optimizer steps");
    tr->add_option("--batch", tf.batch, "batch size");
    tr->add_option("--patch-size", tf.patch_size, "patch size in pixels");
    tr->add_option("--feature-dim", tf.feature_dim, "vertex feature dimension");
    tr->add_option("--lr0", tf.lr0, "initial learning rate");
    tr->add_option("--decay", tf.decay, "per-epoch lr decay factor");
    tr->add_option("--lambda", tf.lambda, "visible-loss weight");
    tr->add_option("--seed", tf.seed, "RNG seed");

    // fuse
    auto* fu = app.add_subcommand("fuse", "fuse pairs with a trained checkpoint");
    std::string fu_ckpt, fu_ir, fu_vis, fu_out;
    fu->add_option("--ckpt", fu_ckpt, "checkpoint file")->required();
    fu->add_option("--ir", fu_ir, "infrared image or directory")->required();
    fu->add_option("--vis", fu_vis, "visible image or directory")->required();
    fu->add_option("--out", fu_out, "output root")->required();

    // eval
    auto* ev = app.add_subcommand("eval", "score fused results against their sources");
    std::string ev_fused, ev_ir, ev_vis, ev_out;
    ev->add_option("--fused-dir", ev_fused, "directory of fused images")->required();
    ev->add_option("--ir-dir", ev_ir, "directory of infrared sources")->required();
    ev->add_option("--vis-dir", ev_vis, "directory of visible sources")->required();
    ev->add_option("--out", ev_out, "output root for report.csv")->required();

    try {
        app.parse(argc, argv);
        if (prep->parsed()) return run_prepare(prep_ir, prep_vis, prep_out, prep_size, prep_stride);
        if (tr->parsed()) return run_train(tf);
        if (fu->parsed()) return run_fuse(fu_ckpt, fu_ir, fu_vis, fu_out);
        if (ev->parsed()) return run_eval(ev_fused, ev_ir, ev_vis, ev_out);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    } catch (const gfuse::NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return kExitNumeric;
    } catch (const gfuse::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
    return 0;
}
