#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include "json.hpp"

#include "gfuse/config.hpp"
#include "gfuse/dataset.hpp"
#include "gfuse/image_io.hpp"
#include "oracles.hpp"

using namespace gfuse;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& tag) {
    auto p = fs::temp_directory_path() / ("gfuse_cli_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string gfuse_bin() {
    const char* bin = std::getenv("GFUSE_BIN");
    REQUIRE(bin != nullptr);
    return bin;
}

int run(const std::string& args) {
    const std::string cmd = gfuse_bin() + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

void write_pair_dirs(const fs::path& root, int pairs, int h, int w) {
    fs::create_directories(root / "ir");
    fs::create_directories(root / "vis");
    for (int i = 0; i < pairs; ++i) {
        const std::string name = "scene" + std::to_string(i) + ".png";
        save_image(oracle::structured_image(h, w, 600 + i), (root / "ir" / name).string());
        save_image(oracle::structured_image(h, w, 700 + i), (root / "vis" / name).string());
    }
}

}  // namespace

TEST_CASE("config parsing, precedence building blocks, and errors") {
    KeyValues kv = parse_config_text("lr0 = 5e-4\n# comment\nbatch=2\n\npatch_size = 8\n");
    CHECK(kv.at("lr0") == "5e-4");
    CHECK(kv.at("batch") == "2");

    NetworkConfig net;
    TrainConfig cfg;
    apply_config(kv, net, cfg);
    CHECK(cfg.lr0 == 5e-4);
    CHECK(cfg.batch == 2);
    CHECK(net.patch_size == 8);
    CHECK(net.feature_dim == 16);  // untouched default

    CHECK_THROWS_AS(parse_config_text("novalue\n"), DataError);
    CHECK_THROWS_AS(apply_config(parse_config_text("bogus_key = 1\n"), net, cfg), DataError);
    CHECK_THROWS_AS(apply_config(parse_config_text("batch = maybe\n"), net, cfg), DataError);
}

TEST_CASE("pair listing detects orphans and reads manifests") {
    auto root = fresh_dir("pairs");
    write_pair_dirs(root, 2, 20, 20);
    auto pairs = list_pair_root(root.string());
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].name == "scene0");

    save_image(oracle::structured_image(20, 20, 9), (root / "ir" / "extra.png").string());
    CHECK_THROWS_WITH_AS(static_cast<void>(list_pair_root(root.string())),
                         doctest::Contains("extra.png"), DataError);
    fs::remove(root / "ir" / "extra.png");

    const auto tsv = root / "listing.tsv";
    {
        std::ofstream f(tsv);
        f << "a\t" << (root / "ir" / "scene0.png").string() << "\t"
          << (root / "vis" / "scene0.png").string() << "\n";
    }
    auto manifest_pairs = resolve_pair_listing(tsv.string());
    REQUIRE(manifest_pairs.size() == 1);
    CHECK(manifest_pairs[0].name == "a");

    std::ofstream(tsv) << "malformed line without tabs\n";
    CHECK_THROWS_AS(read_pair_manifest(tsv.string()), DataError);
}

TEST_CASE("usage errors exit with code 2") {
    CHECK(run("") == 2);
    CHECK(run("bogus-subcommand") == 2);
    CHECK(run("prepare --ir-dir only") == 2);
}

TEST_CASE("prepare crops with deterministic names and a manifest") {
    auto src = fresh_dir("prep_src");
    write_pair_dirs(src, 1, 44, 24);  // 2x1 windows of size 24 at stride 20
    auto out = fresh_dir("prep_out");

    const int rc = run("prepare --ir-dir " + (src / "ir").string() + " --vis-dir " +
                       (src / "vis").string() + " --out " + out.string() +
                       " --size 24 --stride 20");
    REQUIRE(rc == 0);
    CHECK(fs::exists(out / "ir" / "pair_0000_0000_0000.png"));
    CHECK(fs::exists(out / "ir" / "pair_0000_0020_0000.png"));
    CHECK(fs::exists(out / "vis" / "pair_0000_0020_0000.png"));

    json m = json::parse(std::ifstream(out / "manifest.json"));
    CHECK(m["command"] == "prepare");
    CHECK(m["crops"] == 2);
    CHECK(m["outputs"]["files"].size() == 4);
    CHECK(m["outputs"]["combined_sha256"].get<std::string>().size() == 64);

    // unpaired source files are a data error (exit 3)
    save_image(oracle::structured_image(44, 24, 5), (src / "ir" / "orphan.png").string());
    CHECK(run("prepare --ir-dir " + (src / "ir").string() + " --vis-dir " +
              (src / "vis").string() + " --out " + out.string()) == 3);
}

TEST_CASE("train/fuse/eval round trip with ablation flags in the manifest") {
    auto src = fresh_dir("cli_src");
    write_pair_dirs(src, 2, 24, 24);
    auto crops = fresh_dir("cli_crops");
    REQUIRE(run("prepare --ir-dir " + (src / "ir").string() + " --vis-dir " +
                (src / "vis").string() + " --out " + crops.string() +
                " --size 24 --stride 24") == 0);

    auto cfg_file = fresh_dir("cli_cfg") / "small.cfg";
    std::ofstream(cfg_file) << "feature_dim = 4\nintra_blocks = 1\ninter_blocks = 1\n"
                            << "ffn_ratio = 2\nepochs = 2\nbatch = 2\nseed = 5\n";

    auto train_out = fresh_dir("cli_train");
    REQUIRE(run("train --data " + crops.string() + " --config " + cfg_file.string() +
                " --out " + train_out.string() + " --fixed-k 3 --no-dilation") == 0);
    CHECK(fs::exists(train_out / "checkpoint.gfck"));
    CHECK(fs::exists(train_out / "history.csv"));

    json m = json::parse(std::ifstream(train_out / "manifest.json"));
    CHECK(m["config"]["fixed_k"] == 3);           // flag beats file and default
    CHECK(m["config"]["no_dilation"] == true);
    CHECK(m["config"]["feature_dim"] == 4);        // file beats default
    CHECK(m["config"]["epochs"] == 2);
    for (const auto& kd : m["schedule"]["intra"]) {
        CHECK(kd[0] == 3);
        CHECK(kd[1] == 1);
    }

    auto fuse_out = fresh_dir("cli_fuse");
    REQUIRE(run("fuse --ckpt " + (train_out / "checkpoint.gfck").string() + " --ir " +
                (src / "ir").string() + " --vis " + (src / "vis").string() + " --out " +
                fuse_out.string()) == 0);
    CHECK(fs::exists(fuse_out / "fused" / "scene0.png"));
    CHECK(fs::exists(fuse_out / "fused" / "scene1.png"));

    // gray in, gray out
    Image fused = load_image((fuse_out / "fused" / "scene0.png").string());
    CHECK(fused.channels == 1);
    CHECK(fused.height == 24);

    auto eval_out = fresh_dir("cli_eval");
    REQUIRE(run("eval --fused-dir " + (fuse_out / "fused").string() + " --ir-dir " +
                (src / "ir").string() + " --vis-dir " + (src / "vis").string() + " --out " +
                eval_out.string()) == 0);
    std::ifstream rep(eval_out / "report.csv");
    std::string header;
    std::getline(rep, header);
    CHECK(header == "pair,ssim,psnr,cc,nabf");
    int rows = 0;
    std::string line;
    while (std::getline(rep, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 3);  // two pairs + summary

    // eval with an empty fused dir errors out instead of writing a report
    auto empty = fresh_dir("cli_empty");
    CHECK(run("eval --fused-dir " + empty.string() + " --ir-dir " + (src / "ir").string() +
              " --vis-dir " + (src / "vis").string() + " --out " + eval_out.string()) == 3);
}

TEST_CASE("RGB visible input produces an RGB fused image with source chroma") {
    auto src = fresh_dir("cli_rgb");
    fs::create_directories(src / "ir");
    fs::create_directories(src / "vis");
    save_image(oracle::structured_image(24, 24, 800), (src / "ir" / "s.png").string());
    Image vis(24, 24, 3);
    Image base = oracle::structured_image(24, 24, 801);
    for (int r = 0; r < 24; ++r)
        for (int c = 0; c < 24; ++c) {
            vis.at(r, c, 0) = base.at(r, c);
            vis.at(r, c, 1) = std::clamp(base.at(r, c) * 0.8 + 0.1, 0.0, 1.0);
            vis.at(r, c, 2) = std::clamp(1.0 - base.at(r, c) * 0.6, 0.0, 1.0);
        }
    save_image(vis, (src / "vis" / "s.png").string());

    auto cfg_file = src / "net.cfg";
    std::ofstream(cfg_file) << "feature_dim = 4\nintra_blocks = 1\ninter_blocks = 1\n"
                            << "ffn_ratio = 2\nepochs = 1\nbatch = 1\n";
    auto train_out = fresh_dir("cli_rgb_train");
    REQUIRE(run("train --data " + src.string() + " --config " + cfg_file.string() + " --out " +
                train_out.string()) == 0);

    auto fuse_out = fresh_dir("cli_rgb_fuse");
    REQUIRE(run("fuse --ckpt " + (train_out / "checkpoint.gfck").string() + " --ir " +
                (src / "ir" / "s.png").string() + " --vis " + (src / "vis" / "s.png").string() +
                " --out " + fuse_out.string()) == 0);
    Image fused = load_image((fuse_out / "fused" / "s.png").string());
    CHECK(fused.channels == 3);
}

TEST_CASE("same checkpoint and inputs reproduce byte-identical fused output") {
    auto src = fresh_dir("cli_det");
    write_pair_dirs(src, 1, 24, 24);
    auto cfg_file = src / "net.cfg";
    std::ofstream(cfg_file) << "feature_dim = 4\nintra_blocks = 1\ninter_blocks = 1\n"
                            << "ffn_ratio = 2\nepochs = 1\nbatch = 1\nseed = 9\n";
    auto train_out = fresh_dir("cli_det_train");
    REQUIRE(run("train --data " + src.string() + " --config " + cfg_file.string() + " --out " +
                train_out.string()) == 0);

    auto out1 = fresh_dir("cli_det_f1");
    auto out2 = fresh_dir("cli_det_f2");
    for (const auto& out : {out1, out2})
        REQUIRE(run("fuse --ckpt " + (train_out / "checkpoint.gfck").string() + " --ir " +
                    (src / "ir").string() + " --vis " + (src / "vis").string() + " --out " +
                    out.string()) == 0);
    std::ifstream a(out1 / "fused" / "scene0.png", std::ios::binary);
    std::ifstream b(out2 / "fused" / "scene0.png", std::ios::binary);
    std::string ba((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string bb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(ba == bb);
    CHECK_FALSE(ba.empty());
}
