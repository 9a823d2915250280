#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "gfuse/image.hpp"
#include "gfuse/image_io.hpp"
#include "oracles.hpp"

using namespace gfuse;
namespace fs = std::filesystem;

namespace {
fs::path temp_dir() {
    auto p = fs::temp_directory_path() / "gfuse_imgio_test";
    fs::create_directories(p);
    return p;
}
}  // namespace

TEST_CASE("load_image scales 8-bit gray to [0,1]") {
    Image src(2, 2, 1);
    src.at(0, 0) = 0.0;
    src.at(0, 1) = 1.0;
    src.at(1, 0) = 128.0 / 255.0;
    src.at(1, 1) = 64.0 / 255.0;
    const auto path = (temp_dir() / "gray2x2.png").string();
    save_image(src, path);

    Image img = load_image(path);
    REQUIRE(img.height == 2);
    REQUIRE(img.width == 2);
    REQUIRE(img.channels == 1);
    CHECK(img.at(0, 0) == doctest::Approx(0.0));
    CHECK(img.at(0, 1) == doctest::Approx(1.0));
    CHECK(img.at(1, 0) == doctest::Approx(0.50196).epsilon(1e-4));
    CHECK(img.at(1, 1) == doctest::Approx(0.25098).epsilon(1e-4));
}

TEST_CASE("load_image handles RGB and rejects garbage") {
    Image white(1, 1, 3, 1.0);
    const auto path = (temp_dir() / "white.png").string();
    save_image(white, path);
    Image img = load_image(path);
    CHECK(img.channels == 3);
    for (double v : img.data) CHECK(v == doctest::Approx(1.0));

    const auto bad = (temp_dir() / "truncated.png").string();
    std::ofstream(bad, std::ios::binary) << "\x89PNG\r\nnot really";
    CHECK_THROWS_AS(load_image(bad), FormatError);
    CHECK_THROWS_AS(load_image((temp_dir() / "missing.png").string()), FormatError);
}

TEST_CASE("save/load round-trip at 8-bit resolution") {
    Rng rng(7);
    Image src = oracle::random_image(rng, 9, 13, 3);
    const auto path = (temp_dir() / "rt.png").string();
    save_image(src, path);
    Image back = load_image(path);
    REQUIRE(back.same_shape(src));
    for (size_t i = 0; i < src.size(); ++i)
        CHECK(std::abs(back.data[i] - src.data[i]) <= 0.5 / 255.0 + 1e-12);
}

TEST_CASE("rgb_to_ycbcr on neutral colors") {
    Image gray(2, 2, 3);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            for (int ch = 0; ch < 3; ++ch) gray.at(r, c, ch) = 0.37;
    YcbcrImage ycc = rgb_to_ycbcr(gray);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            CHECK(ycc.y.at(r, c) == doctest::Approx(0.37).epsilon(1e-12));
            CHECK(ycc.cb.at(r, c) == doctest::Approx(0.5).epsilon(1e-12));
            CHECK(ycc.cr.at(r, c) == doctest::Approx(0.5).epsilon(1e-12));
        }

    Image white(1, 1, 3, 1.0);
    YcbcrImage w = rgb_to_ycbcr(white);
    CHECK(w.y.at(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(w.cb.at(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(w.cr.at(0, 0) == doctest::Approx(0.5).epsilon(1e-12));

    Image single(1, 1, 1);
    CHECK_THROWS_AS(rgb_to_ycbcr(single), ShapeError);
}

TEST_CASE("ycbcr round-trip within 1e-6") {
    Rng rng(11);
    Image rgb = oracle::random_image(rng, 6, 5, 3);
    Image back = ycbcr_to_rgb(rgb_to_ycbcr(rgb));
    for (size_t i = 0; i < rgb.size(); ++i)
        CHECK(std::abs(back.data[i] - rgb.data[i]) < 1e-6);
}

TEST_CASE("ycbcr_to_rgb clamps out-of-gamut combinations") {
    Image y(1, 1, 1, 1.0), cb(1, 1, 1, 1.0), cr(1, 1, 1, 1.0);
    Image rgb = ycbcr_to_rgb(y, cb, cr);
    CHECK(rgb.in_unit_range());

    Image neutral = ycbcr_to_rgb(Image(2, 2, 1, 0.5), Image(2, 2, 1, 0.5), Image(2, 2, 1, 0.5));
    for (double v : neutral.data) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));

    Image wrong(2, 3, 1, 0.5);
    CHECK_THROWS_AS(ycbcr_to_rgb(Image(2, 2, 1), wrong, Image(2, 2, 1)), ShapeError);
}

TEST_CASE("crop_pairs window counts") {
    Image a(64, 64, 1, 0.1), b(64, 64, 1, 0.2);
    CHECK(crop_pairs(a, b, 64, 20).size() == 1);

    Image c(104, 64, 1, 0.1), d(104, 64, 1, 0.2);
    CHECK(crop_pairs(c, d, 64, 20).size() == 3);  // floor((104-64)/20)+1 = 3

    CHECK_THROWS_AS(crop_pairs(a, b, 65, 20), SizeError);
    CHECK_THROWS_AS(crop_pairs(a, c, 16, 20), ShapeError);

    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const int h = 30 + static_cast<int>(rng.below(100));
        const int w = 30 + static_cast<int>(rng.below(100));
        const int size = 8 + static_cast<int>(rng.below(20));
        const int stride = 1 + static_cast<int>(rng.below(15));
        Image ir(h, w, 1, 0.3), vis(h, w, 1, 0.4);
        const auto crops = crop_pairs(ir, vis, size, stride);
        CHECK(static_cast<int>(crops.size()) ==
              crop_count(h, size, stride) * crop_count(w, size, stride));
    }
}

TEST_CASE("patchify layouts") {
    Rng rng(5);
    Image img = oracle::random_image(rng, 4, 4);

    VertexFeatures one = patchify(img, 4);
    REQUIRE(one.rows() == 1);
    REQUIRE(one.cols() == 16);
    for (int i = 0; i < 16; ++i) CHECK(one(0, i) == img.data[i]);

    VertexFeatures four = patchify(img, 2);
    REQUIRE(four.rows() == 4);
    REQUIRE(four.cols() == 4);
    // row 0 is the top-left 2x2 block in raster order
    CHECK(four(0, 0) == img.at(0, 0));
    CHECK(four(0, 1) == img.at(0, 1));
    CHECK(four(0, 2) == img.at(1, 0));
    CHECK(four(0, 3) == img.at(1, 1));
    // index-arithmetic oracle over every block
    for (int v = 0; v < 4; ++v)
        for (int p = 0; p < 4; ++p)
            CHECK(four(v, p) == img.at((v / 2) * 2 + p / 2, (v % 2) * 2 + p % 2));
}

TEST_CASE("patchify pads by edge replication") {
    Rng rng(6);
    Image img = oracle::random_image(rng, 5, 4);
    VertexFeatures vf = patchify(img, 2);  // padded to 6x4
    REQUIRE(vf.rows() == 6);
    REQUIRE(vf.cols() == 4);
    auto clamped = [&](int r, int c) {
        return img.at(std::min(r, 4), std::min(c, 3));
    };
    for (int v = 0; v < 6; ++v)
        for (int p = 0; p < 4; ++p)
            CHECK(vf(v, p) == clamped((v / 2) * 2 + p / 2, (v % 2) * 2 + p % 2));
}

TEST_CASE("unpatchify inverts patchify exactly") {
    Rng rng(8);
    for (auto [h, w, p] : std::vector<std::tuple<int, int, int>>{
             {6, 6, 3}, {5, 4, 2}, {8, 8, 1}, {7, 9, 4}}) {
        Image img = oracle::random_image(rng, h, w);
        Image back = unpatchify(patchify(img, p), h, w, p);
        REQUIRE(back.same_shape(img));
        for (size_t i = 0; i < img.size(); ++i) CHECK(back.data[i] == img.data[i]);
    }

    Image zero = unpatchify(VertexFeatures(4, 4), 4, 4, 2);
    for (double v : zero.data) CHECK(v == 0.0);

    CHECK_THROWS_AS(unpatchify(VertexFeatures(3, 4), 4, 4, 2), ShapeError);
}

TEST_CASE("sobel gradient basics") {
    Image flat(6, 7, 1, 0.42);
    Image g = sobel_gradient(flat);
    for (double v : g.data) CHECK(v == 0.0);

    // vertical step 0|1: |Gx| = 4*step on both columns adjacent to the edge
    Image step(4, 4, 1);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) step.at(r, c) = c < 2 ? 0.0 : 1.0;
    Image gs = sobel_gradient(step);
    for (int r = 0; r < 4; ++r) {
        CHECK(gs.at(r, 0) == doctest::Approx(0.0));
        CHECK(gs.at(r, 1) == doctest::Approx(4.0));
        CHECK(gs.at(r, 2) == doctest::Approx(4.0));
        CHECK(gs.at(r, 3) == doctest::Approx(0.0));
    }
}

TEST_CASE("sobel matches direct convolution on an impulse") {
    Image img(5, 5, 1);
    img.at(2, 2) = 1.0;
    const int kx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
    const int ky[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
    Image expect(5, 5, 1);
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 5; ++c) {
            double gx = 0.0, gy = 0.0;
            for (int u = -1; u <= 1; ++u)
                for (int v = -1; v <= 1; ++v) {
                    const int rr = std::clamp(r + u, 0, 4), cc = std::clamp(c + v, 0, 4);
                    gx += kx[u + 1][v + 1] * img.at(rr, cc);
                    gy += ky[u + 1][v + 1] * img.at(rr, cc);
                }
            expect.at(r, c) = std::abs(gx) + std::abs(gy);
        }
    Image got = sobel_gradient(img);
    for (size_t i = 0; i < got.size(); ++i) CHECK(got.data[i] == doctest::Approx(expect.data[i]));
}

TEST_CASE("sobel_gradient_backward agrees with finite differences") {
    Rng rng(13);
    Image img = oracle::random_image(rng, 6, 6);
    Image upstream = oracle::random_image(rng, 6, 6);
    Image analytic = sobel_gradient_backward(img, upstream);

    auto value = [&]() {
        Image g = sobel_gradient(img);
        double s = 0.0;
        for (size_t i = 0; i < g.size(); ++i) s += upstream.data[i] * g.data[i];
        return s;
    };
    const double h = 1e-6;
    for (size_t i = 0; i < img.size(); ++i) {
        const double keep = img.data[i];
        img.data[i] = keep + h;
        const double up = value();
        img.data[i] = keep - h;
        const double down = value();
        img.data[i] = keep;
        const double fd = (up - down) / (2.0 * h);
        CHECK(oracle::rel_err(analytic.data[i], fd, 1e-6) < 1e-5);
    }
}
