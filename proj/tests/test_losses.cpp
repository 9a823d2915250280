#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "gfuse/losses.hpp"
#include "oracles.hpp"

using namespace gfuse;

TEST_CASE("loss_ir") {
    Rng rng(2);
    Image x = oracle::random_image(rng, 4, 4);
    CHECK(loss_ir(x, x) == 0.0);

    Image f(1, 1, 1, 0.5), i0(1, 1, 1, 0.0);
    CHECK(loss_ir(f, i0) == doctest::Approx(0.25).epsilon(1e-15));

    Image a = oracle::random_image(rng, 4, 4);
    Image b = oracle::random_image(rng, 4, 4);
    double expect = 0.0;
    for (size_t i = 0; i < a.size(); ++i) expect += (a.data[i] - b.data[i]) * (a.data[i] - b.data[i]);
    expect /= 16.0;
    CHECK(loss_ir(a, b) == doctest::Approx(expect).epsilon(1e-14));

    CHECK_THROWS_AS(loss_ir(a, Image(3, 4, 1)), ShapeError);
}

TEST_CASE("loss_vi") {
    Rng rng(4);
    Image x = oracle::random_image(rng, 5, 5);
    CHECK(loss_vi(x, x) == 0.0);

    // constant images: the gradient term vanishes, only the offset survives
    Image f(3, 3, 1, 0.8), v(3, 3, 1, 0.5);
    CHECK(loss_vi(f, v) == doctest::Approx(0.09).epsilon(1e-12));

    // step-edge pair vs a literal intensity + Sobel sum
    Image step(4, 4, 1), flat(4, 4, 1, 0.5);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) step.at(r, c) = c < 2 ? 0.0 : 1.0;
    Image gs = sobel_gradient(step);
    Image gf = sobel_gradient(flat);
    double expect = 0.0;
    for (size_t i = 0; i < step.size(); ++i) {
        expect += (step.data[i] - flat.data[i]) * (step.data[i] - flat.data[i]);
        expect += (gs.data[i] - gf.data[i]) * (gs.data[i] - gf.data[i]);
    }
    expect /= 16.0;
    CHECK(loss_vi(step, flat) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("total_loss arithmetic and identities") {
    Rng rng(6);
    Image x = oracle::random_image(rng, 6, 6);
    LossBreakdown zero = total_loss(x, x, x, 1.5);
    CHECK(zero.l_ir == 0.0);
    CHECK(zero.l_vi == 0.0);
    CHECK(zero.total == 0.0);

    // 1x1 images with l_ir = 0.2, l_vi = 0.1: total = 0.2 + 1.5*0.1 = 0.35
    Image fused(1, 1, 1, 0.5);
    Image ir(1, 1, 1, 0.5 - std::sqrt(0.2));
    Image vis(1, 1, 1, 0.5 - std::sqrt(0.1));
    LossBreakdown lb = total_loss(fused, ir, vis, 1.5);
    CHECK(lb.l_ir == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(lb.l_vi == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(lb.total == doctest::Approx(0.35).epsilon(1e-12));

    // exact additivity in working precision
    Image a = oracle::random_image(rng, 5, 7);
    Image b = oracle::random_image(rng, 5, 7);
    Image c = oracle::random_image(rng, 5, 7);
    LossBreakdown any = total_loss(a, b, c, 1.5);
    CHECK(any.total == any.l_ir + any.lambda * any.l_vi);
    CHECK(any.l_ir >= 0.0);
    CHECK(any.l_vi >= 0.0);

    // lambda scaling identity
    LossBreakdown l2 = total_loss(a, b, c, 2.25);
    CHECK(std::abs((l2.total - any.total) - (2.25 - 1.5) * any.l_vi) < 1e-12);
}

TEST_CASE("total_loss gradient matches finite differences") {
    Rng rng(8);
    Image fused = oracle::random_image(rng, 4, 4);
    Image ir = oracle::random_image(rng, 4, 4);
    Image vis = oracle::random_image(rng, 4, 4);
    Image g = total_loss_grad(fused, ir, vis, 1.5);

    const double h = 1e-5;
    for (size_t i = 0; i < fused.size(); ++i) {
        const double keep = fused.data[i];
        fused.data[i] = keep + h;
        const double up = total_loss(fused, ir, vis, 1.5).total;
        fused.data[i] = keep - h;
        const double down = total_loss(fused, ir, vis, 1.5).total;
        fused.data[i] = keep;
        const double fd = (up - down) / (2.0 * h);
        CHECK(oracle::rel_err(g.data[i], fd, 1e-6) < 1e-6);
    }
}
