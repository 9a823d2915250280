#include "gfuse/losses.hpp"

namespace gfuse {

namespace {

void require_pair(const Image& a, const Image& b, const char* what) {
    if (!a.same_shape(b) || a.channels != 1)
        throw ShapeError(std::string(what) + ": need aligned single-channel images");
}

double mean_sq_diff_sum(const Image& a, const Image& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        s += d * d;
    }
    return s;
}

}  // namespace

double loss_ir(const Image& fused, const Image& ir) {
    require_pair(fused, ir, "loss_ir");
    return mean_sq_diff_sum(fused, ir) / (static_cast<double>(fused.height) * fused.width);
}

double loss_vi(const Image& fused, const Image& vis) {
    require_pair(fused, vis, "loss_vi");
    const double hw = static_cast<double>(fused.height) * fused.width;
    const double intensity = mean_sq_diff_sum(fused, vis);
    const double grad = mean_sq_diff_sum(sobel_gradient(fused), sobel_gradient(vis));
    return (intensity + grad) / hw;
}

LossBreakdown total_loss(const Image& fused, const Image& ir, const Image& vis, double lambda) {
    LossBreakdown out;
    out.l_ir = loss_ir(fused, ir);
    out.l_vi = loss_vi(fused, vis);
    out.lambda = lambda;
    out.total = out.l_ir + lambda * out.l_vi;
    return out;
}

Image total_loss_grad(const Image& fused, const Image& ir, const Image& vis, double lambda) {
    require_pair(fused, ir, "total_loss_grad");
    require_pair(fused, vis, "total_loss_grad");
    const double inv_hw = 1.0 / (static_cast<double>(fused.height) * fused.width);

    Image g(fused.height, fused.width, 1);
    for (size_t i = 0; i < g.size(); ++i)
        g.data[i] = inv_hw * (2.0 * (fused.data[i] - ir.data[i]) +
                              lambda * 2.0 * (fused.data[i] - vis.data[i]));

    // gradient-discrepancy term: 2*(grad(F)-grad(V)) routed back through Sobel
    Image gf = sobel_gradient(fused);
    Image gv = sobel_gradient(vis);
    Image up(fused.height, fused.width, 1);
    for (size_t i = 0; i < up.size(); ++i)
        up.data[i] = lambda * inv_hw * 2.0 * (gf.data[i] - gv.data[i]);
    Image gsob = sobel_gradient_backward(fused, up);
    for (size_t i = 0; i < g.size(); ++i) g.data[i] += gsob.data[i];
    return g;
}

}  // namespace gfuse
