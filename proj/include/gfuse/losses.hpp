#pragma once

#include "gfuse/image.hpp"

namespace gfuse {

struct LossBreakdown {
    double l_ir = 0.0;
    double l_vi = 0.0;
    double lambda = 1.5;
    double total = 0.0;
};

// (1/HW) * ||fused - ir||_F^2
double loss_ir(const Image& fused, const Image& ir);

// (1/HW) * (||fused - vis||_F^2 + ||grad(fused) - grad(vis)||_F^2),
// gradient taken as the Sobel |Gx|+|Gy| magnitude.
double loss_vi(const Image& fused, const Image& vis);

LossBreakdown total_loss(const Image& fused, const Image& ir, const Image& vis,
                         double lambda = 1.5);

// d(total)/d(fused), for backpropagation into the network.
Image total_loss_grad(const Image& fused, const Image& ir, const Image& vis, double lambda);

}  // namespace gfuse
