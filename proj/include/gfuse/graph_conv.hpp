#pragma once

#include <cstdint>
#include <vector>

#include "gfuse/graph.hpp"
#include "gfuse/matrix.hpp"
#include "gfuse/rng.hpp"

namespace gfuse {

// Exact Gaussian-CDF GeLU, t * Phi(t). Kept erf-based so finite-difference
// checks see a smooth function, not a tanh fit.
double gelu(double t);
double gelu_grad(double t);
Matrix gelu(const Matrix& x);

// y = x * w + b with b broadcast across rows.
struct Linear {
    Matrix w;  // in x out
    Matrix b;  // 1 x out

    static Linear make(int in, int out) { return {Matrix(in, out), Matrix(1, out)}; }
};

Matrix linear_forward(const Matrix& x, const Linear& l);
// Returns dx; accumulates dw/db into grads.
Matrix linear_backward(const Matrix& x, const Linear& l, const Matrix& dy, Linear& grads);

struct GraphConvParams {
    Matrix w_agg;     // D_in x D_in, applied to features before aggregation
    Matrix w_update;  // 2*D_in x D_out, applied to [center || aggregate]
    Matrix bias;      // 1 x D_out

    static GraphConvParams make(int d_in, int d_out) {
        return {Matrix(d_in, d_in), Matrix(2 * d_in, d_out), Matrix(1, d_out)};
    }
};

// Row i = elementwise max over j in N(i) of (x_j - x_i). `argmax`, when
// given, records the chosen source vertex per (row, column) for backward.
Matrix max_relative_aggregate(const Matrix& x, const EdgeSet& edges,
                              std::vector<int32_t>* argmax = nullptr);

Matrix graph_conv(const Matrix& x, const EdgeSet& edges, const GraphConvParams& p);

// Rebuilds the KNN edge set from the current features, then convolves.
Matrix dyn_gc(const Matrix& x, int k, int d, const GraphConvParams& p);

// One graph convolution block:
//   x' = GeLU(fc_out(dyn_gc(fc_in(x), k, d))) + x
//   y  = ffn2(GeLU(ffn1(x'))) + x'      (residual optional via ffn_residual)
struct GcbParams {
    Linear fc_in, fc_out;
    GraphConvParams gconv;
    Linear ffn1, ffn2;

    static GcbParams make(int dim, int ffn_ratio) {
        return {Linear::make(dim, dim), Linear::make(dim, dim),
                GraphConvParams::make(dim, dim),
                Linear::make(dim, dim * ffn_ratio), Linear::make(dim * ffn_ratio, dim)};
    }
};

// Forward intermediates needed by the backward pass. The edge set is the one
// selected in the forward pass; backward treats it as constant.
struct GcbCache {
    Matrix x;                     // block input
    Matrix t1;                    // fc_in output (features the graph is built on)
    EdgeSet edges;
    Matrix xw;                    // t1 * w_agg
    Matrix h;                     // max-relative aggregate of xw
    std::vector<int32_t> argmax;  // chosen source vertex per (row, col) of h
    Matrix u;                     // [xw || h]
    Matrix t2;                    // graph conv output
    Matrix t3;                    // fc_out output (pre-activation)
    Matrix xprime;                // after first residual
    Matrix t5;                    // ffn1 output (pre-activation)
    Matrix t6;                    // GeLU(t5)
};

Matrix gcb_forward(const Matrix& x, const GcbParams& p, int k, int d,
                   bool ffn_residual = true, GcbCache* cache = nullptr);

// Returns dL/dx and accumulates parameter gradients into `grads` (which must
// be zero- or previously-accumulated GcbParams of matching shapes).
Matrix gcb_backward(const GcbCache& cache, const GcbParams& p, const Matrix& upstream,
                    GcbParams& grads, bool ffn_residual = true);

// Convenience form: runs the forward internally.
std::pair<Matrix, GcbParams> gcb_backward(const Matrix& x, const GcbParams& p, int k, int d,
                                          const Matrix& upstream, bool ffn_residual = true);

// Uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases. identity_init
// additionally zeroes fc_out and ffn2 so the block starts as the identity.
void init_linear(Linear& l, Rng& rng);
void init_gcb(GcbParams& p, Rng& rng, bool identity_init);

}  // namespace gfuse
