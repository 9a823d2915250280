#include "gfuse/graph_conv.hpp"

#include <cmath>

namespace gfuse {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
}  // namespace

double gelu(double t) { return t * 0.5 * std::erfc(-t * kInvSqrt2); }

double gelu_grad(double t) {
    const double phi_cdf = 0.5 * std::erfc(-t * kInvSqrt2);
    const double phi_pdf = kInvSqrt2Pi * std::exp(-0.5 * t * t);
    return phi_cdf + t * phi_pdf;
}

Matrix gelu(const Matrix& x) {
    Matrix y(x.rows(), x.cols());
    for (size_t i = 0; i < x.size(); ++i) y.data()[i] = gelu(x.data()[i]);
    return y;
}

Matrix linear_forward(const Matrix& x, const Linear& l) {
    if (x.cols() != l.w.rows()) throw ShapeError("linear: input dimension mismatch");
    Matrix y = matmul(x, l.w);
    for (int r = 0; r < y.rows(); ++r) {
        double* yr = y.row(r);
        for (int c = 0; c < y.cols(); ++c) yr[c] += l.b(0, c);
    }
    return y;
}

Matrix linear_backward(const Matrix& x, const Linear& l, const Matrix& dy, Linear& grads) {
    add_inplace(grads.w, matmul_tn(x, dy));
    add_inplace(grads.b, col_sum(dy));
    return matmul_nt(dy, l.w);
}

Matrix max_relative_aggregate(const Matrix& x, const EdgeSet& edges,
                              std::vector<int32_t>* argmax) {
    if (edges.n != x.rows()) throw ShapeError("aggregate: edge set built over different vertex count");
    if (edges.k_effective < 1) throw GraphError("aggregate: empty neighbor lists");
    const int n = x.rows(), dim = x.cols();
    Matrix out(n, dim);
    if (argmax) argmax->assign(static_cast<size_t>(n) * dim, -1);
    for (int i = 0; i < n; ++i) {
        const double* xi = x.row(i);
        double* oi = out.row(i);
        const int32_t* nb = edges.row(i);
        for (int c = 0; c < dim; ++c) {
            double best = x(nb[0], c) - xi[c];
            int32_t best_j = nb[0];
            for (int j = 1; j < edges.k_effective; ++j) {
                const double v = x(nb[j], c) - xi[c];
                if (v > best) {
                    best = v;
                    best_j = nb[j];
                }
            }
            oi[c] = best;
            if (argmax) (*argmax)[static_cast<size_t>(i) * dim + c] = best_j;
        }
    }
    return out;
}

Matrix graph_conv(const Matrix& x, const EdgeSet& edges, const GraphConvParams& p) {
    if (x.cols() != p.w_agg.rows()) throw ShapeError("graph_conv: feature dimension mismatch");
    Matrix xw = matmul(x, p.w_agg);
    Matrix h = max_relative_aggregate(xw, edges);
    Matrix u = hconcat(xw, h);
    Matrix y = matmul(u, p.w_update);
    for (int r = 0; r < y.rows(); ++r)
        for (int c = 0; c < y.cols(); ++c) y(r, c) += p.bias(0, c);
    return y;
}

Matrix dyn_gc(const Matrix& x, int k, int d, const GraphConvParams& p) {
    return graph_conv(x, dilated_knn(x, k, d), p);
}

Matrix gcb_forward(const Matrix& x, const GcbParams& p, int k, int d,
                   bool ffn_residual, GcbCache* cache) {
    GcbCache local;
    GcbCache& c = cache ? *cache : local;
    c.x = x;
    c.t1 = linear_forward(x, p.fc_in);
    c.edges = dilated_knn(c.t1, k, d);
    c.xw = matmul(c.t1, p.gconv.w_agg);
    c.h = max_relative_aggregate(c.xw, c.edges, &c.argmax);
    c.u = hconcat(c.xw, c.h);
    c.t2 = matmul(c.u, p.gconv.w_update);
    for (int r = 0; r < c.t2.rows(); ++r)
        for (int j = 0; j < c.t2.cols(); ++j) c.t2(r, j) += p.gconv.bias(0, j);
    c.t3 = linear_forward(c.t2, p.fc_out);

    c.xprime = Matrix(x.rows(), x.cols());
    for (size_t i = 0; i < x.size(); ++i)
        c.xprime.data()[i] = gelu(c.t3.data()[i]) + x.data()[i];

    c.t5 = linear_forward(c.xprime, p.ffn1);
    c.t6 = gelu(c.t5);
    Matrix y = linear_forward(c.t6, p.ffn2);
    if (ffn_residual) add_inplace(y, c.xprime);
    return y;
}

Matrix gcb_backward(const GcbCache& c, const GcbParams& p, const Matrix& upstream,
                    GcbParams& grads, bool ffn_residual) {
    if (!upstream.all_finite()) throw NumericError("gcb_backward: non-finite upstream gradient");
    check_same_shape(upstream, c.x, "gcb_backward upstream");

    // FFN
    Matrix dxprime = ffn_residual ? upstream : Matrix(c.x.rows(), c.x.cols());
    Matrix dt6 = linear_backward(c.t6, p.ffn2, upstream, grads.ffn2);
    Matrix dt5(dt6.rows(), dt6.cols());
    for (size_t i = 0; i < dt5.size(); ++i)
        dt5.data()[i] = dt6.data()[i] * gelu_grad(c.t5.data()[i]);
    add_inplace(dxprime, linear_backward(c.xprime, p.ffn1, dt5, grads.ffn1));

    // first residual: xprime = GeLU(t3) + x
    Matrix dx = dxprime;
    Matrix dt3(dxprime.rows(), dxprime.cols());
    for (size_t i = 0; i < dt3.size(); ++i)
        dt3.data()[i] = dxprime.data()[i] * gelu_grad(c.t3.data()[i]);

    Matrix dt2 = linear_backward(c.t2, p.fc_out, dt3, grads.fc_out);

    // graph conv: t2 = [xw || h] * w_update + bias
    add_inplace(grads.gconv.w_update, matmul_tn(c.u, dt2));
    add_inplace(grads.gconv.bias, col_sum(dt2));
    Matrix du = matmul_nt(dt2, p.gconv.w_update);
    const int dim = c.xw.cols();
    Matrix dxw = col_slice(du, 0, dim);
    Matrix dh = col_slice(du, dim, 2 * dim);

    // max-relative aggregate: h(i,c) = xw(j*,c) - xw(i,c)
    for (int i = 0; i < dh.rows(); ++i) {
        for (int col = 0; col < dim; ++col) {
            const double g = dh(i, col);
            if (g == 0.0) continue;
            dxw(c.argmax[static_cast<size_t>(i) * dim + col], col) += g;
            dxw(i, col) -= g;
        }
    }

    add_inplace(grads.gconv.w_agg, matmul_tn(c.t1, dxw));
    Matrix dt1 = matmul_nt(dxw, p.gconv.w_agg);

    add_inplace(dx, linear_backward(c.x, p.fc_in, dt1, grads.fc_in));
    return dx;
}

std::pair<Matrix, GcbParams> gcb_backward(const Matrix& x, const GcbParams& p, int k, int d,
                                          const Matrix& upstream, bool ffn_residual) {
    GcbCache cache;
    gcb_forward(x, p, k, d, ffn_residual, &cache);
    GcbParams grads = GcbParams::make(x.cols(), p.ffn1.w.cols() / x.cols());
    Matrix dx = gcb_backward(cache, p, upstream, grads, ffn_residual);
    return {std::move(dx), std::move(grads)};
}

void init_linear(Linear& l, Rng& rng) {
    const double bound = std::sqrt(6.0 / (l.w.rows() + l.w.cols()));
    for (size_t i = 0; i < l.w.size(); ++i) l.w.data()[i] = rng.uniform(-bound, bound);
    l.b.fill(0.0);
}

void init_gcb(GcbParams& p, Rng& rng, bool identity_init) {
    init_linear(p.fc_in, rng);
    {
        const double ba = std::sqrt(6.0 / (p.gconv.w_agg.rows() + p.gconv.w_agg.cols()));
        for (size_t i = 0; i < p.gconv.w_agg.size(); ++i)
            p.gconv.w_agg.data()[i] = rng.uniform(-ba, ba);
        const double bu = std::sqrt(6.0 / (p.gconv.w_update.rows() + p.gconv.w_update.cols()));
        for (size_t i = 0; i < p.gconv.w_update.size(); ++i)
            p.gconv.w_update.data()[i] = rng.uniform(-bu, bu);
        p.gconv.bias.fill(0.0);
    }
    init_linear(p.fc_out, rng);
    init_linear(p.ffn1, rng);
    init_linear(p.ffn2, rng);
    if (identity_init) {
        p.fc_out.w.fill(0.0);
        p.fc_out.b.fill(0.0);
        p.ffn2.w.fill(0.0);
        p.ffn2.b.fill(0.0);
    }
}

}  // namespace gfuse
