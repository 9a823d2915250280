#include "gfuse/graph.hpp"

#include <algorithm>
#include <cmath>

namespace gfuse {

KdSchedule KdSchedule::ramp(int blocks, int fixed_k, bool no_dilation) {
    if (blocks < 1) throw GraphError("schedule needs at least one block");
    KdSchedule s;
    s.layers.reserve(blocks);
    for (int i = 0; i < blocks; ++i) {
        const double t = blocks == 1 ? 0.0 : static_cast<double>(i) / (blocks - 1);
        int k = static_cast<int>(std::lround(3.0 + 5.0 * t));
        int d = static_cast<int>(std::lround(1.0 + 2.0 * t));
        if (fixed_k > 0) k = fixed_k;
        if (no_dilation) d = 1;
        s.layers.emplace_back(k, d);
    }
    return s;
}

void KdSchedule::validate() const {
    int prev_k = 0;
    for (auto [k, d] : layers) {
        if (k < 3 || k > 8) throw GraphError("schedule k out of [3,8]");
        if (d < 1 || d > 3) throw GraphError("schedule d out of [1,3]");
        if (k < prev_k) throw GraphError("schedule k must be non-decreasing");
        prev_k = k;
    }
}

namespace {

// Same summation order as the brute-force definition so that equal rows
// produce exactly equal distances (tie-break tests rely on this).
inline double sq_dist(const double* a, const double* b, int dim) {
    double s = 0.0;
    for (int c = 0; c < dim; ++c) {
        const double diff = a[c] - b[c];
        s += diff * diff;
    }
    return s;
}

}  // namespace

Matrix pairwise_sq_dist(const VertexFeatures& x) {
    if (!x.all_finite()) throw NumericError("pairwise_sq_dist: non-finite features");
    const int n = x.rows();
    Matrix d(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double v = sq_dist(x.row(i), x.row(j), x.cols());
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return d;
}

EdgeSet dilated_knn(const VertexFeatures& x, int k, int d) {
    const int n = x.rows();
    if (n < 2) throw GraphError("dilated_knn: need at least two vertices");
    if (k < 1 || d < 1) throw GraphError("dilated_knn: k and d must be >= 1");
    if (!x.all_finite()) throw NumericError("dilated_knn: non-finite features");

    const int k_eff = std::min(k, n - 1);
    const bool fallback = static_cast<long>(k) * d > n - 1;
    const int take = fallback ? k_eff : k * d;

    EdgeSet es;
    es.n = n;
    es.k_effective = k_eff;
    es.neighbors.resize(static_cast<size_t>(n) * k_eff);

    std::vector<std::pair<double, int32_t>> cand(n - 1);
    for (int i = 0; i < n; ++i) {
        int m = 0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            cand[m++] = {sq_dist(x.row(i), x.row(j), x.cols()), j};
        }
        std::nth_element(cand.begin(), cand.begin() + (take - 1), cand.end());
        std::sort(cand.begin(), cand.begin() + take);
        int32_t* out = es.neighbors.data() + static_cast<size_t>(i) * k_eff;
        if (fallback) {
            for (int r = 0; r < k_eff; ++r) out[r] = cand[r].second;
        } else {
            for (int r = 0; r < k; ++r) out[r] = cand[static_cast<size_t>(r) * d].second;
        }
    }
    return es;
}

}  // namespace gfuse
