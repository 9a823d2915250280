#pragma once

#include <cstdint>
#include <vector>

#include "gfuse/matrix.hpp"

namespace gfuse {

// Directed neighbor lists: edge e_ji feeds vertex i from each j in row i.
// Rows are sorted by ascending distance, ties broken by ascending index;
// self-edges never appear.
struct EdgeSet {
    int n = 0;
    int k_effective = 0;
    std::vector<int32_t> neighbors;  // n * k_effective, row-major

    int32_t neighbor(int i, int j) const { return neighbors[static_cast<size_t>(i) * k_effective + j]; }
    const int32_t* row(int i) const { return neighbors.data() + static_cast<size_t>(i) * k_effective; }
};

// Per-block (k, d) pairs for one branch.
struct KdSchedule {
    std::vector<std::pair<int, int>> layers;

    // Monotone ramp: k from 3 to 8, d from 1 to 3 across `blocks` layers.
    // fixed_k > 0 pins every k; no_dilation pins every d to 1.
    static KdSchedule ramp(int blocks, int fixed_k = 0, bool no_dilation = false);

    void validate() const;  // k non-decreasing in [3,8], d in [1,3]
};

// Symmetric N x N matrix of squared Euclidean distances between feature rows.
Matrix pairwise_sq_dist(const VertexFeatures& x);

// Dilated KNN: rank all j != i by (squared distance, index), take the first
// k*d candidates and keep every d-th (ranks 0, d, ..., (k-1)*d). When fewer
// than k*d candidates exist the selection falls back to the plain top
// min(k, n-1).
EdgeSet dilated_knn(const VertexFeatures& x, int k, int d);

}  // namespace gfuse
