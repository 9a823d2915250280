#pragma once

#include <cmath>
#include <initializer_list>
#include <vector>

#include "gfuse/error.hpp"

namespace gfuse {

// Dense row-major matrix of doubles: vertex features, layer parameters,
// gradients. Kept deliberately small; everything the layers need and no more.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {
        if (rows < 0 || cols < 0) throw ShapeError("matrix dimensions must be non-negative");
    }

    static Matrix from(int rows, int cols, std::initializer_list<double> v) {
        Matrix m(rows, cols);
        if (v.size() != m.data_.size()) throw ShapeError("initializer size mismatch");
        size_t i = 0;
        for (double x : v) m.data_[i++] = x;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double* row(int r) { return data_.data() + static_cast<size_t>(r) * cols_; }
    const double* row(int r) const { return data_.data() + static_cast<size_t>(r) * cols_; }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    bool all_finite() const {
        for (double x : data_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

private:
    int rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

// Feature rows of graph vertices: N x D, row i holds vertex i.
using VertexFeatures = Matrix;

inline void check_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (!a.same_shape(b)) throw ShapeError(std::string(what) + ": shape mismatch");
}

// c = a(m,k) * b(k,n)
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = ai[k];
            if (aik == 0.0) continue;
            const double* bk = b.row(k);
            for (int j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

// c = a^T(m,k)^T * b -> (a.cols, b.cols); a and b share the row count
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw ShapeError("matmul_tn: row counts differ");
    Matrix c(a.cols(), b.cols());
    for (int r = 0; r < a.rows(); ++r) {
        const double* ar = a.row(r);
        const double* br = b.row(r);
        for (int i = 0; i < a.cols(); ++i) {
            const double v = ar[i];
            if (v == 0.0) continue;
            double* ci = c.row(i);
            for (int j = 0; j < b.cols(); ++j) ci[j] += v * br[j];
        }
    }
    return c;
}

// c = a * b^T -> (a.rows, b.rows); a and b share the column count
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw ShapeError("matmul_nt: column counts differ");
    Matrix c(a.rows(), b.rows());
    for (int i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (int j = 0; j < b.rows(); ++j) {
            const double* bj = b.row(j);
            double s = 0.0;
            for (int k = 0; k < a.cols(); ++k) s += ai[k] * bj[k];
            ci[j] = s;
        }
    }
    return c;
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

inline void add_inplace(Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "add");
    for (size_t i = 0; i < a.size(); ++i) a.data()[i] += b.data()[i];
}

// y += alpha * x
inline void axpy(Matrix& y, double alpha, const Matrix& x) {
    check_same_shape(y, x, "axpy");
    for (size_t i = 0; i < y.size(); ++i) y.data()[i] += alpha * x.data()[i];
}

inline void scale_inplace(Matrix& a, double s) {
    for (size_t i = 0; i < a.size(); ++i) a.data()[i] *= s;
}

inline Matrix hconcat(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw ShapeError("hconcat: row counts differ");
    Matrix c(a.rows(), a.cols() + b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        double* ci = c.row(i);
        const double* ai = a.row(i);
        const double* bi = b.row(i);
        for (int j = 0; j < a.cols(); ++j) ci[j] = ai[j];
        for (int j = 0; j < b.cols(); ++j) ci[a.cols() + j] = bi[j];
    }
    return c;
}

// columns [c0, c1)
inline Matrix col_slice(const Matrix& a, int c0, int c1) {
    if (c0 < 0 || c1 > a.cols() || c0 > c1) throw ShapeError("col_slice: bad range");
    Matrix c(a.rows(), c1 - c0);
    for (int i = 0; i < a.rows(); ++i)
        for (int j = c0; j < c1; ++j) c(i, j - c0) = a(i, j);
    return c;
}

// 1 x cols vector of column sums
inline Matrix col_sum(const Matrix& a) {
    Matrix s(1, a.cols());
    for (int i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i);
        for (int j = 0; j < a.cols(); ++j) s(0, j) += ai[j];
    }
    return s;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

}  // namespace gfuse
