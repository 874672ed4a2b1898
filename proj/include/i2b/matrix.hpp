#pragma once
// Minimal dense/sparse linear algebra used by the model core. Row-major
// doubles throughout; all loops are deterministic (fixed summation order).

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace i2b {

struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
    double* row(int r) { return a.data() + static_cast<size_t>(r) * cols; }
    const double* row(int r) const { return a.data() + static_cast<size_t>(r) * cols; }
    void fill(double v) { std::fill(a.begin(), a.end(), v); }
};

// Compressed sparse row, square or rectangular.
struct SparseCsr {
    int rows = 0;
    int cols = 0;
    std::vector<int> row_ptr;  // size rows+1
    std::vector<int> col_idx;
    std::vector<double> vals;

    int nnz() const { return static_cast<int>(col_idx.size()); }
};

// Per-row sparse storage for feature matrices: (column, value) pairs
// sorted by column within each row.
struct SparseRows {
    int cols = 0;
    std::vector<std::vector<std::pair<int, double>>> rows;

    int row_count() const { return static_cast<int>(rows.size()); }
    size_t nnz() const {
        size_t n = 0;
        for (const auto& r : rows) n += r.size();
        return n;
    }
};

// C = A * B
inline void matmul(const Matrix& A, const Matrix& B, Matrix& C) {
    if (A.cols != B.rows) throw std::invalid_argument("matmul: shape mismatch");
    C = Matrix(A.rows, B.cols);
    const int n = A.rows, k = A.cols, m = B.cols;
    for (int i = 0; i < n; ++i) {
        const double* arow = A.row(i);
        double* crow = C.row(i);
        for (int p = 0; p < k; ++p) {
            const double av = arow[p];
            if (av == 0.0) continue;
            const double* brow = B.row(p);
            for (int j = 0; j < m; ++j) crow[j] += av * brow[j];
        }
    }
}

// C = A^T * B  (A is n x r, B is n x m, C is r x m)
inline void matmul_at_b(const Matrix& A, const Matrix& B, Matrix& C) {
    if (A.rows != B.rows) throw std::invalid_argument("matmul_at_b: shape mismatch");
    C = Matrix(A.cols, B.cols);
    const int n = A.rows, r = A.cols, m = B.cols;
    for (int i = 0; i < n; ++i) {
        const double* arow = A.row(i);
        const double* brow = B.row(i);
        for (int p = 0; p < r; ++p) {
            const double av = arow[p];
            if (av == 0.0) continue;
            double* crow = C.row(p);
            for (int j = 0; j < m; ++j) crow[j] += av * brow[j];
        }
    }
}

// C = A * B^T  (A is n x k, B is m x k, C is n x m)
inline void matmul_a_bt(const Matrix& A, const Matrix& B, Matrix& C) {
    if (A.cols != B.cols) throw std::invalid_argument("matmul_a_bt: shape mismatch");
    C = Matrix(A.rows, B.rows);
    const int n = A.rows, k = A.cols, m = B.rows;
    for (int i = 0; i < n; ++i) {
        const double* arow = A.row(i);
        double* crow = C.row(i);
        for (int j = 0; j < m; ++j) {
            const double* brow = B.row(j);
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] = acc;
        }
    }
}

// C = S * B for CSR S.
inline void spmm(const SparseCsr& S, const Matrix& B, Matrix& C) {
    if (S.cols != B.rows) throw std::invalid_argument("spmm: shape mismatch");
    C = Matrix(S.rows, B.cols);
    const int m = B.cols;
    for (int i = 0; i < S.rows; ++i) {
        double* crow = C.row(i);
        for (int p = S.row_ptr[i]; p < S.row_ptr[i + 1]; ++p) {
            const double sv = S.vals[p];
            const double* brow = B.row(S.col_idx[p]);
            for (int j = 0; j < m; ++j) crow[j] += sv * brow[j];
        }
    }
}

// C = X * W for per-row sparse X.
inline void sparse_rows_mm(const SparseRows& X, const Matrix& W, Matrix& C) {
    if (X.cols != W.rows) throw std::invalid_argument("sparse_rows_mm: shape mismatch");
    C = Matrix(X.row_count(), W.cols);
    const int m = W.cols;
    for (int i = 0; i < X.row_count(); ++i) {
        double* crow = C.row(i);
        for (const auto& [col, val] : X.rows[i]) {
            const double* wrow = W.row(col);
            for (int j = 0; j < m; ++j) crow[j] += val * wrow[j];
        }
    }
}

// C += X^T * G for per-row sparse X (C is X.cols x G.cols).
inline void sparse_rows_tmm_accum(const SparseRows& X, const Matrix& G, Matrix& C) {
    if (X.row_count() != G.rows) throw std::invalid_argument("sparse_rows_tmm: shape mismatch");
    const int m = G.cols;
    for (int i = 0; i < X.row_count(); ++i) {
        const double* grow = G.row(i);
        for (const auto& [col, val] : X.rows[i]) {
            double* crow = C.row(col);
            for (int j = 0; j < m; ++j) crow[j] += val * grow[j];
        }
    }
}

}  // namespace i2b
