#pragma once

#include <cstddef>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "psfg/errors.hpp"

namespace psfg {

// Row-major binary32 matrix. All products below accumulate sequentially over
// the inner index with a scalar binary32 accumulator; no blocking or fusion
// that would change rounding. This ordering is part of the reproducibility
// contract: two processes running the same op sequence produce bit-identical
// results on one platform.
class Matrix {
public:
    Matrix() : rows_(0), cols_(0) {}

    Matrix(std::size_t rows, std::size_t cols, float fill = 0.0f)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from(std::size_t rows, std::size_t cols, std::vector<float> values) {
        if (values.size() != rows * cols) {
            throw ShapeError("Matrix::from: " + std::to_string(values.size()) +
                             " values for " + std::to_string(rows) + "x" + std::to_string(cols));
        }
        Matrix m;
        m.rows_ = rows;
        m.cols_ = cols;
        m.data_ = std::move(values);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    float& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    float at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<float> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const float> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<float>& data() { return data_; }
    const std::vector<float>& data() const { return data_; }

    bool bit_equal(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ &&
               (data_.empty() ||
                std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(float)) == 0);
    }

private:
    std::size_t rows_, cols_;
    std::vector<float> data_;
};

inline void check_same_shape(const Matrix& a, const Matrix& b, const char* where) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError(std::string(where) + ": shape mismatch " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    }
}

// C = A * B, A: n x k, B: k x m. Loop order (i, p, j): each C[i][j] receives
// its k addends in ascending p order.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dims " + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()));
    }
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t p = 0; p < a.cols(); ++p) {
            const float av = a.at(i, p);
            float* crow = c.data().data() + i * c.cols();
            const float* brow = b.data().data() + p * b.cols();
            for (std::size_t j = 0; j < b.cols(); ++j) {
                crow[j] += av * brow[j];
            }
        }
    }
    return c;
}

// C = A^T * B, A: n x k, B: n x m, C: k x m. Accumulates over rows of A in
// ascending order per output element.
inline Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw ShapeError("matmul_at_b: row counts " + std::to_string(a.rows()) + " vs " +
                         std::to_string(b.rows()));
    }
    Matrix c(a.cols(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t p = 0; p < a.cols(); ++p) {
            const float av = a.at(i, p);
            float* crow = c.data().data() + p * c.cols();
            const float* brow = b.data().data() + i * b.cols();
            for (std::size_t j = 0; j < b.cols(); ++j) {
                crow[j] += av * brow[j];
            }
        }
    }
    return c;
}

// C = A * B^T, A: n x k, B: m x k, C: n x m.
inline Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw ShapeError("matmul_a_bt: col counts " + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.cols()));
    }
    Matrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.rows(); ++j) {
            float acc = 0.0f;
            const float* arow = a.data().data() + i * a.cols();
            const float* brow = b.data().data() + j * b.cols();
            for (std::size_t p = 0; p < a.cols(); ++p) {
                acc += arow[p] * brow[p];
            }
            c.at(i, j) = acc;
        }
    }
    return c;
}

// [A | B] column-wise concatenation.
inline Matrix hconcat(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw ShapeError("hconcat: row counts " + std::to_string(a.rows()) + " vs " +
                         std::to_string(b.rows()));
    }
    Matrix c(a.rows(), a.cols() + b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) c.at(i, j) = a.at(i, j);
        for (std::size_t j = 0; j < b.cols(); ++j) c.at(i, a.cols() + j) = b.at(i, j);
    }
    return c;
}

// First `count` columns of m.
inline Matrix take_cols(const Matrix& m, std::size_t count) {
    if (count > m.cols()) {
        throw ShapeError("take_cols: " + std::to_string(count) + " of " + std::to_string(m.cols()));
    }
    Matrix c(m.rows(), count);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < count; ++j) c.at(i, j) = m.at(i, j);
    }
    return c;
}

} // namespace psfg
