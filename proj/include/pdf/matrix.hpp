// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

namespace pdf {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {}

    static Matrix identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return data_.empty(); }
    size_t size() const { return data_.size(); }

    double& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix sub(const Matrix& a, const Matrix& b);
Vector matvec(const Matrix& a, const Vector& x);
Vector matvec_transposed(const Matrix& a, const Vector& x);  // a^T x

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& a);
double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);

/// Checks the coordinate-wise bound |a(u,v) - a(v,u)| <= tol * max(1, |a(u,v)|).
bool is_symmetric(const Matrix& a, double tol = 1e-12);

/// Symmetric square operator. Construction validates the symmetry bound.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(Matrix m);  // throws std::invalid_argument if not symmetric

    int n() const { return mat_.rows(); }
    const Matrix& mat() const { return mat_; }
    double operator()(int i, int j) const { return mat_(i, j); }

private:
    Matrix mat_;
};

}  // namespace pdf
