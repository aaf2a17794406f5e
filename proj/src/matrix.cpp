// SPDX-License-Identifier: Apache-2.0
#include "pdf/matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace pdf {

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: dimension mismatch");
    Matrix c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("sub: dimension mismatch");
    Matrix c = a;
    for (size_t i = 0; i < c.size(); ++i) c.data()[i] -= b.data()[i];
    return c;
}

Vector matvec(const Matrix& a, const Vector& x) {
    if (a.cols() != static_cast<int>(x.size()))
        throw std::invalid_argument("matvec: dimension mismatch");
    Vector y(a.rows(), 0.0);
    for (int i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (int j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

Vector matvec_transposed(const Matrix& a, const Vector& x) {
    if (a.rows() != static_cast<int>(x.size()))
        throw std::invalid_argument("matvec_transposed: dimension mismatch");
    Vector y(a.cols(), 0.0);
    for (int i = 0; i < a.rows(); ++i) {
        const double xi = x[i];
        for (int j = 0; j < a.cols(); ++j) y[j] += a(i, j) * xi;
    }
    return y;
}

double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a.data()[i] * a.data()[i];
    return std::sqrt(s);
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a.data()[i]));
    return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("max_abs_diff: dimension mismatch");
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
    return m;
}

bool is_symmetric(const Matrix& a, double tol) {
    if (a.rows() != a.cols()) return false;
    for (int u = 0; u < a.rows(); ++u)
        for (int v = u + 1; v < a.cols(); ++v)
            if (std::fabs(a(u, v) - a(v, u)) > tol * std::max(1.0, std::fabs(a(u, v))))
                return false;
    return true;
}

SymMatrix::SymMatrix(Matrix m) : mat_(std::move(m)) {
    if (!is_symmetric(mat_)) throw std::invalid_argument("SymMatrix: input is not symmetric");
}

}  // namespace pdf
