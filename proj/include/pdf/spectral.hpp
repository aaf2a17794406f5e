// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "pdf/graph.hpp"
#include "pdf/matrix.hpp"

namespace pdf {

/// Orthonormal eigenbasis (columns of u) with ascending spectrum. The sign of
/// each column is fixed so its largest-magnitude entry (lowest row index on
/// ties) is nonnegative, making repeated decompositions bit-identical.
struct SpectralDecomposition {
    Matrix u;
    Vector lambda;

    int n() const { return u.rows(); }
};

struct ConvergenceError : std::runtime_error {
    double residual;
    ConvergenceError(const std::string& msg, double r) : std::runtime_error(msg), residual(r) {}
};

struct DegenerateSignalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Cyclic Jacobi rotations; off-diagonal threshold 1e-12 * max(1, |S|_max),
/// capped at 100 sweeps. Throws ConvergenceError with the residual otherwise.
SpectralDecomposition eigendecompose(const SymMatrix& s);

/// f_hat = U^T f.
Vector gft(const SpectralDecomposition& dec, const Vector& f);
/// f = U f_hat.
Vector inverse_gft(const SpectralDecomposition& dec, const Vector& f_hat);

/// (1/2) sum_{i,j} W_ij (f(i) - f(j))^2, evaluated over the edge list only —
/// the Laplacian never gets formed, so this stays an independent oracle for
/// smoothness_spectral.
double smoothness_quadratic(const Graph& g, const Vector& f);

/// sum_i f_hat_i^2 lambda_i for dec of the graph Laplacian.
double smoothness_spectral(const SpectralDecomposition& dec, const Vector& f);

struct PolyFilter {
    std::vector<double> coeffs;  // g(x) = sum_j coeffs[j] x^j

    double eval(double x) const;
    void validate() const;  // nonempty
};

/// U diag(g(lambda)) U^T f.
Vector poly_filter_apply(const PolyFilter& p, const SpectralDecomposition& dec, const Vector& f);

enum class FilterClass { Smooths, Amplifies, Indeterminate };

/// Smooths iff |g(lambda_i)| < 1 for all i, Amplifies iff |g(lambda_i)| > 1 for
/// all i (strict; |g| = 1 anywhere falls to Indeterminate).
FilterClass classify_filter(const PolyFilter& p, const Vector& lambda);
std::string to_string(FilterClass c);

/// Closed-form cosine between S f and eigenvector column i, for
/// S = U g(Lambda) U^T:  (U_i^T f) g(lambda_i) / sqrt(sum_j (U_j^T f)^2 g(lambda_j)^2).
/// Throws DegenerateSignalError when S f vanishes.
double cos_to_eigvec(const SymMatrix& s, const SpectralDecomposition& dec, const PolyFilter& p,
                     const Vector& f, int i);

}  // namespace pdf
