// SPDX-License-Identifier: Apache-2.0
#include "pdf/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pdf {

namespace {

double max_offdiag(const Matrix& a) {
    double m = 0.0;
    for (int p = 0; p < a.rows(); ++p)
        for (int q = p + 1; q < a.cols(); ++q) m = std::max(m, std::fabs(a(p, q)));
    return m;
}

}  // namespace

SpectralDecomposition eigendecompose(const SymMatrix& s) {
    const int n = s.n();
    Matrix a = s.mat();
    Matrix v = Matrix::identity(n);
    const double scale = std::max(1.0, max_abs(a));
    const double thresh = 1e-12 * scale;
    const int max_sweeps = 100;

    bool converged = false;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        if (max_offdiag(a) <= thresh) {
            converged = true;
            break;
        }
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::fabs(apq) <= thresh) continue;
                const double app = a(p, p);
                const double aqq = a(q, q);
                const double tau = (aqq - app) / (2.0 * apq);
                // tangent of the rotation angle, smaller root for stability
                double t;
                if (tau >= 0.0)
                    t = 1.0 / (tau + std::sqrt(1.0 + tau * tau));
                else
                    t = -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = t * c;

                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (int k = 0; k < n; ++k) {
                    if (k != p && k != q) {
                        const double akp = a(k, p);
                        const double akq = a(k, q);
                        a(k, p) = c * akp - sn * akq;
                        a(p, k) = a(k, p);
                        a(k, q) = sn * akp + c * akq;
                        a(q, k) = a(k, q);
                    }
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
        }
    }
    if (!converged && max_offdiag(a) > thresh) {
        double res = max_offdiag(a);
        throw ConvergenceError("eigendecompose: no convergence after 100 sweeps, off-diagonal residual " +
                                   std::to_string(res),
                               res);
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return a(i, i) < a(j, j); });

    SpectralDecomposition dec;
    dec.lambda.resize(n);
    dec.u = Matrix(n, n);
    for (int col = 0; col < n; ++col) {
        const int src = order[col];
        dec.lambda[col] = a(src, src);
        int arg = 0;
        double best = std::fabs(v(0, src));
        for (int k = 1; k < n; ++k) {
            double mag = std::fabs(v(k, src));
            if (mag > best) {  // strict keeps the lowest row index on ties
                best = mag;
                arg = k;
            }
        }
        const double sign = v(arg, src) < 0.0 ? -1.0 : 1.0;
        for (int k = 0; k < n; ++k) dec.u(k, col) = sign * v(k, src);
    }
    return dec;
}

Vector gft(const SpectralDecomposition& dec, const Vector& f) {
    return matvec_transposed(dec.u, f);
}

Vector inverse_gft(const SpectralDecomposition& dec, const Vector& f_hat) {
    return matvec(dec.u, f_hat);
}

double smoothness_quadratic(const Graph& g, const Vector& f) {
    if (static_cast<int>(f.size()) != g.n)
        throw std::invalid_argument("smoothness_quadratic: signal length != n");
    double s = 0.0;
    for (const Edge& e : g.edges) {
        const double d = f[e.u] - f[e.v];
        s += e.w * d * d;  // each undirected edge once == (1/2) * double sum
    }
    return s;
}

double smoothness_spectral(const SpectralDecomposition& dec, const Vector& f) {
    Vector f_hat = gft(dec, f);
    double s = 0.0;
    for (int i = 0; i < dec.n(); ++i) s += f_hat[i] * f_hat[i] * dec.lambda[i];
    return s;
}

double PolyFilter::eval(double x) const {
    double y = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) y = y * x + *it;
    return y;
}

void PolyFilter::validate() const {
    if (coeffs.empty()) throw std::invalid_argument("PolyFilter: empty coefficient list");
}

Vector poly_filter_apply(const PolyFilter& p, const SpectralDecomposition& dec, const Vector& f) {
    p.validate();
    Vector f_hat = gft(dec, f);
    for (int i = 0; i < dec.n(); ++i) f_hat[i] *= p.eval(dec.lambda[i]);
    return inverse_gft(dec, f_hat);
}

FilterClass classify_filter(const PolyFilter& p, const Vector& lambda) {
    p.validate();
    bool all_below = true, all_above = true;
    for (double l : lambda) {
        const double g = std::fabs(p.eval(l));
        all_below = all_below && g < 1.0;
        all_above = all_above && g > 1.0;
    }
    if (all_below) return FilterClass::Smooths;
    if (all_above) return FilterClass::Amplifies;
    return FilterClass::Indeterminate;
}

std::string to_string(FilterClass c) {
    switch (c) {
        case FilterClass::Smooths: return "Smooths";
        case FilterClass::Amplifies: return "Amplifies";
        case FilterClass::Indeterminate: return "Indeterminate";
    }
    return "?";
}

double cos_to_eigvec(const SymMatrix& s, const SpectralDecomposition& dec, const PolyFilter& p,
                     const Vector& f, int i) {
    p.validate();
    if (s.n() != dec.n() || static_cast<int>(f.size()) != dec.n())
        throw std::invalid_argument("cos_to_eigvec: dimension mismatch");
    if (i < 0 || i >= dec.n()) throw std::invalid_argument("cos_to_eigvec: index out of range");
    Vector sf = matvec(s.mat(), f);
    Vector f_hat = gft(dec, f);
    double den_sq = 0.0;
    for (int j = 0; j < dec.n(); ++j) {
        const double gj = p.eval(dec.lambda[j]);
        den_sq += f_hat[j] * f_hat[j] * gj * gj;
    }
    const double den = std::sqrt(den_sq);
    if (norm2(sf) <= 1e-12 * std::max(1.0, norm2(f)) || den <= 1e-12 * std::max(1.0, norm2(f)))
        throw DegenerateSignalError("cos_to_eigvec: S f vanishes");
    return f_hat[i] * p.eval(dec.lambda[i]) / den;
}

}  // namespace pdf
