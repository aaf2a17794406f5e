// SPDX-License-Identifier: Apache-2.0
#include "pdf/family.hpp"

#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>
#include <utility>

namespace pdf {

void FamilySpec::validate() const {
    if (entries.empty()) throw std::invalid_argument("FamilySpec: entries must be nonempty");
    std::set<std::pair<double, int>> seen;
    for (const FamilyEntry& e : entries) {
        if (e.eps < -0.5 || e.eps > 0.0)
            throw std::invalid_argument("FamilySpec: eps must lie in [-0.5, 0]");
        if (e.k < 0) throw std::invalid_argument("FamilySpec: k must be >= 0");
        if (!seen.insert({e.eps, e.k}).second)
            throw std::invalid_argument("FamilySpec: duplicate (eps, k) entry");
    }
    if (sparsity.hop_masked && sparsity.hops < 1)
        throw std::invalid_argument("FamilySpec: hop_masked needs a positive hop count");
}

namespace {

// Copies the upper triangle onto the lower one so symmetry holds bit-exactly.
Matrix mirror_upper(Matrix m) {
    for (int u = 0; u < m.rows(); ++u)
        for (int v = u + 1; v < m.cols(); ++v) m(v, u) = m(u, v);
    return m;
}

}  // namespace

SymMatrix build_base(const Graph& g, double eps) {
    if (eps < -0.5 || eps > 0.0) throw std::invalid_argument("build_base: eps must lie in [-0.5, 0]");
    SymMatrix a = adjacency(g);
    Vector dt = degrees(a, /*add_self_loops=*/true);
    Vector dte(g.n);
    for (int u = 0; u < g.n; ++u) dte[u] = std::exp(eps * std::log(dt[u]));  // dt[u] >= 1
    Matrix base(g.n, g.n);
    for (int u = 0; u < g.n; ++u) {
        base(u, u) = dte[u] * 1.0 * dte[u];
        for (int v = u + 1; v < g.n; ++v)
            if (a(u, v) != 0.0) base(u, v) = dte[u] * a(u, v) * dte[v];
    }
    return SymMatrix(mirror_upper(std::move(base)));
}

std::vector<std::vector<int>> hop_distances(const Graph& g, int h_max) {
    if (h_max < 1) throw std::invalid_argument("hop_distances: h_max must be >= 1");
    g.validate();
    std::vector<std::vector<int>> adj_list(g.n);
    for (const Edge& e : g.edges) {
        adj_list[e.u].push_back(e.v);
        adj_list[e.v].push_back(e.u);
    }
    std::vector<std::vector<int>> dist(g.n, std::vector<int>(g.n, kUnreachable));
    for (int s = 0; s < g.n; ++s) {
        dist[s][s] = 0;
        std::queue<int> q;
        q.push(s);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            if (dist[s][u] >= h_max) continue;
            for (int v : adj_list[u]) {
                if (dist[s][v] == kUnreachable) {
                    dist[s][v] = dist[s][u] + 1;
                    q.push(v);
                }
            }
        }
    }
    return dist;
}

MatrixFamily build_family(const Graph& g, const FamilySpec& spec) {
    spec.validate();
    g.validate();
    MatrixFamily fam;
    fam.n = g.n;
    fam.tags = spec.entries;

    std::map<double, Matrix> bases;  // one base per distinct eps
    for (const FamilyEntry& e : spec.entries)
        if (!bases.count(e.eps)) bases.emplace(e.eps, build_base(g, e.eps).mat());

    std::vector<uint8_t> mask;
    if (spec.sparsity.hop_masked) {
        auto dist = hop_distances(g, spec.sparsity.hops);
        mask.assign(static_cast<size_t>(g.n) * g.n, 0);
        for (int u = 0; u < g.n; ++u)
            for (int v = 0; v < g.n; ++v)
                if (dist[u][v] <= spec.sparsity.hops)
                    mask[static_cast<size_t>(u) * g.n + v] = 1;
    }

    for (const FamilyEntry& e : spec.entries) {
        Matrix power = Matrix::identity(g.n);
        const Matrix& base = bases.at(e.eps);
        for (int i = 0; i < e.k; ++i) power = mirror_upper(matmul(power, base));
        if (!mask.empty()) {
            for (int u = 0; u < g.n; ++u)
                for (int v = 0; v < g.n; ++v)
                    if (!mask[static_cast<size_t>(u) * g.n + v]) power(u, v) = 0.0;
        }
        fam.members.emplace_back(std::move(power));
    }
    fam.mask = std::move(mask);
    return fam;
}

SymMatrix preset_operator(const Graph& g, PresetOperator which) {
    switch (which) {
        case PresetOperator::SymNormAdj:
            return build_base(g, -0.5);
        case PresetOperator::NormLaplacianSelfloop: {
            Matrix m = build_base(g, -0.5).mat();
            for (size_t i = 0; i < m.size(); ++i) m.data()[i] = -m.data()[i];
            for (int u = 0; u < g.n; ++u) m(u, u) += 1.0;
            return SymMatrix(std::move(m));
        }
        case PresetOperator::Laplacian: {
            SymMatrix a = adjacency(g);
            Vector d = degrees(a, false);
            Matrix l(g.n, g.n);
            for (int u = 0; u < g.n; ++u) {
                l(u, u) = d[u];
                for (int v = 0; v < g.n; ++v)
                    if (v != u) l(u, v) = -a(u, v);
            }
            return SymMatrix(std::move(l));
        }
    }
    throw std::invalid_argument("preset_operator: unknown preset");
}

MatrixFamily conjugate_family(const MatrixFamily& fam, const std::vector<int>& perm) {
    if (static_cast<int>(perm.size()) != fam.n)
        throw std::invalid_argument("conjugate_family: perm size != n");
    MatrixFamily out;
    out.n = fam.n;
    out.tags = fam.tags;
    for (const SymMatrix& s : fam.members) {
        Matrix m(fam.n, fam.n);
        for (int u = 0; u < fam.n; ++u)
            for (int v = 0; v < fam.n; ++v) m(perm[u], perm[v]) = s(u, v);
        out.members.emplace_back(std::move(m));
    }
    if (!fam.mask.empty()) {
        out.mask.assign(fam.mask.size(), 0);
        for (int u = 0; u < fam.n; ++u)
            for (int v = 0; v < fam.n; ++v)
                out.mask[static_cast<size_t>(perm[u]) * fam.n + perm[v]] =
                    fam.mask[static_cast<size_t>(u) * fam.n + v];
    }
    return out;
}

}  // namespace pdf
