// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "pdf/graph.hpp"
#include "pdf/matrix.hpp"

namespace pdf {

/// Unreachable-pair sentinel in hop_distances output.
inline constexpr int kUnreachable = 2147483647;

struct FamilyEntry {
    double eps = -0.5;  // in [-0.5, 0]
    int k = 1;          // nonnegative power
};

struct Sparsity {
    bool hop_masked = false;
    int hops = 0;  // positive when hop_masked

    static Sparsity dense() { return {}; }
    static Sparsity masked(int h) { return {true, h}; }
};

/// Ordered list of (eps, k) tags plus the sparsity mode; the order fixes the
/// mixer coefficient indexing.
struct FamilySpec {
    std::vector<FamilyEntry> entries;
    Sparsity sparsity;

    int size() const { return static_cast<int>(entries.size()); }
    void validate() const;  // nonempty, eps in [-0.5,0], k >= 0, unique pairs
};

/// The stacked operator set built from one graph. mask is empty for dense
/// families; otherwise mask[u*n+v] != 0 marks positions within the hop budget
/// (the diagonal is always kept).
struct MatrixFamily {
    int n = 0;
    std::vector<FamilyEntry> tags;
    std::vector<SymMatrix> members;
    std::vector<uint8_t> mask;

    int size() const { return static_cast<int>(members.size()); }
    bool masked() const { return !mask.empty(); }
    bool kept(int u, int v) const {
        return mask.empty() || mask[static_cast<size_t>(u) * n + v] != 0;
    }
};

/// Dt^eps (A + I) Dt^eps with Dt = D + I, computed entrywise; exact-symmetric.
SymMatrix build_base(const Graph& g, double eps);

/// Member for tag (eps, k) is build_base(g, eps)^k by repeated multiplication
/// (k = 0 gives the identity). With hop_masked(h), entries at hop distance > h
/// are zeroed after powering.
MatrixFamily build_family(const Graph& g, const FamilySpec& spec);

/// Unweighted BFS hop counts capped at h_max; entries beyond h_max (or
/// unreachable) are kUnreachable. Diagonal 0, symmetric.
std::vector<std::vector<int>> hop_distances(const Graph& g, int h_max);

enum class PresetOperator { Laplacian, NormLaplacianSelfloop, SymNormAdj };

SymMatrix preset_operator(const Graph& g, PresetOperator which);

/// Member-wise P^T S P relabeling (mask relabeled too).
MatrixFamily conjugate_family(const MatrixFamily& fam, const std::vector<int>& perm);

}  // namespace pdf
