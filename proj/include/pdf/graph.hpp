// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdf/matrix.hpp"

namespace pdf {

struct Edge {
    int u = 0;
    int v = 0;
    double w = 1.0;
};

/// Undirected weighted graph. Each edge is stored once, self-loops are never
/// stored (operators add them via A + I). Node features are either categorical
/// label ids (node_labels) or a dense n x d_in matrix (node_features), not both.
struct Graph {
    int n = 0;
    std::vector<Edge> edges;
    std::vector<int> node_labels;   // empty when continuous features are used
    Matrix node_features;           // empty when categorical labels are used
    std::string name;

    bool categorical() const { return !node_labels.empty(); }
    int feature_dim() const { return node_features.empty() ? 0 : node_features.cols(); }
    void validate() const;  // throws std::invalid_argument on violations
};

enum class TaskKind { Regression, Classification };

struct Task {
    TaskKind kind = TaskKind::Regression;
    int num_classes = 0;
};

struct Splits {
    std::vector<int> train, val, test;
};

struct Dataset {
    std::vector<Graph> graphs;
    std::vector<double> targets;  // class ids stored as integral doubles for classification
    Task task;
    Splits splits;

    int size() const { return static_cast<int>(graphs.size()); }
    int class_id(int graph_index) const;  // checked against num_classes
    void validate() const;
};

SymMatrix adjacency(const Graph& g);

/// Row sums of a symmetric operator; +1 per entry when add_self_loops is set
/// (the degree vector of A + I).
Vector degrees(const SymMatrix& a, bool add_self_loops);

double mean_degree(const Graph& g);

/// Relabels node u as perm[u]; perm must be a permutation of [0, n).
Graph permute_graph(const Graph& g, const std::vector<int>& perm);

/// Permutation matrix P with P(u, perm[u]) = 1, so that
/// adjacency(permute_graph(g, perm)) == P^T * adjacency(g) * P.
Matrix permutation_matrix(const std::vector<int>& perm);

/// Reads the TUDataset text format: {name}_A.txt (1-indexed "u, v" lines),
/// {name}_graph_indicator.txt, {name}_graph_labels.txt and, when present,
/// {name}_node_labels.txt. Duplicate directed pairs collapse to one undirected
/// edge; raw class labels are remapped to 0-based ids by ascending sort.
Dataset load_tudataset(const std::string& dir, const std::string& name);

/// JSON fixture interchange format:
/// {"task":"regression"|"classification", "num_classes":k?, "graphs":[
///    {"n":int, "edges":[[u,v,w]], "node_labels":[int]?, "node_features":[[...]]?,
///     "target":number}]}
Dataset load_json_dataset(const std::string& path);
void save_json_dataset(const Dataset& ds, const std::string& path);
std::string dataset_to_json(const Dataset& ds);
Dataset dataset_from_json(const std::string& text);

enum class SynthKind { CycleVsPath, DegreeRegression };

/// Deterministic synthetic datasets. cycle_vs_path: binary classification,
/// cycles labeled 1 and paths 0. degree_regression: target is the mean degree.
/// Splits are assigned 60/20/20 from the same seed.
Dataset synth_dataset(SynthKind kind, int n_graphs, int n_min, int n_max, uint64_t seed);

/// Shuffles [0, |graphs|) with the given seed and slices train/val/test by the
/// fractions (test takes the remainder).
void assign_random_splits(Dataset& ds, double train_frac, double val_frac, uint64_t seed);

}  // namespace pdf
