// SPDX-License-Identifier: Apache-2.0
#include "pdf/graph.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "pdf/rng.hpp"

namespace pdf {

using nlohmann::json;

void Graph::validate() const {
    if (n < 1) throw std::invalid_argument("Graph: n must be >= 1");
    for (const Edge& e : edges) {
        if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n)
            throw std::invalid_argument("Graph: edge endpoint out of range");
        if (e.u == e.v) throw std::invalid_argument("Graph: self-loops must not be stored");
        if (e.w < 0.0 || !std::isfinite(e.w))
            throw std::invalid_argument("Graph: edge weights must be nonnegative finite");
    }
    if (!node_labels.empty() && static_cast<int>(node_labels.size()) != n)
        throw std::invalid_argument("Graph: node_labels size != n");
    if (!node_features.empty() && node_features.rows() != n)
        throw std::invalid_argument("Graph: node_features rows != n");
    if (!node_labels.empty() && !node_features.empty())
        throw std::invalid_argument("Graph: features are categorical XOR continuous");
}

int Dataset::class_id(int graph_index) const {
    if (task.kind != TaskKind::Classification)
        throw std::logic_error("class_id on a regression dataset");
    double t = targets.at(graph_index);
    int c = static_cast<int>(std::llround(t));
    if (c < 0 || c >= task.num_classes)
        throw std::out_of_range("class id out of range");
    return c;
}

void Dataset::validate() const {
    if (targets.size() != graphs.size())
        throw std::invalid_argument("Dataset: |targets| != |graphs|");
    for (const Graph& g : graphs) g.validate();
    std::set<int> seen;
    auto check_split = [&](const std::vector<int>& idx) {
        for (int i : idx) {
            if (i < 0 || i >= size()) throw std::invalid_argument("Dataset: split index out of range");
            if (!seen.insert(i).second) throw std::invalid_argument("Dataset: splits overlap");
        }
    };
    check_split(splits.train);
    check_split(splits.val);
    check_split(splits.test);
    if (task.kind == TaskKind::Classification)
        for (int i = 0; i < size(); ++i) (void)class_id(i);
}

SymMatrix adjacency(const Graph& g) {
    g.validate();
    Matrix a(g.n, g.n);
    for (const Edge& e : g.edges) {
        a(e.u, e.v) = e.w;
        a(e.v, e.u) = e.w;
    }
    return SymMatrix(std::move(a));
}

Vector degrees(const SymMatrix& a, bool add_self_loops) {
    Vector d(a.n(), add_self_loops ? 1.0 : 0.0);
    for (int u = 0; u < a.n(); ++u)
        for (int v = 0; v < a.n(); ++v) d[u] += a(u, v);
    return d;
}

double mean_degree(const Graph& g) {
    return 2.0 * static_cast<double>(g.edges.size()) / static_cast<double>(g.n);
}

Graph permute_graph(const Graph& g, const std::vector<int>& perm) {
    if (static_cast<int>(perm.size()) != g.n)
        throw std::invalid_argument("permute_graph: perm size != n");
    Graph out;
    out.n = g.n;
    out.name = g.name;
    out.edges.reserve(g.edges.size());
    for (const Edge& e : g.edges) out.edges.push_back({perm[e.u], perm[e.v], e.w});
    if (!g.node_labels.empty()) {
        out.node_labels.resize(g.n);
        for (int u = 0; u < g.n; ++u) out.node_labels[perm[u]] = g.node_labels[u];
    }
    if (!g.node_features.empty()) {
        out.node_features = Matrix(g.n, g.node_features.cols());
        for (int u = 0; u < g.n; ++u)
            for (int j = 0; j < g.node_features.cols(); ++j)
                out.node_features(perm[u], j) = g.node_features(u, j);
    }
    out.validate();
    return out;
}

Matrix permutation_matrix(const std::vector<int>& perm) {
    int n = static_cast<int>(perm.size());
    Matrix p(n, n);
    for (int u = 0; u < n; ++u) p(u, perm[u]) = 1.0;
    return p;
}

namespace {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> read_lines(const std::string& path, bool required) {
    std::ifstream in(path);
    if (!in) {
        if (required) throw ParseError("cannot open " + path);
        return {};
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    // trailing blank lines are common in distributed files
    while (!lines.empty() && lines.back().find_first_not_of(" \t") == std::string::npos)
        lines.pop_back();
    return lines;
}

long parse_int(const std::string& s, const std::string& path, size_t lineno) {
    size_t pos = 0;
    long v = 0;
    try {
        v = std::stol(s, &pos);
    } catch (const std::exception&) {
        throw ParseError(path + ":" + std::to_string(lineno) + ": expected integer, got '" + s + "'");
    }
    if (s.find_first_not_of(" \t", pos) != std::string::npos)
        throw ParseError(path + ":" + std::to_string(lineno) + ": trailing characters in '" + s + "'");
    return v;
}

}  // namespace

Dataset load_tudataset(const std::string& dir, const std::string& name) {
    namespace fs = std::filesystem;
    const std::string base = (fs::path(dir) / name).string() + "_";
    const std::string a_path = base + "A.txt";
    const std::string ind_path = base + "graph_indicator.txt";
    const std::string lab_path = base + "graph_labels.txt";
    const std::string nl_path = base + "node_labels.txt";

    auto ind_lines = read_lines(ind_path, true);
    auto lab_lines = read_lines(lab_path, true);
    auto a_lines = read_lines(a_path, true);
    auto nl_lines = read_lines(nl_path, false);

    const int total_nodes = static_cast<int>(ind_lines.size());
    if (total_nodes == 0) throw ParseError(ind_path + ": no nodes indicated");

    std::vector<int> graph_of(total_nodes);  // 0-based graph index per global node
    int num_graphs = 0;
    for (int i = 0; i < total_nodes; ++i) {
        long gid = parse_int(ind_lines[i], ind_path, i + 1);
        if (gid < 1) throw ParseError(ind_path + ":" + std::to_string(i + 1) + ": graph id must be >= 1");
        graph_of[i] = static_cast<int>(gid) - 1;
        num_graphs = std::max(num_graphs, static_cast<int>(gid));
    }
    if (static_cast<int>(lab_lines.size()) != num_graphs)
        throw ParseError(lab_path + ": " + std::to_string(lab_lines.size()) +
                         " labels for " + std::to_string(num_graphs) + " graphs");
    if (!nl_lines.empty() && static_cast<int>(nl_lines.size()) != total_nodes)
        throw ParseError(nl_path + ": " + std::to_string(nl_lines.size()) +
                         " labels for " + std::to_string(total_nodes) + " nodes");

    // local index of each global node within its graph (file order)
    std::vector<int> local(total_nodes);
    std::vector<int> graph_n(num_graphs, 0);
    for (int i = 0; i < total_nodes; ++i) local[i] = graph_n[graph_of[i]]++;

    std::vector<std::set<std::pair<int, int>>> edge_sets(num_graphs);
    for (size_t ln = 0; ln < a_lines.size(); ++ln) {
        const std::string& line = a_lines[ln];
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw ParseError(a_path + ":" + std::to_string(ln + 1) + ": expected 'u, v'");
        long u = parse_int(line.substr(0, comma), a_path, ln + 1);
        long v = parse_int(line.substr(comma + 1), a_path, ln + 1);
        if (u < 1 || u > total_nodes || v < 1 || v > total_nodes)
            throw ParseError(a_path + ":" + std::to_string(ln + 1) + ": node id out of range");
        if (u == v) continue;
        int gu = graph_of[u - 1], gv = graph_of[v - 1];
        if (gu != gv)
            throw ParseError(a_path + ":" + std::to_string(ln + 1) + ": edge crosses graphs");
        int lu = local[u - 1], lv = local[v - 1];
        edge_sets[gu].insert({std::min(lu, lv), std::max(lu, lv)});
    }

    // class labels remapped by ascending raw value
    std::vector<long> raw_labels(num_graphs);
    std::set<long> distinct;
    for (int gi = 0; gi < num_graphs; ++gi) {
        raw_labels[gi] = parse_int(lab_lines[gi], lab_path, gi + 1);
        distinct.insert(raw_labels[gi]);
    }
    std::map<long, int> remap;
    int next = 0;
    for (long r : distinct) remap[r] = next++;

    Dataset ds;
    ds.task = {TaskKind::Classification, static_cast<int>(distinct.size())};
    ds.graphs.resize(num_graphs);
    ds.targets.resize(num_graphs);
    for (int gi = 0; gi < num_graphs; ++gi) {
        Graph& g = ds.graphs[gi];
        g.n = graph_n[gi];
        g.name = name + "_" + std::to_string(gi);
        g.node_labels.assign(g.n, 0);
        for (auto [u, v] : edge_sets[gi]) g.edges.push_back({u, v, 1.0});
        ds.targets[gi] = remap[raw_labels[gi]];
    }
    if (!nl_lines.empty()) {
        for (int i = 0; i < total_nodes; ++i) {
            long l = parse_int(nl_lines[i], nl_path, i + 1);
            if (l < 0) throw ParseError(nl_path + ":" + std::to_string(i + 1) + ": negative node label");
            ds.graphs[graph_of[i]].node_labels[local[i]] = static_cast<int>(l);
        }
    }
    ds.validate();
    return ds;
}

std::string dataset_to_json(const Dataset& ds) {
    json j;
    j["task"] = ds.task.kind == TaskKind::Regression ? "regression" : "classification";
    if (ds.task.kind == TaskKind::Classification) j["num_classes"] = ds.task.num_classes;
    j["graphs"] = json::array();
    for (int gi = 0; gi < ds.size(); ++gi) {
        const Graph& g = ds.graphs[gi];
        json jg;
        jg["n"] = g.n;
        json edges = json::array();
        for (const Edge& e : g.edges) edges.push_back({e.u, e.v, e.w});
        jg["edges"] = std::move(edges);
        if (!g.node_labels.empty()) jg["node_labels"] = g.node_labels;
        if (!g.node_features.empty()) {
            json rows = json::array();
            for (int u = 0; u < g.n; ++u) {
                json row = json::array();
                for (int c = 0; c < g.node_features.cols(); ++c) row.push_back(g.node_features(u, c));
                rows.push_back(std::move(row));
            }
            jg["node_features"] = std::move(rows);
        }
        jg["target"] = ds.targets[gi];
        j["graphs"].push_back(std::move(jg));
    }
    return j.dump(2);
}

Dataset dataset_from_json(const std::string& text) {
    json j = json::parse(text);
    Dataset ds;
    std::string task = j.at("task").get<std::string>();
    if (task == "regression") {
        ds.task = {TaskKind::Regression, 0};
    } else if (task == "classification") {
        ds.task = {TaskKind::Classification, j.at("num_classes").get<int>()};
    } else {
        throw std::runtime_error("dataset json: unknown task '" + task + "'");
    }
    int gi = 0;
    for (const json& jg : j.at("graphs")) {
        Graph g;
        g.n = jg.at("n").get<int>();
        g.name = "json_" + std::to_string(gi++);
        for (const json& je : jg.at("edges")) {
            if (je.size() != 3) throw std::runtime_error("dataset json: edge must be [u, v, w]");
            g.edges.push_back({je[0].get<int>(), je[1].get<int>(), je[2].get<double>()});
        }
        if (jg.contains("node_labels")) g.node_labels = jg["node_labels"].get<std::vector<int>>();
        if (jg.contains("node_features")) {
            const json& rows = jg["node_features"];
            int d = rows.empty() ? 0 : static_cast<int>(rows[0].size());
            g.node_features = Matrix(static_cast<int>(rows.size()), d);
            for (int u = 0; u < static_cast<int>(rows.size()); ++u)
                for (int c = 0; c < d; ++c) g.node_features(u, c) = rows[u][c].get<double>();
        }
        if (g.node_labels.empty() && g.node_features.empty()) g.node_labels.assign(g.n, 0);
        ds.graphs.push_back(std::move(g));
        ds.targets.push_back(jg.at("target").get<double>());
    }
    ds.validate();
    return ds;
}

Dataset load_json_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return dataset_from_json(ss.str());
}

void save_json_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << dataset_to_json(ds) << "\n";
}

namespace {

Graph make_path(int n) {
    Graph g;
    g.n = n;
    for (int u = 0; u + 1 < n; ++u) g.edges.push_back({u, u + 1, 1.0});
    g.node_labels.assign(n, 0);
    return g;
}

Graph make_cycle(int n) {
    Graph g = make_path(n);
    g.edges.push_back({n - 1, 0, 1.0});
    return g;
}

Graph random_relabel(Graph g, Rng& rng) {
    std::vector<int> perm(g.n);
    for (int i = 0; i < g.n; ++i) perm[i] = i;
    rng.shuffle(perm);
    return permute_graph(g, perm);
}

Graph random_connected(int n, Rng& rng) {
    Graph g;
    g.n = n;
    g.node_labels.assign(n, 0);
    std::set<std::pair<int, int>> used;
    for (int u = 1; u < n; ++u) {
        int p = rng.uniform_int(u);
        used.insert({p, u});
        g.edges.push_back({p, u, 1.0});
    }
    int extra = n > 1 ? rng.uniform_int(n) : 0;
    for (int t = 0; t < extra; ++t) {
        int u = rng.uniform_int(n);
        int v = rng.uniform_int(n);
        if (u == v) continue;
        auto key = std::make_pair(std::min(u, v), std::max(u, v));
        if (used.insert(key).second) g.edges.push_back({key.first, key.second, 1.0});
    }
    return g;
}

}  // namespace

Dataset synth_dataset(SynthKind kind, int n_graphs, int n_min, int n_max, uint64_t seed) {
    if (n_graphs < 1) throw std::invalid_argument("synth_dataset: n_graphs must be >= 1");
    if (n_min < (kind == SynthKind::CycleVsPath ? 3 : 1) || n_max < n_min)
        throw std::invalid_argument("synth_dataset: invalid n_range");
    Rng rng(Rng::mix(seed, static_cast<uint64_t>(kind)));
    Dataset ds;
    for (int i = 0; i < n_graphs; ++i) {
        int n = n_min + rng.uniform_int(n_max - n_min + 1);
        Graph g;
        double target = 0.0;
        if (kind == SynthKind::CycleVsPath) {
            bool cycle = (i % 2 == 0);  // alternate for a balanced dataset
            g = random_relabel(cycle ? make_cycle(n) : make_path(n), rng);
            g.name = (cycle ? "cycle_" : "path_") + std::to_string(i);
            target = cycle ? 1.0 : 0.0;
        } else {
            g = random_connected(n, rng);
            g.name = "degreg_" + std::to_string(i);
            target = mean_degree(g);
        }
        ds.graphs.push_back(std::move(g));
        ds.targets.push_back(target);
    }
    ds.task = kind == SynthKind::CycleVsPath ? Task{TaskKind::Classification, 2}
                                             : Task{TaskKind::Regression, 0};
    assign_random_splits(ds, 0.6, 0.2, Rng::mix(seed, 0x5417ULL));
    ds.validate();
    return ds;
}

void assign_random_splits(Dataset& ds, double train_frac, double val_frac, uint64_t seed) {
    if (train_frac < 0 || val_frac < 0 || train_frac + val_frac > 1.0)
        throw std::invalid_argument("assign_random_splits: invalid fractions");
    std::vector<int> idx(ds.size());
    for (int i = 0; i < ds.size(); ++i) idx[i] = i;
    Rng rng(seed);
    rng.shuffle(idx);
    int n = ds.size();
    int n_train = static_cast<int>(train_frac * n);
    int n_val = static_cast<int>(val_frac * n);
    if (n_train == 0 && n > 0) n_train = 1;
    if (n_val == 0 && n_train < n) n_val = std::min(1, n - n_train);
    n_train = std::min(n_train, n);
    n_val = std::min(n_val, n - n_train);
    ds.splits.train.assign(idx.begin(), idx.begin() + n_train);
    ds.splits.val.assign(idx.begin() + n_train, idx.begin() + n_train + n_val);
    ds.splits.test.assign(idx.begin() + n_train + n_val, idx.end());
}

}  // namespace pdf
