// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "pdf/graph.hpp"
#include "pdf/rng.hpp"

using namespace pdf;
namespace fs = std::filesystem;

namespace {

Graph p2() { return Graph{2, {{0, 1, 1.0}}, {0, 0}, {}, "P2"}; }
Graph p3() { return Graph{3, {{0, 1, 1.0}, {1, 2, 1.0}}, {0, 0, 0}, {}, "P3"}; }

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("pdf_test_" + std::to_string(Rng(std::random_device{}()).next_u64()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

}  // namespace

TEST_CASE("adjacency matches the edge list") {
    Graph single{1, {}, {0}, {}, "K1"};
    CHECK(adjacency(single).mat() == Matrix(1, 1, 0.0));

    SymMatrix a2 = adjacency(p2());
    CHECK(a2(0, 1) == 1.0);
    CHECK(a2(1, 0) == 1.0);
    CHECK(a2(0, 0) == 0.0);

    SymMatrix a3 = adjacency(p3());
    Matrix expect(3, 3);
    expect(0, 1) = expect(1, 0) = expect(1, 2) = expect(2, 1) = 1.0;
    CHECK(a3.mat() == expect);
}

TEST_CASE("degrees with and without self-loops") {
    SymMatrix a = adjacency(p2());
    CHECK(degrees(a, false) == Vector{1.0, 1.0});
    CHECK(degrees(a, true) == Vector{2.0, 2.0});
    Graph single{1, {}, {0}, {}, "K1"};
    CHECK(degrees(adjacency(single), true) == Vector{1.0});
}

TEST_CASE("graph invariants are enforced") {
    CHECK_THROWS(Graph{0, {}, {}, {}, ""}.validate());
    CHECK_THROWS(Graph{2, {{0, 2, 1.0}}, {}, {}, ""}.validate());       // endpoint range
    CHECK_THROWS(Graph{2, {{1, 1, 1.0}}, {}, {}, ""}.validate());       // self-loop
    CHECK_THROWS(Graph{2, {{0, 1, -1.0}}, {}, {}, ""}.validate());      // negative weight
}

TEST_CASE("adjacency permutation equivariance is exact") {
    Rng rng(11);
    for (int t = 0; t < 20; ++t) {
        const int n = 2 + rng.uniform_int(7);
        Graph g;
        g.n = n;
        g.node_labels.assign(n, 0);
        for (int u = 1; u < n; ++u) g.edges.push_back({rng.uniform_int(u), u, rng.uniform(0.1, 2.0)});
        std::vector<int> perm(n);
        for (int i = 0; i < n; ++i) perm[i] = i;
        rng.shuffle(perm);

        Matrix p = permutation_matrix(perm);
        Matrix lhs = adjacency(permute_graph(g, perm)).mat();
        Matrix rhs = matmul(matmul(transpose(p), adjacency(g).mat()), p);
        CHECK(lhs == rhs);  // pure copies, no arithmetic
    }
}

TEST_CASE("tudataset loader on constructed fixtures") {
    TempDir td;
    SUBCASE("duplicate directed pair collapses to one edge") {
        write(td.path / "T_A.txt", "1, 2\n2, 1\n");
        write(td.path / "T_graph_indicator.txt", "1\n1\n");
        write(td.path / "T_graph_labels.txt", "1\n");
        Dataset ds = load_tudataset(td.path.string(), "T");
        REQUIRE(ds.size() == 1);
        CHECK(ds.graphs[0].n == 2);
        CHECK(ds.graphs[0].edges.size() == 1);
        CHECK(ds.class_id(0) == 0);
        CHECK(ds.task.num_classes == 1);
    }
    SUBCASE("two singleton graphs, labels remapped by sorted raw value") {
        write(td.path / "T_A.txt", "");
        write(td.path / "T_graph_indicator.txt", "1\n2\n");
        write(td.path / "T_graph_labels.txt", "1\n-1\n");
        Dataset ds = load_tudataset(td.path.string(), "T");
        REQUIRE(ds.size() == 2);
        CHECK(ds.task.num_classes == 2);
        CHECK(ds.class_id(0) == 1);  // raw 1 sorts after raw -1
        CHECK(ds.class_id(1) == 0);
        CHECK(ds.graphs[0].n == 1);
        CHECK(ds.graphs[0].edges.empty());
    }
    SUBCASE("node labels file and missing-label default") {
        write(td.path / "T_A.txt", "1, 2\n");
        write(td.path / "T_graph_indicator.txt", "1\n1\n");
        write(td.path / "T_graph_labels.txt", "5\n");
        write(td.path / "T_node_labels.txt", "3\n1\n");
        Dataset ds = load_tudataset(td.path.string(), "T");
        CHECK(ds.graphs[0].node_labels == std::vector<int>{3, 1});
    }
    SUBCASE("malformed line reports the line number") {
        write(td.path / "T_A.txt", "1, 2\nbogus\n");
        write(td.path / "T_graph_indicator.txt", "1\n1\n");
        write(td.path / "T_graph_labels.txt", "1\n");
        CHECK_THROWS_WITH_AS(load_tudataset(td.path.string(), "T"),
                             doctest::Contains(":2:"), std::runtime_error);
    }
    SUBCASE("indicator/label length mismatch is a structural error") {
        write(td.path / "T_A.txt", "");
        write(td.path / "T_graph_indicator.txt", "1\n2\n");
        write(td.path / "T_graph_labels.txt", "1\n");
        CHECK_THROWS(load_tudataset(td.path.string(), "T"));
    }
}

TEST_CASE("json fixture round trip preserves the dataset") {
    TempDir td;
    write(td.path / "T_A.txt", "1, 2\n2, 1\n2, 3\n3, 2\n");
    write(td.path / "T_graph_indicator.txt", "1\n1\n1\n");
    write(td.path / "T_graph_labels.txt", "7\n");
    Dataset ds = load_tudataset(td.path.string(), "T");

    const fs::path json_path = td.path / "fixture.json";
    save_json_dataset(ds, json_path.string());
    Dataset ds2 = load_json_dataset(json_path.string());

    REQUIRE(ds2.size() == ds.size());
    CHECK(ds2.task.num_classes == ds.task.num_classes);
    for (int i = 0; i < ds.size(); ++i) {
        CHECK(ds2.graphs[i].n == ds.graphs[i].n);
        auto key = [](const Edge& e) {
            return std::tuple<int, int, double>{std::min(e.u, e.v), std::max(e.u, e.v), e.w};
        };
        auto es1 = ds.graphs[i].edges;
        auto es2 = ds2.graphs[i].edges;
        REQUIRE(es1.size() == es2.size());
        std::sort(es1.begin(), es1.end(), [&](auto& a, auto& b) { return key(a) < key(b); });
        std::sort(es2.begin(), es2.end(), [&](auto& a, auto& b) { return key(a) < key(b); });
        for (size_t e = 0; e < es1.size(); ++e) CHECK(key(es1[e]) == key(es2[e]));
        CHECK(ds2.targets[i] == ds.targets[i]);
    }
}

TEST_CASE("synthetic datasets are deterministic and label correctly") {
    Dataset a = synth_dataset(SynthKind::CycleVsPath, 4, 4, 6, 7);
    Dataset b = synth_dataset(SynthKind::CycleVsPath, 4, 4, 6, 7);
    CHECK(dataset_to_json(a) == dataset_to_json(b));
    CHECK(a.splits.train == b.splits.train);
    CHECK(a.splits.val == b.splits.val);
    CHECK(a.splits.test == b.splits.test);
    for (int i = 0; i < a.size(); ++i) {
        const bool is_cycle = a.targets[i] == 1.0;
        CHECK(a.graphs[i].edges.size() == static_cast<size_t>(a.graphs[i].n) - (is_cycle ? 0 : 1));
    }

    // mean-degree targets: C4 -> 2, P2 -> 1
    Graph c4{4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 0, 1.0}}, {0, 0, 0, 0}, {}, "C4"};
    CHECK(mean_degree(c4) == 2.0);
    CHECK(mean_degree(Graph{2, {{0, 1, 1.0}}, {0, 0}, {}, "P2"}) == 1.0);

    Dataset dr = synth_dataset(SynthKind::DegreeRegression, 8, 4, 8, 3);
    for (int i = 0; i < dr.size(); ++i) CHECK(dr.targets[i] == mean_degree(dr.graphs[i]));
    CHECK_FALSE(dr.splits.train.empty());
    CHECK_FALSE(dr.splits.val.empty());
    CHECK_FALSE(dr.splits.test.empty());

    CHECK_THROWS(synth_dataset(SynthKind::CycleVsPath, 0, 4, 6, 1));
}
