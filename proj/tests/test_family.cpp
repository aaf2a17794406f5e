// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "pdf/family.hpp"
#include "pdf/rng.hpp"
#include "pdf/spectral.hpp"
#include "pdf/verify.hpp"

using namespace pdf;

namespace {
Graph p2() { return Graph{2, {{0, 1, 1.0}}, {0, 0}, {}, "P2"}; }
Graph p3() { return Graph{3, {{0, 1, 1.0}, {1, 2, 1.0}}, {0, 0, 0}, {}, "P3"}; }
}  // namespace

TEST_CASE("build_base endpoints") {
    SymMatrix eps0 = build_base(p2(), 0.0);
    CHECK(eps0.mat() == Matrix(2, 2, 1.0));  // A + I on P2 is all-ones

    SymMatrix half = build_base(p2(), -0.5);
    for (int u = 0; u < 2; ++u)
        for (int v = 0; v < 2; ++v) CHECK(half(u, v) == doctest::Approx(0.5).epsilon(1e-14));

    Graph single{1, {}, {0}, {}, "K1"};
    CHECK(build_base(single, -0.3).mat() == Matrix::identity(1));

    CHECK_THROWS(build_base(p2(), 0.1));
    CHECK_THROWS(build_base(p2(), -0.6));
}

TEST_CASE("build_family powers and masking") {
    SUBCASE("zeroth power is the identity") {
        FamilySpec spec;
        spec.entries = {{-0.5, 0}};
        MatrixFamily fam = build_family(p3(), spec);
        CHECK(fam.members[0].mat() == Matrix::identity(3));
    }
    SUBCASE("P2 base at eps=-0.5 is idempotent") {
        FamilySpec spec;
        spec.entries = {{-0.5, 2}};
        MatrixFamily fam = build_family(p2(), spec);
        for (int u = 0; u < 2; ++u)
            for (int v = 0; v < 2; ++v)
                CHECK(fam.members[0](u, v) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("hop mask zeroes beyond-hop entries after powering") {
        FamilySpec spec;
        spec.entries = {{0.0, 2}};
        spec.sparsity = Sparsity::masked(1);
        MatrixFamily fam = build_family(p3(), spec);
        // (A+I)^2 on P3 is [[2,2,1],[2,3,2],[1,2,2]]; hop distance 2 between nodes 0 and 2
        Matrix expect(3, 3);
        expect(0, 0) = 2; expect(0, 1) = 2; expect(0, 2) = 0;
        expect(1, 0) = 2; expect(1, 1) = 3; expect(1, 2) = 2;
        expect(2, 0) = 0; expect(2, 1) = 2; expect(2, 2) = 2;
        CHECK(max_abs_diff(fam.members[0].mat(), expect) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(fam.masked());
        CHECK_FALSE(fam.kept(0, 2));
        CHECK(fam.kept(0, 0));
    }
    SUBCASE("spec validation") {
        FamilySpec bad;
        CHECK_THROWS(bad.validate());                          // empty
        bad.entries = {{-0.2, 1}, {-0.2, 1}};
        CHECK_THROWS(bad.validate());                          // duplicate
        FamilySpec neg;
        neg.entries = {{-0.2, -1}};
        CHECK_THROWS(neg.validate());                          // negative power
    }
}

TEST_CASE("hop_distances") {
    auto d = hop_distances(p3(), 2);
    CHECK(d[0] == std::vector<int>{0, 1, 2});
    CHECK(d[1] == std::vector<int>{1, 0, 1});
    CHECK(d[2] == std::vector<int>{2, 1, 0});

    Graph disc{2, {}, {0, 0}, {}, "2K1"};
    auto dd = hop_distances(disc, 3);
    CHECK(dd[0][1] == kUnreachable);
    CHECK(dd[1][0] == kUnreachable);
    CHECK(dd[0][0] == 0);

    Graph single{1, {}, {0}, {}, "K1"};
    CHECK(hop_distances(single, 1) == std::vector<std::vector<int>>{{0}});

    // capping: entries past h_max report unreachable
    Graph p4{4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}}, {0, 0, 0, 0}, {}, "P4"};
    auto dc = hop_distances(p4, 1);
    CHECK(dc[0][2] == kUnreachable);
    CHECK(dc[0][1] == 1);
}

TEST_CASE("preset operators") {
    SymMatrix l = preset_operator(p2(), PresetOperator::Laplacian);
    CHECK(l(0, 0) == 1.0);
    CHECK(l(0, 1) == -1.0);

    SymMatrix nl = preset_operator(p2(), PresetOperator::NormLaplacianSelfloop);
    CHECK(nl(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(nl(0, 1) == doctest::Approx(-0.5).epsilon(1e-14));

    CHECK(max_abs_diff(preset_operator(p2(), PresetOperator::SymNormAdj).mat(),
                       build_base(p2(), -0.5).mat()) == 0.0);

    Graph single{1, {}, {0}, {}, "K1"};
    CHECK(preset_operator(single, PresetOperator::Laplacian).mat() == Matrix(1, 1, 0.0));
}

TEST_CASE("family equivariance under relabeling") {
    Rng rng(5);
    for (int t = 0; t < 15; ++t) {
        Graph g = random_connected_graph(rng, 2, 9, true);
        FamilySpec spec;
        spec.entries = {{0.0, 1}, {-0.3, 2}, {-0.5, 3}};
        if (t % 3 == 0) spec.sparsity = Sparsity::masked(2);
        std::vector<int> perm(g.n);
        for (int i = 0; i < g.n; ++i) perm[i] = i;
        rng.shuffle(perm);

        MatrixFamily fam = build_family(g, spec);
        MatrixFamily fam_p = build_family(permute_graph(g, perm), spec);
        for (int m = 0; m < fam.size(); ++m) {
            Matrix expect(g.n, g.n);
            for (int u = 0; u < g.n; ++u)
                for (int v = 0; v < g.n; ++v) expect(perm[u], perm[v]) = fam.members[m](u, v);
            CHECK(max_abs_diff(fam_p.members[m].mat(), expect) <= 1e-10);
        }
    }
}

TEST_CASE("equal-eps members commute, distinct-eps on P3 do not") {
    Rng rng(9);
    for (int t = 0; t < 20; ++t) {
        Graph g = random_connected_graph(rng, 3, 8, false);
        FamilySpec spec;
        spec.entries = {{-0.2, 1}, {-0.2, 3}};
        MatrixFamily fam = build_family(g, spec);
        Matrix ab = matmul(fam.members[0].mat(), fam.members[1].mat());
        Matrix ba = matmul(fam.members[1].mat(), fam.members[0].mat());
        CHECK(frobenius_norm(sub(ab, ba)) <= 1e-9);
    }

    FamilySpec spec;
    spec.entries = {{0.0, 1}, {-0.5, 1}};
    MatrixFamily fam = build_family(p3(), spec);
    Matrix ab = matmul(fam.members[0].mat(), fam.members[1].mat());
    Matrix ba = matmul(fam.members[1].mat(), fam.members[0].mat());
    Matrix comm = sub(ab, ba);
    CHECK(frobenius_norm(comm) > 0.1);
    // the hand-derived entry: |1/sqrt6 + 1/3 - 1/2 - 1/sqrt6| = 1/6
    CHECK(std::fabs(comm(0, 1)) == doctest::Approx(1.0 / 6.0).epsilon(1e-10));
}

TEST_CASE("eps=-0.5 base spectrum stays in [-1, 1]") {
    Rng rng(13);
    for (int t = 0; t < 100; ++t) {
        Graph g = random_connected_graph(rng, 2, 12, true);
        SpectralDecomposition dec = eigendecompose(build_base(g, -0.5));
        CHECK(std::fabs(dec.lambda.front()) <= 1.0 + 1e-9);
        CHECK(std::fabs(dec.lambda.back()) <= 1.0 + 1e-9);
    }
}
