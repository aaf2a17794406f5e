// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pdf/family.hpp"
#include "pdf/verify.hpp"

using namespace pdf;

TEST_CASE("verify checks pass at default tolerances") {
    CheckResult p41 = check_filter_dichotomy(100, 1);
    CHECK(p41.failures == 0);
    CHECK(p41.pass);
    CHECK(p41.trials == 100);

    CheckResult p42 = check_norm_adj_smooths(100, 1);
    CHECK(p42.failures == 0);

    CheckResult d31 = check_mixer_closeness_equivariance(50, 2);
    CHECK(d31.failures == 0);
    CHECK(d31.trials == 50);

    CheckResult eig = check_eigenspace_sharing(4);
    CHECK(eig.failures == 0);
    CHECK(eig.note.find("P3 commutator 0.333") != std::string::npos);

    CheckResult eq = check_spectral_identities(200, 3);
    CHECK(eq.failures == 0);
    CHECK(eq.trials == 200);
}

TEST_CASE("hand examples behind the suite") {
    SUBCASE("g = 0.5 scales P3 smoothness by 0.25") {
        Graph p3{3, {{0, 1, 1.0}, {1, 2, 1.0}}, {0, 0, 0}, {}, "P3"};
        Vector f{1.0, 0.0, -1.0};
        SpectralDecomposition dec = eigendecompose(preset_operator(p3, PresetOperator::Laplacian));
        Vector fp = poly_filter_apply(PolyFilter{{0.5}}, dec, f);
        CHECK(smoothness_quadratic(p3, f) == doctest::Approx(2.0));
        CHECK(smoothness_quadratic(p3, fp) == doctest::Approx(0.5));
    }
    SUBCASE("GCN step on P2 smooths [1,0] to [0.5,0.5]") {
        Graph p2{2, {{0, 1, 1.0}}, {0, 0}, {}, "P2"};
        SymMatrix s = preset_operator(p2, PresetOperator::SymNormAdj);
        Vector fp = matvec(s.mat(), {1.0, 0.0});
        CHECK(fp[0] == doctest::Approx(0.5));
        CHECK(fp[1] == doctest::Approx(0.5));
        SymMatrix lt = preset_operator(p2, PresetOperator::NormLaplacianSelfloop);
        CHECK(dot(fp, matvec(lt.mat(), fp)) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(dot(Vector{1.0, 0.0}, matvec(lt.mat(), {1.0, 0.0})) == doctest::Approx(0.5));
    }
    SUBCASE("kernel signal keeps both sides of the smoothing inequality at zero") {
        // L-tilde annihilates Dt^{1/2} 1 (the constant vector only on regular
        // graphs); either way the smoothing inequality is non-strict equality
        Rng rng(8);
        Graph g = random_connected_graph(rng, 3, 8, true);
        SymMatrix s = preset_operator(g, PresetOperator::SymNormAdj);
        SymMatrix lt = preset_operator(g, PresetOperator::NormLaplacianSelfloop);
        Vector dt = degrees(adjacency(g), true);
        Vector kernel(g.n);
        for (int u = 0; u < g.n; ++u) kernel[u] = std::sqrt(dt[u]);
        CHECK(std::fabs(dot(kernel, matvec(lt.mat(), kernel))) <= 1e-10);
        Vector fp = matvec(s.mat(), kernel);
        CHECK(std::fabs(dot(fp, matvec(lt.mat(), fp))) <= 1e-10);

        // on a regular graph the constant vector is that kernel vector
        Graph c4{4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 0, 1.0}}, {0, 0, 0, 0}, {}, "C4"};
        SymMatrix lt4 = preset_operator(c4, PresetOperator::NormLaplacianSelfloop);
        Vector ones(4, 1.0);
        CHECK(std::fabs(dot(ones, matvec(lt4.mat(), ones))) <= 1e-12);
        Vector fp4 = matvec(preset_operator(c4, PresetOperator::SymNormAdj).mat(), ones);
        CHECK(std::fabs(dot(fp4, matvec(lt4.mat(), fp4))) <= 1e-12);
    }
}

TEST_CASE("suite aggregation, determinism and the negative control") {
    VerifyOptions opts;
    opts.seed = 1;
    opts.trials = 30;  // trimmed for unit-test speed; acceptance runs full sizes

    VerifyReport a = run_verify_suite(opts);
    CHECK(a.all_pass());
    CHECK(a.checks.size() == 5);

    std::ostringstream ta, tb;
    print_report(a, ta);
    print_report(run_verify_suite(opts), tb);
    CHECK(ta.str() == tb.str());

    VerifyOptions broken = opts;
    broken.tol_scale = 0.0;
    VerifyReport r = run_verify_suite(broken);
    CHECK_FALSE(r.all_pass());
}

TEST_CASE("degenerate trials are recorded, not failed") {
    // a filter that is zero on the whole spectrum sends every signal to zero
    Graph p2{2, {{0, 1, 1.0}}, {0, 0}, {}, "P2"};
    SpectralDecomposition dec = eigendecompose(preset_operator(p2, PresetOperator::Laplacian));
    PolyFilter zero{{0.0}};
    SymMatrix s(Matrix(2, 2, 0.0));
    CHECK_THROWS_AS(cos_to_eigvec(s, dec, zero, {1.0, 2.0}, 0), DegenerateSignalError);
}
