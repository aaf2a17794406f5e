// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pdf/graph.hpp"
#include "pdf/rng.hpp"
#include "pdf/spectral.hpp"

namespace pdf {

struct CheckResult {
    std::string name;
    int trials = 0;
    int failures = 0;
    int degenerate = 0;       // skipped trials (e.g. signal in the filter kernel)
    double worst_residual = 0.0;
    bool pass = false;        // failures == 0
    std::string note;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    bool all_pass() const;
};

struct VerifyOptions {
    uint64_t seed = 1;
    int trials = 100;
    double tol_scale = 1.0;  // scales every tolerance; 0 forces failure (negative control)
};

/// Random-instance generators used by the checks. They never touch model code,
/// so expected values stay independent of the implementation under test.
Graph random_connected_graph(Rng& rng, int n_min, int n_max, bool weighted);
Graph random_graph_with_pendant(Rng& rng, int n_min, int n_max);
Vector random_signal(Rng& rng, int n);
PolyFilter random_filter(Rng& rng, int max_degree);

/// Rescales p so max_i |p(lambda_i)| == target (< 1 smooths).
PolyFilter rescale_filter_max(const PolyFilter& p, const Vector& lambda, double target);
/// Shifts p's constant term so min_i |p(lambda_i)| >= floor (> 1 amplifies).
PolyFilter shift_filter_min(const PolyFilter& p, const Vector& lambda, double floor);

CheckResult check_filter_dichotomy(int trials, uint64_t seed, double tol_scale = 1.0);
CheckResult check_norm_adj_smooths(int trials, uint64_t seed, double tol_scale = 1.0);
CheckResult check_mixer_closeness_equivariance(int trials, uint64_t seed, double tol_scale = 1.0);
CheckResult check_eigenspace_sharing(uint64_t seed, double tol_scale = 1.0);
CheckResult check_spectral_identities(int trials, uint64_t seed, double tol_scale = 1.0);

VerifyReport run_verify_suite(const VerifyOptions& opts);

/// Fixed-format table, one row per check.
void print_report(const VerifyReport& report, std::ostream& out);

}  // namespace pdf
