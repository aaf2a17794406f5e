// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdf/config.hpp"
#include "pdf/train.hpp"
#include "pdf/verify.hpp"

namespace pdf {

/// Outcome of a training run plus the files it wrote.
struct TrainOutputs {
    TrainResult result;
    int64_t n_params = 0;
    double best_val_metric = 0.0;
    double test_metric_at_best_val = 0.0;
    std::string history_path, checkpoint_path, summary_path;
};

/// Trains per the config and writes history.csv, best.ckpt, summary.json and a
/// verbatim copy of the config into the output directory.
TrainOutputs run_train(const ExperimentConfig& cfg);

struct AblationRow {
    std::string label;
    double val_metric = 0.0;   // median over seeds
    double test_metric = 0.0;
};

struct AblationResult {
    std::vector<AblationRow> rows;
    std::string metric_name;  // "MAE" or "ACC"
    std::string csv_path;
};

/// Runs the {Lap, eps_k} x {Lin, 1L, 2L} x {shd, idp} (x optional sps) grid and
/// writes one CSV row of valid/test metrics per cell. Cell c, seed s trains
/// with seed base + c + 1009*s.
AblationResult run_ablate(const ExperimentConfig& cfg);

struct BenchCell {
    double mean = 0.0;
    double std_dev = 0.0;
};

struct BenchRow {
    std::string label;
    BenchCell training, eval_train, eval_val, eval_test;  // seconds per epoch
};

struct BenchResult {
    std::vector<BenchRow> rows;
    std::string table;  // formatted text written to bench.txt
};

/// Per-epoch wall-clock mean +- std over `epochs` epochs for shd/idp, each
/// dense and hop-masked.
BenchResult run_bench(const ExperimentConfig& cfg, int epochs);

/// Per-graph report: spectrum of each family member, smoothness of each
/// feature column, filter classification per member.
std::string run_inspect(const Dataset& ds, const std::string& family_arg,
                        const std::vector<double>& filter_coeffs);

// CLI entry points. Exit codes: 0 success, 1 runtime/verification failure,
// 2 configuration error.
int cmd_train(const std::string& config_path);
int cmd_ablate(const std::string& config_path);
int cmd_verify(uint64_t seed, int trials, double tol_scale);
int cmd_inspect(const std::string& graph_path, const std::string& family_arg,
                const std::string& filter_arg);
int cmd_bench(const std::string& config_path, int epochs);

}  // namespace pdf
