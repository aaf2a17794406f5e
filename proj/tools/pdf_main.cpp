// SPDX-License-Identifier: Apache-2.0
#include <string>

#include <CLI11.hpp>

#include "pdf/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"pdf - parameterized decomposition-filtering graph learning"};
    app.require_subcommand(1);

    std::string config_path;
    auto* train = app.add_subcommand("train", "train a model from a config file");
    train->add_option("config", config_path, "experiment config (JSON)")->required();

    std::string ablate_config;
    auto* ablate = app.add_subcommand("ablate", "run the variant grid and emit ablation.csv");
    ablate->add_option("config", ablate_config, "experiment config (JSON)")->required();

    uint64_t seed = 1;
    int trials = 100;
    double tol_scale = 1.0;
    auto* verify = app.add_subcommand("verify", "run the spectral/model property checks");
    verify->add_option("--seed", seed, "rng seed");
    verify->add_option("--trials", trials, "base trial count");
    verify->add_option("--tol-scale", tol_scale, "tolerance multiplier (0 forces failure)")
        ->group("");  // hidden: negative-control hook

    std::string graph_path, family_arg = "laplacian", filter_arg = "0,1";
    auto* inspect = app.add_subcommand("inspect", "spectral report for a JSON graph fixture");
    inspect->add_option("graph", graph_path, "dataset fixture (JSON)")->required();
    inspect->add_option("--family", family_arg,
                        "preset name (laplacian|norm_laplacian_selfloop|sym_norm_adj) or "
                        "[[eps,k],...] entries");
    inspect->add_option("--filter", filter_arg, "polynomial coefficients c0,c1,...");

    std::string bench_config;
    int epochs = 5;
    auto* bench = app.add_subcommand("bench", "per-epoch timing for shd/idp, dense/masked");
    bench->add_option("config", bench_config, "experiment config (JSON)")->required();
    bench->add_option("--epochs", epochs, "epochs to time");

    CLI11_PARSE(app, argc, argv);

    if (train->parsed()) return pdf::cmd_train(config_path);
    if (ablate->parsed()) return pdf::cmd_ablate(ablate_config);
    if (verify->parsed()) return pdf::cmd_verify(seed, trials, tol_scale);
    if (inspect->parsed()) return pdf::cmd_inspect(graph_path, family_arg, filter_arg);
    if (bench->parsed()) return pdf::cmd_bench(bench_config, epochs);
    return 1;
}
