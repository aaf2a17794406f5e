// SPDX-License-Identifier: Apache-2.0
#include "pdf/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "pdf/spectral.hpp"

namespace pdf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

LossKind effective_loss(const ExperimentConfig& cfg, const Dataset& ds) {
    const LossKind natural =
        ds.task.kind == TaskKind::Regression ? LossKind::Mae : LossKind::CrossEntropy;
    if (!cfg.loss_explicit) return natural;
    if (cfg.train.loss != natural)
        throw ConfigError("train.loss: '" + to_string(cfg.train.loss) + "' does not match the " +
                          (ds.task.kind == TaskKind::Regression ? "regression" : "classification") +
                          " task");
    return cfg.train.loss;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

std::string format_g6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

TrainOutputs run_train(const ExperimentConfig& cfg) {
    Dataset ds = load_dataset(cfg.dataset);
    TrainConfig tc = cfg.train;
    tc.loss = effective_loss(cfg, ds);

    fs::create_directories(cfg.output_dir);
    if (!cfg.source_text.empty())
        write_file((fs::path(cfg.output_dir) / "config.json").string(), cfg.source_text);

    TrainResult result = train(ds, cfg.model, tc);

    TrainOutputs out;
    out.n_params = param_count(result.params);
    if (result.best_epoch >= 0) {
        const EpochRecord& best = result.history.records[result.best_epoch];
        out.best_val_metric = std::isnan(best.val_metric) ? best.train_metric : best.val_metric;
        out.test_metric_at_best_val = best.test_metric;
    } else {
        out.best_val_metric = std::numeric_limits<double>::quiet_NaN();
        out.test_metric_at_best_val = std::numeric_limits<double>::quiet_NaN();
    }

    out.history_path = (fs::path(cfg.output_dir) / "history.csv").string();
    {
        std::ofstream hist(out.history_path, std::ios::binary);
        write_history_csv(result.history, hist);
    }
    out.checkpoint_path = (fs::path(cfg.output_dir) / "best.ckpt").string();
    write_file(out.checkpoint_path, checkpoint_to_json(cfg.model, result.best_params));

    json summary;
    summary["best_val_metric"] = out.best_val_metric;
    summary["test_metric_at_best_val"] = out.test_metric_at_best_val;
    summary["n_params"] = out.n_params;
    summary["best_epoch"] = result.best_epoch;
    out.summary_path = (fs::path(cfg.output_dir) / "summary.json").string();
    write_file(out.summary_path, summary.dump(2) + "\n");

    out.result = std::move(result);
    return out;
}

namespace {

FamilySpec lap_family_like(const FamilySpec& base) {
    FamilySpec lap;
    for (int k = 1; k <= base.size(); ++k) lap.entries.push_back({-0.5, k});
    lap.sparsity = base.sparsity;
    return lap;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

AblationResult run_ablate(const ExperimentConfig& cfg) {
    if (cfg.ablate.families.empty() || cfg.ablate.depths.empty() || cfg.ablate.variants.empty())
        throw ConfigError("ablate: empty variant grid");
    Dataset ds = load_dataset(cfg.dataset);
    TrainConfig base_tc = cfg.train;
    base_tc.loss = effective_loss(cfg, ds);

    fs::create_directories(cfg.output_dir);
    if (!cfg.source_text.empty())
        write_file((fs::path(cfg.output_dir) / "config.json").string(), cfg.source_text);

    AblationResult res;
    res.metric_name = ds.task.kind == TaskKind::Regression ? "MAE" : "ACC";

    std::vector<bool> sps_options = {false};
    if (cfg.ablate.sps) sps_options.push_back(true);

    int cell_index = 0;
    for (MixerVariant variant : cfg.ablate.variants) {
        for (const std::string& fam_kind : cfg.ablate.families) {
            for (MixerDepth depth : cfg.ablate.depths) {
                for (bool sps : sps_options) {
                    ModelConfig mc = cfg.model;
                    mc.variant = variant;
                    mc.depth = depth;
                    mc.family = fam_kind == "Lap" ? lap_family_like(cfg.model.family)
                                                  : cfg.model.family;
                    mc.family.sparsity =
                        sps ? Sparsity::masked(cfg.ablate.sps_hops) : Sparsity::dense();
                    std::string label = to_string(variant) + "+" + fam_kind + "+" +
                                        to_string(depth) + (sps ? "+sps" : "");

                    std::vector<double> vals, tests;
                    for (int s = 0; s < cfg.ablate.n_seeds; ++s) {
                        TrainConfig tc = base_tc;
                        tc.seed = base_tc.seed + static_cast<uint64_t>(cell_index) +
                                  1009ULL * static_cast<uint64_t>(s);
                        TrainResult r = train(ds, mc, tc);
                        if (r.history.records.empty()) {
                            vals.push_back(std::numeric_limits<double>::quiet_NaN());
                            tests.push_back(std::numeric_limits<double>::quiet_NaN());
                        } else {
                            const EpochRecord& best =
                                r.history.records[std::max(0, r.best_epoch)];
                            vals.push_back(best.val_metric);
                            tests.push_back(best.test_metric);
                        }
                        fs::path cell_dir = fs::path(cfg.output_dir) / "ablate" / label /
                                            ("seed_" + std::to_string(s));
                        fs::create_directories(cell_dir);
                        std::ofstream hist(cell_dir / "history.csv", std::ios::binary);
                        write_history_csv(r.history, hist);
                    }
                    res.rows.push_back({label, median(vals), median(tests)});
                    ++cell_index;
                }
            }
        }
    }

    res.csv_path = (fs::path(cfg.output_dir) / "ablation.csv").string();
    std::ostringstream csv;
    csv << "ablation,valid " << res.metric_name << ",test " << res.metric_name << "\n";
    for (const AblationRow& r : res.rows)
        csv << r.label << "," << format_g6(r.val_metric) << "," << format_g6(r.test_metric) << "\n";
    write_file(res.csv_path, csv.str());
    return res;
}

namespace {

BenchCell summarize(const std::vector<double>& xs) {
    BenchCell c;
    if (xs.empty()) return c;
    for (double x : xs) c.mean += x;
    c.mean /= xs.size();
    double var = 0.0;
    for (double x : xs) var += (x - c.mean) * (x - c.mean);
    c.std_dev = std::sqrt(var / xs.size());
    return c;
}

}  // namespace

BenchResult run_bench(const ExperimentConfig& cfg, int epochs) {
    if (epochs < 1) throw ConfigError("bench: epochs must be >= 1");
    Dataset ds = load_dataset(cfg.dataset);
    TrainConfig tc = cfg.train;
    tc.loss = effective_loss(cfg, ds);

    fs::create_directories(cfg.output_dir);
    if (!cfg.source_text.empty())
        write_file((fs::path(cfg.output_dir) / "config.json").string(), cfg.source_text);

    BenchResult res;
    using clock = std::chrono::steady_clock;
    auto seconds_since = [](clock::time_point t0) {
        return std::chrono::duration<double>(clock::now() - t0).count();
    };

    for (MixerVariant variant : {MixerVariant::Shd, MixerVariant::Idp}) {
        for (bool masked : {false, true}) {
            ModelConfig mc = cfg.model;
            mc.variant = variant;
            mc.family.sparsity =
                masked ? Sparsity::masked(cfg.ablate.sps_hops) : Sparsity::dense();
            BenchRow row;
            row.label = to_string(variant) + "-pdf" +
                        (masked ? "^" + std::to_string(cfg.ablate.sps_hops) + "-hop" : "");

            std::vector<MatrixFamily> fams;
            for (const Graph& g : ds.graphs) fams.push_back(build_family(g, mc.family));
            PdfModelParams params = init_params(mc, ds, tc.seed);
            AdamState state{zeros_like(params), zeros_like(params), 0};

            std::vector<double> t_train, t_ev_train, t_ev_val, t_ev_test;
            for (int epoch = 0; epoch < epochs; ++epoch) {
                Rng shuffle_rng(Rng::mix(tc.seed, 0x50FF1E + static_cast<uint64_t>(epoch)));
                std::vector<int> order = ds.splits.train;
                shuffle_rng.shuffle(order);
                const double lr = lr_at(epoch, tc);

                auto t0 = clock::now();
                for (size_t start = 0; start < order.size();
                     start += static_cast<size_t>(tc.batch_size)) {
                    const size_t end =
                        std::min(order.size(), start + static_cast<size_t>(tc.batch_size));
                    PdfModelParams grads = zeros_like(params);
                    auto acc = param_ptrs(grads);
                    for (size_t b = start; b < end; ++b) {
                        const int gi = order[b];
                        GraphGrad gg =
                            backward(ds.graphs[gi], fams[gi], mc, params, ds.targets[gi], tc.loss);
                        auto src = param_ptrs(gg.grads);
                        for (size_t k = 0; k < acc.size(); ++k) *acc[k] += *src[k];
                    }
                    const double inv = 1.0 / static_cast<double>(end - start);
                    for (double* gp : acc) *gp *= inv;
                    adam_step(params, grads, state, lr, tc.weight_decay);
                }
                t_train.push_back(seconds_since(t0));

                t0 = clock::now();
                evaluate_metric(ds, ds.splits.train, mc, params, fams);
                t_ev_train.push_back(seconds_since(t0));
                t0 = clock::now();
                evaluate_metric(ds, ds.splits.val, mc, params, fams);
                t_ev_val.push_back(seconds_since(t0));
                t0 = clock::now();
                evaluate_metric(ds, ds.splits.test, mc, params, fams);
                t_ev_test.push_back(seconds_since(t0));
            }
            row.training = summarize(t_train);
            row.eval_train = summarize(t_ev_train);
            row.eval_val = summarize(t_ev_val);
            row.eval_test = summarize(t_ev_test);
            res.rows.push_back(std::move(row));
        }
    }

    std::ostringstream table;
    char buf[256];
    std::snprintf(buf, sizeof buf, "per-epoch seconds, mean +- std over %d epochs\n", epochs);
    table << buf;
    std::snprintf(buf, sizeof buf, "%-16s %22s %22s %22s %22s\n", "model",
                  "Training (Train set)", "Eval (Train set)", "Eval (Val set)", "Eval (Test set)");
    table << buf;
    for (const BenchRow& r : res.rows) {
        auto cell = [](const BenchCell& c) {
            char b[64];
            std::snprintf(b, sizeof b, "%.4f +- %.4f", c.mean, c.std_dev);
            return std::string(b);
        };
        std::snprintf(buf, sizeof buf, "%-16s %22s %22s %22s %22s\n", r.label.c_str(),
                      cell(r.training).c_str(), cell(r.eval_train).c_str(), cell(r.eval_val).c_str(),
                      cell(r.eval_test).c_str());
        table << buf;
    }
    res.table = table.str();

    fs::create_directories(cfg.output_dir);
    write_file((fs::path(cfg.output_dir) / "bench.txt").string(), res.table);
    return res;
}

std::string run_inspect(const Dataset& ds, const std::string& family_arg,
                        const std::vector<double>& filter_coeffs) {
    PolyFilter filter{filter_coeffs};
    filter.validate();

    json out;
    out["graphs"] = json::array();
    for (int gi = 0; gi < ds.size(); ++gi) {
        const Graph& g = ds.graphs[gi];
        json jg;
        jg["name"] = g.name;
        jg["n"] = g.n;

        std::vector<std::pair<std::string, SymMatrix>> members;
        if (family_arg == "laplacian" || family_arg == "norm_laplacian_selfloop" ||
            family_arg == "sym_norm_adj") {
            PresetOperator which = family_arg == "laplacian"
                                       ? PresetOperator::Laplacian
                                       : (family_arg == "norm_laplacian_selfloop"
                                              ? PresetOperator::NormLaplacianSelfloop
                                              : PresetOperator::SymNormAdj);
            members.emplace_back(family_arg, preset_operator(g, which));
        } else {
            FamilySpec spec;
            json entries = json::parse(family_arg);
            for (const json& e : entries) spec.entries.push_back({e[0].get<double>(), e[1].get<int>()});
            MatrixFamily fam = build_family(g, spec);
            for (int i = 0; i < fam.size(); ++i) {
                char tag[48];
                std::snprintf(tag, sizeof tag, "(%g,%d)", fam.tags[i].eps, fam.tags[i].k);
                members.emplace_back(tag, fam.members[i]);
            }
        }

        jg["members"] = json::array();
        for (auto& [tag, s] : members) {
            SpectralDecomposition dec = eigendecompose(s);
            json jm;
            jm["tag"] = tag;
            jm["spectrum"] = dec.lambda;
            jm["filter_class"] = to_string(classify_filter(filter, dec.lambda));
            jg["members"].push_back(std::move(jm));
        }

        // smoothness of each feature column against the graph itself
        json smooth = json::array();
        if (g.categorical()) {
            Vector col(g.n);
            for (int u = 0; u < g.n; ++u) col[u] = g.node_labels[u];
            smooth.push_back(smoothness_quadratic(g, col));
        } else {
            for (int c = 0; c < g.node_features.cols(); ++c) {
                Vector col(g.n);
                for (int u = 0; u < g.n; ++u) col[u] = g.node_features(u, c);
                smooth.push_back(smoothness_quadratic(g, col));
            }
        }
        jg["feature_smoothness"] = std::move(smooth);
        out["graphs"].push_back(std::move(jg));
    }
    return out.dump(2);
}

int cmd_train(const std::string& config_path) {
    try {
        ExperimentConfig cfg = load_experiment_config(config_path);
        TrainOutputs out = run_train(cfg);
        std::cout << "n_params " << out.n_params << ", best_val_metric "
                  << format_g6(out.best_val_metric) << ", test_metric_at_best_val "
                  << format_g6(out.test_metric_at_best_val) << "\n"
                  << "wrote " << out.history_path << ", " << out.checkpoint_path << ", "
                  << out.summary_path << "\n";
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_ablate(const std::string& config_path) {
    try {
        ExperimentConfig cfg = load_experiment_config(config_path);
        AblationResult res = run_ablate(cfg);
        std::cout << "ablation,valid " << res.metric_name << ",test " << res.metric_name << "\n";
        for (const AblationRow& r : res.rows)
            std::cout << r.label << "," << format_g6(r.val_metric) << ","
                      << format_g6(r.test_metric) << "\n";
        std::cout << "wrote " << res.csv_path << "\n";
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_verify(uint64_t seed, int trials, double tol_scale) {
    try {
        VerifyOptions opts;
        opts.seed = seed;
        opts.trials = trials;
        opts.tol_scale = tol_scale;
        VerifyReport report = run_verify_suite(opts);
        print_report(report, std::cout);
        return report.all_pass() ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_inspect(const std::string& graph_path, const std::string& family_arg,
                const std::string& filter_arg) {
    try {
        if (!fs::exists(graph_path)) {
            std::cerr << "config error: graph file does not exist: " << graph_path << "\n";
            return 2;
        }
        Dataset ds = load_json_dataset(graph_path);
        std::vector<double> coeffs;
        std::stringstream ss(filter_arg);
        std::string tok;
        while (std::getline(ss, tok, ',')) coeffs.push_back(std::stod(tok));
        std::cout << run_inspect(ds, family_arg, coeffs) << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_bench(const std::string& config_path, int epochs) {
    try {
        ExperimentConfig cfg = load_experiment_config(config_path);
        BenchResult res = run_bench(cfg, epochs);
        std::cout << res.table;
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace pdf
