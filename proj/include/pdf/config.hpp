// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "pdf/graph.hpp"
#include "pdf/model.hpp"
#include "pdf/train.hpp"

namespace pdf {

/// Configuration problems carry the offending field path in the message
/// ("dataset.path: ..."); the CLI maps them to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DatasetSpec {
    enum class Kind { Synth, TUDataset, Json };
    Kind kind = Kind::Synth;

    SynthKind synth_kind = SynthKind::DegreeRegression;
    int n_graphs = 8;
    int n_min = 4;
    int n_max = 8;
    uint64_t seed = 7;

    std::string dir, name;  // tudataset
    std::string path;       // json

    // split assignment for tudataset/json sources
    double train_frac = 0.6;
    double val_frac = 0.2;
    uint64_t split_seed = 1;
};

struct AblateSpec {
    std::vector<std::string> families = {"Lap", "eps_k"};
    std::vector<MixerDepth> depths = {MixerDepth::Lin, MixerDepth::OneLayer, MixerDepth::TwoLayer};
    std::vector<MixerVariant> variants = {MixerVariant::Shd, MixerVariant::Idp};
    bool sps = false;
    int sps_hops = 2;
    int n_seeds = 1;
};

struct ExperimentConfig {
    DatasetSpec dataset;
    ModelConfig model;
    TrainConfig train;
    std::string output_dir = "out";
    AblateSpec ablate;
    bool loss_explicit = false;  // false: infer mae/cross_entropy from the task
    std::string source_text;     // raw config bytes, copied into the output dir
};

ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig experiment_config_from_json_text(const std::string& text);

Dataset load_dataset(const DatasetSpec& spec);

}  // namespace pdf
