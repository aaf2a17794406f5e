// SPDX-License-Identifier: Apache-2.0
#include "pdf/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pdf {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* key, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(path + "." + key + ": missing required field");
    return *it;
}

template <typename T>
T get_required(const json& j, const char* key, const std::string& path) {
    try {
        return require(j, key, path).get<T>();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError(path + "." + std::string(key) + ": wrong type");
    }
}

template <typename T>
T get_optional(const json& j, const char* key, const std::string& path, T fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return get_required<T>(j, key, path);
}

DatasetSpec parse_dataset(const json& j) {
    DatasetSpec d;
    const std::string path = "dataset";
    const std::string kind = get_required<std::string>(j, "kind", path);
    if (kind == "synth") {
        d.kind = DatasetSpec::Kind::Synth;
        const std::string sk = get_required<std::string>(j, "synth_kind", path);
        if (sk == "cycle_vs_path")
            d.synth_kind = SynthKind::CycleVsPath;
        else if (sk == "degree_regression")
            d.synth_kind = SynthKind::DegreeRegression;
        else
            throw ConfigError(path + ".synth_kind: unknown kind '" + sk + "'");
        d.n_graphs = get_required<int>(j, "n_graphs", path);
        d.n_min = get_required<int>(j, "n_min", path);
        d.n_max = get_required<int>(j, "n_max", path);
        d.seed = get_optional<uint64_t>(j, "seed", path, 7);
    } else if (kind == "tudataset") {
        d.kind = DatasetSpec::Kind::TUDataset;
        d.dir = get_required<std::string>(j, "dir", path);
        d.name = get_required<std::string>(j, "name", path);
    } else if (kind == "json") {
        d.kind = DatasetSpec::Kind::Json;
        d.path = get_required<std::string>(j, "path", path);
    } else {
        throw ConfigError(path + ".kind: unknown kind '" + kind + "'");
    }
    if (j.contains("split")) {
        const json& s = j["split"];
        d.train_frac = get_optional<double>(s, "train", path + ".split", d.train_frac);
        d.val_frac = get_optional<double>(s, "val", path + ".split", d.val_frac);
        d.split_seed = get_optional<uint64_t>(s, "seed", path + ".split", d.split_seed);
    }
    return d;
}

ModelConfig parse_model(const json& j) {
    ModelConfig m;
    const std::string path = "model";
    m.hidden_dim = get_required<int>(j, "hidden_dim", path);
    m.num_layers = get_required<int>(j, "num_layers", path);
    try {
        m.variant = mixer_variant_from_string(get_required<std::string>(j, "variant", path));
        m.depth = mixer_depth_from_string(get_required<std::string>(j, "depth", path));
        m.readout = readout_from_string(get_optional<std::string>(j, "readout", path, "mean"));
        m.activation =
            activation_from_string(get_optional<std::string>(j, "activation", path, "gelu"));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    m.mixer_hidden = get_optional<int>(j, "mixer_hidden", path, 0);
    m.dropout = get_optional<double>(j, "dropout", path, 0.0);

    const json& fam = require(j, "family", path);
    const json& entries = require(fam, "entries", path + ".family");
    if (!entries.is_array()) throw ConfigError(path + ".family.entries: expected an array");
    for (const json& e : entries) {
        if (!e.is_array() || e.size() != 2)
            throw ConfigError(path + ".family.entries: each entry must be [eps, k]");
        m.family.entries.push_back({e[0].get<double>(), e[1].get<int>()});
    }
    try {
        m.family.sparsity = sparsity_from_string(
            get_optional<std::string>(fam, "sparsity", path + ".family", "dense"));
    } catch (const std::exception& e) {
        throw ConfigError(path + ".family.sparsity: " + e.what());
    }
    try {
        m.validate();
    } catch (const std::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return m;
}

TrainConfig parse_train(const json& j, bool& loss_explicit) {
    TrainConfig t;
    const std::string path = "train";
    t.batch_size = get_optional<int>(j, "batch_size", path, t.batch_size);
    t.initial_lr = get_optional<double>(j, "initial_lr", path, t.initial_lr);
    t.lr_decay_steps = get_optional<int>(j, "lr_decay_steps", path, t.lr_decay_steps);
    t.lr_decay_rate = get_optional<double>(j, "lr_decay_rate", path, t.lr_decay_rate);
    t.warmup_steps = get_optional<int>(j, "warmup_steps", path, t.warmup_steps);
    t.weight_decay = get_optional<double>(j, "weight_decay", path, t.weight_decay);
    t.max_epochs = get_required<int>(j, "max_epochs", path);
    t.seed = get_optional<uint64_t>(j, "seed", path, t.seed);
    if (j.contains("loss")) {
        loss_explicit = true;
        try {
            t.loss = loss_kind_from_string(j["loss"].get<std::string>());
        } catch (const std::exception& e) {
            throw ConfigError(path + ".loss: " + e.what());
        }
    }
    try {
        t.validate();
    } catch (const std::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return t;
}

AblateSpec parse_ablate(const json& j) {
    AblateSpec a;
    const std::string path = "ablate";
    if (j.contains("families")) a.families = j["families"].get<std::vector<std::string>>();
    for (const std::string& f : a.families)
        if (f != "Lap" && f != "eps_k")
            throw ConfigError(path + ".families: unknown family '" + f + "' (expected Lap|eps_k)");
    try {
        if (j.contains("mixers")) {
            a.depths.clear();
            for (const json& m : j["mixers"])
                a.depths.push_back(mixer_depth_from_string(m.get<std::string>()));
        }
        if (j.contains("variants")) {
            a.variants.clear();
            for (const json& v : j["variants"])
                a.variants.push_back(mixer_variant_from_string(v.get<std::string>()));
        }
    } catch (const std::exception& e) {
        throw ConfigError(path + ": " + std::string(e.what()));
    }
    a.sps = get_optional<bool>(j, "sps", path, false);
    a.sps_hops = get_optional<int>(j, "sps_hops", path, 2);
    a.n_seeds = get_optional<int>(j, "seeds", path, 1);
    if (a.n_seeds < 1) throw ConfigError(path + ".seeds: must be >= 1");
    if (a.sps_hops < 1) throw ConfigError(path + ".sps_hops: must be >= 1");
    return a;
}

}  // namespace

ExperimentConfig experiment_config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    ExperimentConfig cfg;
    cfg.source_text = text;
    cfg.dataset = parse_dataset(require(j, "dataset", "config"));
    cfg.model = parse_model(require(j, "model", "config"));
    cfg.train = parse_train(require(j, "train", "config"), cfg.loss_explicit);
    cfg.output_dir = get_optional<std::string>(j, "output_dir", "config", "out");
    if (j.contains("ablate")) cfg.ablate = parse_ablate(j["ablate"]);
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return experiment_config_from_json_text(ss.str());
}

Dataset load_dataset(const DatasetSpec& spec) {
    namespace fs = std::filesystem;
    switch (spec.kind) {
        case DatasetSpec::Kind::Synth: {
            if (spec.n_graphs < 1) throw ConfigError("dataset.n_graphs: must be >= 1");
            if (spec.n_min > spec.n_max) throw ConfigError("dataset.n_min: exceeds n_max");
            return synth_dataset(spec.synth_kind, spec.n_graphs, spec.n_min, spec.n_max, spec.seed);
        }
        case DatasetSpec::Kind::TUDataset: {
            if (!fs::exists(spec.dir))
                throw ConfigError("dataset.dir: path does not exist: " + spec.dir);
            Dataset ds = load_tudataset(spec.dir, spec.name);
            assign_random_splits(ds, spec.train_frac, spec.val_frac, spec.split_seed);
            return ds;
        }
        case DatasetSpec::Kind::Json: {
            if (!fs::exists(spec.path))
                throw ConfigError("dataset.path: file does not exist: " + spec.path);
            Dataset ds = load_json_dataset(spec.path);
            assign_random_splits(ds, spec.train_frac, spec.val_frac, spec.split_seed);
            return ds;
        }
    }
    throw ConfigError("dataset.kind: invalid");
}

}  // namespace pdf
