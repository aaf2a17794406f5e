// SPDX-License-Identifier: Apache-2.0
#include "pdf/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace pdf {

std::string to_string(LossKind k) {
    return k == LossKind::Mae ? "mae" : "cross_entropy";
}

LossKind loss_kind_from_string(const std::string& s) {
    if (s == "mae") return LossKind::Mae;
    if (s == "cross_entropy") return LossKind::CrossEntropy;
    throw std::invalid_argument("unknown loss '" + s + "' (expected mae|cross_entropy)");
}

void TrainConfig::validate() const {
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (initial_lr < 0) throw std::invalid_argument("TrainConfig: initial_lr must be >= 0");
    if (lr_decay_steps < 0) throw std::invalid_argument("TrainConfig: lr_decay_steps must be >= 0");
    if (!(lr_decay_rate > 0.0 && lr_decay_rate <= 1.0))
        throw std::invalid_argument("TrainConfig: lr_decay_rate must lie in (0, 1]");
    if (warmup_steps < 0) throw std::invalid_argument("TrainConfig: warmup_steps must be >= 0");
    if (weight_decay < 0) throw std::invalid_argument("TrainConfig: weight_decay must be >= 0");
    if (max_epochs < 0) throw std::invalid_argument("TrainConfig: max_epochs must be >= 0");
}

namespace {

void format_sig6(std::string& out, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    out += buf;
}

}  // namespace

void write_history_csv(const TrainHistory& h, std::ostream& out) {
    out << "epoch,lr,train_loss,train_metric,val_metric,test_metric\n";
    for (const EpochRecord& r : h.records) {
        std::string line = std::to_string(r.epoch);
        for (double v : {r.lr, r.train_loss, r.train_metric, r.val_metric, r.test_metric}) {
            line += ',';
            format_sig6(line, v);
        }
        out << line << "\n";
    }
}

double loss_value(const Vector& pred, double target, LossKind kind) {
    if (kind == LossKind::Mae) {
        if (pred.size() != 1) throw std::invalid_argument("mae loss expects a scalar prediction");
        return std::fabs(pred[0] - target);
    }
    const int c = static_cast<int>(std::llround(target));
    if (c < 0 || c >= static_cast<int>(pred.size()))
        throw std::out_of_range("cross_entropy: class id out of range");
    double mx = pred[0];
    for (double v : pred) mx = std::max(mx, v);
    double lse = 0.0;
    for (double v : pred) lse += std::exp(v - mx);
    return std::log(lse) + mx - pred[c];
}

Vector loss_grad(const Vector& pred, double target, LossKind kind) {
    if (kind == LossKind::Mae) {
        const double d = pred[0] - target;
        return {d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)};
    }
    const int c = static_cast<int>(std::llround(target));
    double mx = pred[0];
    for (double v : pred) mx = std::max(mx, v);
    double lse = 0.0;
    for (double v : pred) lse += std::exp(v - mx);
    Vector g(pred.size());
    for (size_t j = 0; j < pred.size(); ++j) g[j] = std::exp(pred[j] - mx) / lse;
    g[c] -= 1.0;
    return g;
}

double lr_at(int epoch, const TrainConfig& tc) {
    if (epoch < 0) throw std::invalid_argument("lr_at: epoch must be >= 0");
    if (epoch < tc.warmup_steps)
        return tc.initial_lr * (epoch + 1) / tc.warmup_steps;
    if (tc.lr_decay_steps == 0) return tc.initial_lr;
    const int decays = (epoch - tc.warmup_steps) / tc.lr_decay_steps;
    return tc.initial_lr * std::pow(tc.lr_decay_rate, decays);
}

void adam_step(PdfModelParams& params, const PdfModelParams& grads, AdamState& state, double lr,
               double weight_decay) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    auto p = param_ptrs(params);
    auto g = param_ptrs(grads);
    auto m = param_ptrs(state.m);
    auto v = param_ptrs(state.v);
    if (p.size() != g.size() || p.size() != m.size() || p.size() != v.size())
        throw std::invalid_argument("adam_step: state shapes do not match params");
    for (const double* gp : g)
        if (!std::isfinite(*gp)) throw std::runtime_error("adam_step: non-finite gradient");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (size_t i = 0; i < p.size(); ++i) {
        *p[i] -= lr * weight_decay * *p[i];  // decoupled decay
        *m[i] = beta1 * *m[i] + (1.0 - beta1) * *g[i];
        *v[i] = beta2 * *v[i] + (1.0 - beta2) * *g[i] * *g[i];
        const double mhat = *m[i] / bc1;
        const double vhat = *v[i] / bc2;
        *p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

GraphGrad backward(const Graph& g, const MatrixFamily& fam, const ModelConfig& cfg,
                   const PdfModelParams& params, double target, LossKind kind, Rng* dropout_rng) {
    ForwardTrace trace;
    Vector pred = model_forward(g, fam, cfg, params, dropout_rng, &trace);
    for (double v : pred)
        if (!std::isfinite(v)) throw std::runtime_error("backward: non-finite model output");
    GraphGrad out;
    out.loss = loss_value(pred, target, kind);
    Vector d_out = loss_grad(pred, target, kind);
    out.grads = model_backward(g, fam, cfg, params, trace, d_out);
    return out;
}

double evaluate_metric(const Dataset& ds, const std::vector<int>& indices, const ModelConfig& cfg,
                       const PdfModelParams& params, const std::vector<MatrixFamily>& fams) {
    if (indices.empty()) return std::numeric_limits<double>::quiet_NaN();
    double acc = 0.0;
    for (int i : indices) {
        Vector pred = model_forward(ds.graphs[i], fams[i], cfg, params, nullptr);
        if (ds.task.kind == TaskKind::Regression) {
            acc += std::fabs(pred[0] - ds.targets[i]);
        } else {
            int arg = 0;
            for (size_t j = 1; j < pred.size(); ++j)
                if (pred[j] > pred[arg]) arg = static_cast<int>(j);
            acc += (arg == ds.class_id(i)) ? 1.0 : 0.0;
        }
    }
    return acc / indices.size();
}

TrainResult train(const Dataset& ds, const ModelConfig& mc, const TrainConfig& tc) {
    mc.validate();
    tc.validate();
    ds.validate();
    if (ds.splits.train.empty()) throw std::invalid_argument("train: empty train split");

    std::vector<MatrixFamily> fams;
    fams.reserve(ds.graphs.size());
    for (const Graph& g : ds.graphs) fams.push_back(build_family(g, mc.family));

    TrainResult res;
    res.params = init_params(mc, ds, tc.seed);
    res.best_params = res.params;
    AdamState state{zeros_like(res.params), zeros_like(res.params), 0};

    const bool lower_better = ds.task.kind == TaskKind::Regression;
    double best_val = lower_better ? std::numeric_limits<double>::infinity()
                                   : -std::numeric_limits<double>::infinity();

    std::vector<int> order = ds.splits.train;
    for (int epoch = 0; epoch < tc.max_epochs; ++epoch) {
        const double lr = lr_at(epoch, tc);
        Rng shuffle_rng(Rng::mix(tc.seed, 0x50FF1E + static_cast<uint64_t>(epoch)));
        order = ds.splits.train;
        shuffle_rng.shuffle(order);
        Rng dropout_rng(Rng::mix(tc.seed, 0xD207 + static_cast<uint64_t>(epoch)));

        double epoch_loss = 0.0;
        for (size_t start = 0; start < order.size(); start += tc.batch_size) {
            const size_t end = std::min(order.size(), start + tc.batch_size);
            PdfModelParams grads = zeros_like(res.params);
            auto acc = param_ptrs(grads);
            double batch_loss = 0.0;
            for (size_t b = start; b < end; ++b) {
                const int gi = order[b];
                GraphGrad gg = backward(ds.graphs[gi], fams[gi], mc, res.params, ds.targets[gi],
                                        tc.loss, mc.dropout > 0.0 ? &dropout_rng : nullptr);
                batch_loss += gg.loss;
                auto src = param_ptrs(gg.grads);
                for (size_t k = 0; k < acc.size(); ++k) *acc[k] += *src[k];
            }
            const double inv = 1.0 / static_cast<double>(end - start);
            for (double* gp : acc) *gp *= inv;
            epoch_loss += batch_loss;
            adam_step(res.params, grads, state, lr, tc.weight_decay);
        }
        epoch_loss /= static_cast<double>(order.size());

        EpochRecord rec;
        rec.epoch = epoch;
        rec.lr = lr;
        rec.train_loss = epoch_loss;
        rec.train_metric = evaluate_metric(ds, ds.splits.train, mc, res.params, fams);
        rec.val_metric = evaluate_metric(ds, ds.splits.val, mc, res.params, fams);
        rec.test_metric = evaluate_metric(ds, ds.splits.test, mc, res.params, fams);
        res.history.records.push_back(rec);

        const double sel = std::isnan(rec.val_metric) ? rec.train_metric : rec.val_metric;
        const bool improved = lower_better ? sel < best_val : sel > best_val;
        if (improved) {
            best_val = sel;
            res.best_params = res.params;
            res.best_epoch = epoch;
        }
    }
    return res;
}

}  // namespace pdf
