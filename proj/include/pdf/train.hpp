// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pdf/model.hpp"

namespace pdf {

enum class LossKind { Mae, CrossEntropy };

std::string to_string(LossKind k);
LossKind loss_kind_from_string(const std::string& s);

struct TrainConfig {
    int batch_size = 32;
    double initial_lr = 1e-3;
    int lr_decay_steps = 50;   // epochs between decays; 0 disables decay
    double lr_decay_rate = 0.5;
    int warmup_steps = 0;      // epochs of linear warmup
    double weight_decay = 0.0;
    int max_epochs = 100;
    uint64_t seed = 1;
    LossKind loss = LossKind::Mae;

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double train_metric = 0.0;
    double val_metric = 0.0;
    double test_metric = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> records;
};

/// CSV: epoch,lr,train_loss,train_metric,val_metric,test_metric with values at
/// 6 significant digits (the determinism contract compares this byte-wise).
void write_history_csv(const TrainHistory& h, std::ostream& out);

/// mae: |pred - target|; cross_entropy: -log softmax(logits)[target].
double loss_value(const Vector& pred, double target, LossKind kind);
/// dL/d(pred); the MAE subgradient at the kink is 0.
Vector loss_grad(const Vector& pred, double target, LossKind kind);

/// Linear warmup to initial_lr over the first warmup_steps epochs, then step
/// decay: initial_lr * rate^floor((e - warmup) / decay_steps).
double lr_at(int epoch, const TrainConfig& tc);

struct AdamState {
    PdfModelParams m, v;
    int64_t t = 0;
};

/// Decoupled weight decay (param -= lr*wd*param) followed by the standard
/// bias-corrected Adam update, beta1=0.9, beta2=0.999, eps=1e-8.
void adam_step(PdfModelParams& params, const PdfModelParams& grads, AdamState& state, double lr,
               double weight_decay);

/// Forward + loss + reverse pass for one graph. Family matrices are constants:
/// gradients flow only into embedding/projection, W1/W2, mixer and head.
struct GraphGrad {
    double loss = 0.0;
    PdfModelParams grads;
};
GraphGrad backward(const Graph& g, const MatrixFamily& fam, const ModelConfig& cfg,
                   const PdfModelParams& params, double target, LossKind kind,
                   Rng* dropout_rng = nullptr);

/// MAE (regression) or accuracy (classification, argmax with lowest-index
/// ties) over the given graph indices; NaN for an empty index list.
double evaluate_metric(const Dataset& ds, const std::vector<int>& indices, const ModelConfig& cfg,
                       const PdfModelParams& params, const std::vector<MatrixFamily>& fams);

struct TrainResult {
    PdfModelParams params;       // after the final epoch
    PdfModelParams best_params;  // best validation metric, earliest epoch on ties
    int best_epoch = -1;
    TrainHistory history;
};

/// Deterministic for a fixed seed: fixed shuffle, fixed dropout stream, fixed
/// gradient accumulation order.
TrainResult train(const Dataset& ds, const ModelConfig& mc, const TrainConfig& tc);

}  // namespace pdf
