// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdf/family.hpp"
#include "pdf/graph.hpp"
#include "pdf/matrix.hpp"
#include "pdf/rng.hpp"

namespace pdf {

enum class MixerDepth { Lin, OneLayer, TwoLayer };
enum class MixerVariant { Shd, Idp };
enum class Readout { Mean, Max, Sum };
enum class Activation { Identity, Gelu };

double act_apply(Activation a, double x);
double act_grad(Activation a, double x);

/// The positionwise map along the family axis: at each matrix position the
/// |G|-vector of member entries goes through a shared perceptron producing one
/// output channel (shd) or one per feature channel (idp).
///   Lin: y_c = sum_i coeff(i,c) x_i                      (no bias, identity act)
///   1L:  y_c = act(sum_i coeff(i,c) x_i + coeff_bias[c])
///   2L:  y_c = act(out_w.row(c) . act(hid_w x + hid_b) + out_b[c])
struct MixerParams {
    MixerDepth depth = MixerDepth::Lin;
    MixerVariant variant = MixerVariant::Shd;
    Activation act = Activation::Identity;

    Matrix coeff;       // |G| x out  (Lin, 1L)
    Vector coeff_bias;  // out        (1L only)
    Matrix hid_w;       // h x |G|    (2L)
    Vector hid_b;       // h
    Matrix out_w;       // out x h    (2L)
    Vector out_b;       // out

    int family_size() const {
        return depth == MixerDepth::TwoLayer ? hid_w.cols() : coeff.rows();
    }
    int out_channels() const {
        return depth == MixerDepth::TwoLayer ? out_w.rows() : coeff.cols();
    }
};

/// theta/Theta entries start uniform(0, 1/|G|) so the initial mixed operator is
/// a near-average of the family; 2L hidden rows likewise. Lin forces identity
/// activation.
MixerParams init_mixer(MixerDepth depth, MixerVariant variant, Activation act, int family_size,
                       int channels, int hidden, Rng& rng);

struct AffineParams {
    Matrix w;  // in x out, applied as y = x w + b on row vectors
    Vector b;
};

struct PdfLayerParams {
    AffineParams pre;   // W1: d x d
    AffineParams post;  // W2: d x d
    MixerParams mixer;
};

struct ModelConfig {
    int hidden_dim = 16;
    int num_layers = 1;
    MixerVariant variant = MixerVariant::Shd;
    MixerDepth depth = MixerDepth::Lin;
    int mixer_hidden = 0;  // 2L hidden width; 0 means |family|
    FamilySpec family;
    Readout readout = Readout::Mean;
    double dropout = 0.0;
    Activation activation = Activation::Gelu;  // sigma of the pre/post transforms

    Activation mixer_activation() const {
        return depth == MixerDepth::Lin ? Activation::Identity : activation;
    }
    void validate() const;
};

struct PdfModelParams {
    Matrix embedding;         // num_labels x d (categorical input), else empty
    AffineParams input_proj;  // d_in x d (continuous input), else empty
    std::vector<PdfLayerParams> layers;
    AffineParams head;        // d x out_dim

    int hidden_dim() const { return head.w.rows(); }
    int out_dim() const { return head.w.cols(); }
};

/// Builds parameter shapes from the config and the dataset's feature/task
/// layout. Head width is 1 for regression, num_classes for classification.
PdfModelParams init_params(const ModelConfig& cfg, const Dataset& ds, uint64_t seed);

int64_t param_count(const PdfModelParams& p);

/// Every learnable scalar in a fixed deterministic order (same order across
/// params/grads/optimizer state).
std::vector<double*> param_ptrs(PdfModelParams& p);
std::vector<const double*> param_ptrs(const PdfModelParams& p);
PdfModelParams zeros_like(const PdfModelParams& p);

struct MixerTrace {
    Matrix pre;                // (n*n) x out, 1L preactivations
    Matrix hid_pre, hid;       // (n*n) x h, 2L hidden layer
    Matrix out_pre;            // (n*n) x out, 2L output preactivations
};

/// Applies the mixer positionwise; returns 1 (shd) or d (idp) symmetric n x n
/// operators. Masked positions (hop-restricted families) are never evaluated
/// and stay exactly zero off-mask.
std::vector<Matrix> mix_family(const MatrixFamily& fam, const MixerParams& m,
                               MixerTrace* trace = nullptr);

void mix_family_backward(const MatrixFamily& fam, const MixerParams& m, const MixerTrace& trace,
                         const std::vector<Matrix>& d_ops, MixerParams& grad);

struct LayerTrace {
    Matrix h_in, pre1, z;       // pre-transform
    std::vector<Matrix> ops;    // mixed operators
    MixerTrace mix;
    Matrix zprime, pre2, h_out; // post-transform
    Matrix drop_scale;          // 0 or 1/(1-rate) per entry; empty when unused
};

/// Z = act(H W1 + b1); Z' = mix(Z) per variant; H' = act(Z' W2 + b2);
/// dropout on H' only when a dropout_rng is supplied and rate > 0.
Matrix layer_forward(const Matrix& h, const MatrixFamily& fam, const PdfLayerParams& p,
                     Activation act, double dropout_rate, Rng* dropout_rng,
                     LayerTrace* trace = nullptr);

/// Returns dL/dH_in and accumulates parameter gradients into grad.
Matrix layer_backward(const Matrix& d_hout, const MatrixFamily& fam, const PdfLayerParams& p,
                      Activation act, const LayerTrace& trace, PdfLayerParams& grad);

struct ForwardTrace {
    Matrix h0;
    std::vector<LayerTrace> layers;
    Vector pooled;
    std::vector<int> argmax;  // winning node per dim (max readout)
    Vector output;
};

/// Embed/project features, run the layers, pool nodes, apply the head.
/// Returns the scalar prediction (size 1) or class logits. Pass a dropout_rng
/// only in training mode; eval is deterministic.
Vector model_forward(const Graph& g, const MatrixFamily& fam, const ModelConfig& cfg,
                     const PdfModelParams& params, Rng* dropout_rng,
                     ForwardTrace* trace = nullptr);

/// Reverse-mode pass consuming a training-mode trace; d_out is dL/d(output).
PdfModelParams model_backward(const Graph& g, const MatrixFamily& fam, const ModelConfig& cfg,
                              const PdfModelParams& params, const ForwardTrace& trace,
                              const Vector& d_out);

/// Versioned JSON checkpoint of the parameters plus the producing config;
/// doubles survive the round trip bit-exactly.
std::string checkpoint_to_json(const ModelConfig& cfg, const PdfModelParams& p);
void checkpoint_from_json(const std::string& text, ModelConfig& cfg, PdfModelParams& p);

std::string to_string(MixerDepth d);
std::string to_string(MixerVariant v);
std::string to_string(Readout r);
std::string to_string(Activation a);
std::string to_string(const Sparsity& s);
MixerDepth mixer_depth_from_string(const std::string& s);
MixerVariant mixer_variant_from_string(const std::string& s);
Readout readout_from_string(const std::string& s);
Activation activation_from_string(const std::string& s);
Sparsity sparsity_from_string(const std::string& s);

}  // namespace pdf
