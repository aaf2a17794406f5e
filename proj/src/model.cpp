// SPDX-License-Identifier: Apache-2.0
#include "pdf/model.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace pdf {

using nlohmann::json;

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
}  // namespace

double act_apply(Activation a, double x) {
    switch (a) {
        case Activation::Identity: return x;
        case Activation::Gelu: return 0.5 * x * std::erfc(-x * kInvSqrt2);
    }
    return x;
}

double act_grad(Activation a, double x) {
    switch (a) {
        case Activation::Identity: return 1.0;
        case Activation::Gelu:
            return 0.5 * std::erfc(-x * kInvSqrt2) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
    }
    return 1.0;
}

void ModelConfig::validate() const {
    if (hidden_dim < 1) throw std::invalid_argument("ModelConfig: hidden_dim must be >= 1");
    if (num_layers < 1) throw std::invalid_argument("ModelConfig: num_layers must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0))
        throw std::invalid_argument("ModelConfig: dropout must lie in [0, 1)");
    if (mixer_hidden < 0) throw std::invalid_argument("ModelConfig: mixer_hidden must be >= 0");
    family.validate();
}

MixerParams init_mixer(MixerDepth depth, MixerVariant variant, Activation act, int family_size,
                       int channels, int hidden, Rng& rng) {
    if (family_size < 1) throw std::invalid_argument("init_mixer: empty family");
    MixerParams m;
    m.depth = depth;
    m.variant = variant;
    m.act = depth == MixerDepth::Lin ? Activation::Identity : act;
    const int out = variant == MixerVariant::Shd ? 1 : channels;
    const double inv_g = 1.0 / family_size;
    switch (depth) {
        case MixerDepth::Lin:
            m.coeff = Matrix(family_size, out);
            for (size_t i = 0; i < m.coeff.size(); ++i) m.coeff.data()[i] = rng.uniform(0.0, inv_g);
            break;
        case MixerDepth::OneLayer:
            m.coeff = Matrix(family_size, out);
            for (size_t i = 0; i < m.coeff.size(); ++i) m.coeff.data()[i] = rng.uniform(0.0, inv_g);
            m.coeff_bias.assign(out, 0.0);
            break;
        case MixerDepth::TwoLayer: {
            const int h = hidden > 0 ? hidden : family_size;
            m.hid_w = Matrix(h, family_size);
            for (size_t i = 0; i < m.hid_w.size(); ++i) m.hid_w.data()[i] = rng.uniform(0.0, inv_g);
            m.hid_b.assign(h, 0.0);
            m.out_w = Matrix(out, h);
            for (size_t i = 0; i < m.out_w.size(); ++i) m.out_w.data()[i] = rng.uniform(0.0, 1.0 / h);
            m.out_b.assign(out, 0.0);
            break;
        }
    }
    return m;
}

namespace {

Matrix xavier(int in, int out, Rng& rng) {
    const double a = std::sqrt(6.0 / (in + out));
    Matrix w(in, out);
    for (size_t i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-a, a);
    return w;
}

struct FeatureLayout {
    bool categorical = false;
    int num_labels = 0;
    int d_in = 0;
};

FeatureLayout feature_layout(const Dataset& ds) {
    if (ds.graphs.empty()) throw std::invalid_argument("init_params: empty dataset");
    FeatureLayout fl;
    fl.categorical = ds.graphs.front().categorical();
    for (const Graph& g : ds.graphs) {
        if (g.categorical() != fl.categorical)
            throw std::invalid_argument("init_params: mixed categorical/continuous features");
        if (fl.categorical) {
            for (int l : g.node_labels) {
                if (l < 0) throw std::invalid_argument("init_params: negative node label");
                fl.num_labels = std::max(fl.num_labels, l + 1);
            }
        } else {
            if (fl.d_in == 0) fl.d_in = g.feature_dim();
            if (g.feature_dim() != fl.d_in)
                throw std::invalid_argument("init_params: inconsistent feature dims");
        }
    }
    return fl;
}

}  // namespace

PdfModelParams init_params(const ModelConfig& cfg, const Dataset& ds, uint64_t seed) {
    cfg.validate();
    Rng rng(Rng::mix(seed, 0x9a7a));
    const int d = cfg.hidden_dim;
    const int g_sz = cfg.family.size();
    const FeatureLayout fl = feature_layout(ds);

    PdfModelParams p;
    if (fl.categorical) {
        const double a = std::sqrt(3.0 / d);
        p.embedding = Matrix(fl.num_labels, d);
        for (size_t i = 0; i < p.embedding.size(); ++i) p.embedding.data()[i] = rng.uniform(-a, a);
    } else {
        p.input_proj.w = xavier(fl.d_in, d, rng);
        p.input_proj.b.assign(d, 0.0);
    }
    for (int l = 0; l < cfg.num_layers; ++l) {
        PdfLayerParams lp;
        lp.pre.w = xavier(d, d, rng);
        lp.pre.b.assign(d, 0.0);
        lp.mixer = init_mixer(cfg.depth, cfg.variant, cfg.mixer_activation(), g_sz, d,
                              cfg.mixer_hidden, rng);
        lp.post.w = xavier(d, d, rng);
        lp.post.b.assign(d, 0.0);
        p.layers.push_back(std::move(lp));
    }
    const int out_dim = ds.task.kind == TaskKind::Regression ? 1 : ds.task.num_classes;
    p.head.w = xavier(d, out_dim, rng);
    p.head.b.assign(out_dim, 0.0);
    return p;
}

namespace {

void collect(Matrix& m, std::vector<double*>& out) {
    for (size_t i = 0; i < m.size(); ++i) out.push_back(m.data() + i);
}
void collect(Vector& v, std::vector<double*>& out) {
    for (double& x : v) out.push_back(&x);
}
void collect(AffineParams& a, std::vector<double*>& out) {
    collect(a.w, out);
    collect(a.b, out);
}
void collect(MixerParams& m, std::vector<double*>& out) {
    collect(m.coeff, out);
    collect(m.coeff_bias, out);
    collect(m.hid_w, out);
    collect(m.hid_b, out);
    collect(m.out_w, out);
    collect(m.out_b, out);
}

}  // namespace

std::vector<double*> param_ptrs(PdfModelParams& p) {
    std::vector<double*> out;
    collect(p.embedding, out);
    collect(p.input_proj, out);
    for (PdfLayerParams& lp : p.layers) {
        collect(lp.pre, out);
        collect(lp.mixer, out);
        collect(lp.post, out);
    }
    collect(p.head, out);
    return out;
}

std::vector<const double*> param_ptrs(const PdfModelParams& p) {
    auto ptrs = param_ptrs(const_cast<PdfModelParams&>(p));
    return {ptrs.begin(), ptrs.end()};
}

int64_t param_count(const PdfModelParams& p) {
    return static_cast<int64_t>(param_ptrs(const_cast<PdfModelParams&>(p)).size());
}

PdfModelParams zeros_like(const PdfModelParams& p) {
    PdfModelParams z = p;
    for (double* x : param_ptrs(z)) *x = 0.0;
    return z;
}

std::vector<Matrix> mix_family(const MatrixFamily& fam, const MixerParams& m, MixerTrace* trace) {
    const int n = fam.n;
    const int g_sz = fam.size();
    if (m.family_size() != g_sz)
        throw std::invalid_argument("mix_family: mixer width != family size");
    const int out = m.out_channels();
    const int nn = n * n;
    std::vector<Matrix> ops(out, Matrix(n, n));

    const int h = m.depth == MixerDepth::TwoLayer ? m.hid_w.rows() : 0;
    if (trace) {
        if (m.depth == MixerDepth::OneLayer) trace->pre = Matrix(nn, out);
        if (m.depth == MixerDepth::TwoLayer) {
            trace->hid_pre = Matrix(nn, h);
            trace->hid = Matrix(nn, h);
            trace->out_pre = Matrix(nn, out);
        }
    }

    Vector x(g_sz), hid(h);
    for (int u = 0; u < n; ++u) {
        for (int v = 0; v < n; ++v) {
            if (!fam.kept(u, v)) continue;
            const int r = u * n + v;
            for (int i = 0; i < g_sz; ++i) x[i] = fam.members[i](u, v);
            switch (m.depth) {
                case MixerDepth::Lin:
                    for (int c = 0; c < out; ++c) {
                        double y = 0.0;
                        for (int i = 0; i < g_sz; ++i) y += m.coeff(i, c) * x[i];
                        ops[c](u, v) = y;
                    }
                    break;
                case MixerDepth::OneLayer:
                    for (int c = 0; c < out; ++c) {
                        double pre = m.coeff_bias[c];
                        for (int i = 0; i < g_sz; ++i) pre += m.coeff(i, c) * x[i];
                        if (trace) trace->pre(r, c) = pre;
                        ops[c](u, v) = act_apply(m.act, pre);
                    }
                    break;
                case MixerDepth::TwoLayer: {
                    for (int j = 0; j < h; ++j) {
                        double hp = m.hid_b[j];
                        for (int i = 0; i < g_sz; ++i) hp += m.hid_w(j, i) * x[i];
                        hid[j] = act_apply(m.act, hp);
                        if (trace) {
                            trace->hid_pre(r, j) = hp;
                            trace->hid(r, j) = hid[j];
                        }
                    }
                    for (int c = 0; c < out; ++c) {
                        double op = m.out_b[c];
                        for (int j = 0; j < h; ++j) op += m.out_w(c, j) * hid[j];
                        if (trace) trace->out_pre(r, c) = op;
                        ops[c](u, v) = act_apply(m.act, op);
                    }
                    break;
                }
            }
        }
    }
    return ops;
}

void mix_family_backward(const MatrixFamily& fam, const MixerParams& m, const MixerTrace& trace,
                         const std::vector<Matrix>& d_ops, MixerParams& grad) {
    const int n = fam.n;
    const int g_sz = fam.size();
    const int out = m.out_channels();
    if (static_cast<int>(d_ops.size()) != out)
        throw std::invalid_argument("mix_family_backward: channel count mismatch");
    const int h = m.depth == MixerDepth::TwoLayer ? m.hid_w.rows() : 0;

    Vector x(g_sz), dhid(h);
    for (int u = 0; u < n; ++u) {
        for (int v = 0; v < n; ++v) {
            if (!fam.kept(u, v)) continue;
            const int r = u * n + v;
            for (int i = 0; i < g_sz; ++i) x[i] = fam.members[i](u, v);
            switch (m.depth) {
                case MixerDepth::Lin:
                    for (int c = 0; c < out; ++c) {
                        const double g = d_ops[c](u, v);
                        if (g == 0.0) continue;
                        for (int i = 0; i < g_sz; ++i) grad.coeff(i, c) += g * x[i];
                    }
                    break;
                case MixerDepth::OneLayer:
                    for (int c = 0; c < out; ++c) {
                        const double g = d_ops[c](u, v) * act_grad(m.act, trace.pre(r, c));
                        if (g == 0.0) continue;
                        for (int i = 0; i < g_sz; ++i) grad.coeff(i, c) += g * x[i];
                        grad.coeff_bias[c] += g;
                    }
                    break;
                case MixerDepth::TwoLayer: {
                    std::fill(dhid.begin(), dhid.end(), 0.0);
                    for (int c = 0; c < out; ++c) {
                        const double go = d_ops[c](u, v) * act_grad(m.act, trace.out_pre(r, c));
                        if (go == 0.0) continue;
                        for (int j = 0; j < h; ++j) {
                            grad.out_w(c, j) += go * trace.hid(r, j);
                            dhid[j] += go * m.out_w(c, j);
                        }
                        grad.out_b[c] += go;
                    }
                    for (int j = 0; j < h; ++j) {
                        const double dj = dhid[j] * act_grad(m.act, trace.hid_pre(r, j));
                        if (dj == 0.0) continue;
                        for (int i = 0; i < g_sz; ++i) grad.hid_w(j, i) += dj * x[i];
                        grad.hid_b[j] += dj;
                    }
                    break;
                }
            }
        }
    }
}

namespace {

Matrix affine_forward(const Matrix& x, const AffineParams& a) {
    Matrix y = matmul(x, a.w);
    for (int r = 0; r < y.rows(); ++r)
        for (int c = 0; c < y.cols(); ++c) y(r, c) += a.b[c];
    return y;
}

// Returns dX; accumulates dW = X^T dY and db = colsum(dY).
Matrix affine_backward(const Matrix& x, const AffineParams& a, const Matrix& d_y,
                       AffineParams& grad) {
    for (int i = 0; i < a.w.rows(); ++i)
        for (int r = 0; r < x.rows(); ++r) {
            const double xri = x(r, i);
            if (xri == 0.0) continue;
            for (int j = 0; j < a.w.cols(); ++j) grad.w(i, j) += xri * d_y(r, j);
        }
    for (int r = 0; r < d_y.rows(); ++r)
        for (int j = 0; j < d_y.cols(); ++j) grad.b[j] += d_y(r, j);
    return matmul(d_y, transpose(a.w));
}

Matrix apply_act(const Matrix& pre, Activation act) {
    Matrix y = pre;
    if (act != Activation::Identity)
        for (size_t i = 0; i < y.size(); ++i) y.data()[i] = act_apply(act, y.data()[i]);
    return y;
}

Matrix act_backward(const Matrix& d_y, const Matrix& pre, Activation act) {
    Matrix d = d_y;
    if (act != Activation::Identity)
        for (size_t i = 0; i < d.size(); ++i) d.data()[i] *= act_grad(act, pre.data()[i]);
    return d;
}

}  // namespace

Matrix layer_forward(const Matrix& h, const MatrixFamily& fam, const PdfLayerParams& p,
                     Activation act, double dropout_rate, Rng* dropout_rng, LayerTrace* trace) {
    const int d = h.cols();
    Matrix pre1 = affine_forward(h, p.pre);
    Matrix z = apply_act(pre1, act);

    std::vector<Matrix> ops = mix_family(fam, p.mixer, trace ? &trace->mix : nullptr);
    Matrix zprime;
    if (p.mixer.variant == MixerVariant::Shd) {
        zprime = matmul(ops[0], z);
    } else {
        if (static_cast<int>(ops.size()) != d)
            throw std::invalid_argument("layer_forward: idp mixer channels != hidden dim");
        zprime = Matrix(h.rows(), d);
        for (int c = 0; c < d; ++c)
            for (int u = 0; u < h.rows(); ++u) {
                double s = 0.0;
                for (int v = 0; v < h.rows(); ++v) s += ops[c](u, v) * z(v, c);
                zprime(u, c) = s;
            }
    }

    Matrix pre2 = affine_forward(zprime, p.post);
    Matrix h_out = apply_act(pre2, act);

    Matrix drop_scale;
    if (dropout_rng != nullptr && dropout_rate > 0.0) {
        const double keep_scale = 1.0 / (1.0 - dropout_rate);
        drop_scale = Matrix(h_out.rows(), h_out.cols());
        for (int r = 0; r < h_out.rows(); ++r)
            for (int c = 0; c < h_out.cols(); ++c) {
                const double s = dropout_rng->uniform() < dropout_rate ? 0.0 : keep_scale;
                drop_scale(r, c) = s;
                h_out(r, c) *= s;
            }
    }

    if (trace) {
        trace->h_in = h;
        trace->pre1 = std::move(pre1);
        trace->z = std::move(z);
        trace->ops = std::move(ops);
        trace->pre2 = std::move(pre2);
        trace->zprime = std::move(zprime);
        trace->drop_scale = std::move(drop_scale);
        trace->h_out = h_out;
    }
    return h_out;
}

Matrix layer_backward(const Matrix& d_hout, const MatrixFamily& fam, const PdfLayerParams& p,
                      Activation act, const LayerTrace& trace, PdfLayerParams& grad) {
    Matrix d = d_hout;
    if (!trace.drop_scale.empty())
        for (size_t i = 0; i < d.size(); ++i) d.data()[i] *= trace.drop_scale.data()[i];

    Matrix d_pre2 = act_backward(d, trace.pre2, act);
    Matrix d_zprime = affine_backward(trace.zprime, p.post, d_pre2, grad.post);

    const int n = trace.z.rows();
    const int dch = trace.z.cols();
    Matrix d_z(n, dch);
    std::vector<Matrix> d_ops;
    if (p.mixer.variant == MixerVariant::Shd) {
        // zprime = M z  =>  dM = d_zprime z^T, dz = M^T d_zprime
        d_ops.emplace_back(n, n);
        Matrix& dm = d_ops[0];
        for (int u = 0; u < n; ++u)
            for (int v = 0; v < n; ++v) {
                double s = 0.0;
                for (int c = 0; c < dch; ++c) s += d_zprime(u, c) * trace.z(v, c);
                dm(u, v) = s;
            }
        const Matrix& m = trace.ops[0];
        for (int v = 0; v < n; ++v)
            for (int c = 0; c < dch; ++c) {
                double s = 0.0;
                for (int u = 0; u < n; ++u) s += m(u, v) * d_zprime(u, c);
                d_z(v, c) = s;
            }
    } else {
        d_ops.assign(dch, Matrix(n, n));
        for (int c = 0; c < dch; ++c) {
            const Matrix& m = trace.ops[c];
            for (int u = 0; u < n; ++u)
                for (int v = 0; v < n; ++v) d_ops[c](u, v) = d_zprime(u, c) * trace.z(v, c);
            for (int v = 0; v < n; ++v) {
                double s = 0.0;
                for (int u = 0; u < n; ++u) s += m(u, v) * d_zprime(u, c);
                d_z(v, c) = s;
            }
        }
    }
    mix_family_backward(fam, p.mixer, trace.mix, d_ops, grad.mixer);

    Matrix d_pre1 = act_backward(d_z, trace.pre1, act);
    return affine_backward(trace.h_in, p.pre, d_pre1, grad.pre);
}

namespace {

Matrix embed_features(const Graph& g, const PdfModelParams& params) {
    if (g.categorical()) {
        if (params.embedding.empty())
            throw std::invalid_argument("model_forward: categorical graph but no embedding table");
        const int d = params.embedding.cols();
        Matrix h0(g.n, d);
        for (int u = 0; u < g.n; ++u) {
            const int l = g.node_labels[u];
            if (l < 0 || l >= params.embedding.rows())
                throw std::out_of_range("model_forward: node label outside embedding table");
            for (int c = 0; c < d; ++c) h0(u, c) = params.embedding(l, c);
        }
        return h0;
    }
    if (params.input_proj.w.empty())
        throw std::invalid_argument("model_forward: continuous graph but no input projection");
    return affine_forward(g.node_features, params.input_proj);
}

}  // namespace

Vector model_forward(const Graph& g, const MatrixFamily& fam, const ModelConfig& cfg,
                     const PdfModelParams& params, Rng* dropout_rng, ForwardTrace* trace) {
    if (fam.n != g.n) throw std::invalid_argument("model_forward: family built for another graph");
    Matrix h = embed_features(g, params);
    if (trace) {
        trace->h0 = h;
        trace->layers.resize(params.layers.size());
    }
    for (size_t l = 0; l < params.layers.size(); ++l) {
        h = layer_forward(h, fam, params.layers[l], cfg.activation, cfg.dropout, dropout_rng,
                          trace ? &trace->layers[l] : nullptr);
        for (size_t i = 0; i < h.size(); ++i)
            if (!std::isfinite(h.data()[i]))
                throw std::runtime_error("model_forward: non-finite activation in layer " +
                                         std::to_string(l));
    }

    const int d = h.cols();
    Vector pooled(d, 0.0);
    std::vector<int> argmax(cfg.readout == Readout::Max ? d : 0, 0);
    switch (cfg.readout) {
        case Readout::Mean:
            for (int u = 0; u < h.rows(); ++u)
                for (int c = 0; c < d; ++c) pooled[c] += h(u, c);
            for (int c = 0; c < d; ++c) pooled[c] /= h.rows();
            break;
        case Readout::Sum:
            for (int u = 0; u < h.rows(); ++u)
                for (int c = 0; c < d; ++c) pooled[c] += h(u, c);
            break;
        case Readout::Max:
            for (int c = 0; c < d; ++c) {
                int arg = 0;
                double best = h(0, c);
                for (int u = 1; u < h.rows(); ++u)
                    if (h(u, c) > best) {  // strict: ties resolve to the lowest node index
                        best = h(u, c);
                        arg = u;
                    }
                pooled[c] = best;
                argmax[c] = arg;
            }
            break;
    }

    Vector out = matvec_transposed(params.head.w, pooled);
    for (size_t j = 0; j < out.size(); ++j) out[j] += params.head.b[j];
    if (trace) {
        trace->pooled = pooled;
        trace->argmax = std::move(argmax);
        trace->output = out;
    }
    return out;
}

PdfModelParams model_backward(const Graph& g, const MatrixFamily& fam, const ModelConfig& cfg,
                              const PdfModelParams& params, const ForwardTrace& trace,
                              const Vector& d_out) {
    PdfModelParams grad = zeros_like(params);
    const int d = params.hidden_dim();

    for (int i = 0; i < d; ++i)
        for (size_t j = 0; j < d_out.size(); ++j)
            grad.head.w(i, static_cast<int>(j)) += trace.pooled[i] * d_out[j];
    for (size_t j = 0; j < d_out.size(); ++j) grad.head.b[j] += d_out[j];
    Vector d_pooled = matvec(params.head.w, d_out);

    const int n = g.n;
    Matrix d_h(n, d);
    switch (cfg.readout) {
        case Readout::Mean:
            for (int u = 0; u < n; ++u)
                for (int c = 0; c < d; ++c) d_h(u, c) = d_pooled[c] / n;
            break;
        case Readout::Sum:
            for (int u = 0; u < n; ++u)
                for (int c = 0; c < d; ++c) d_h(u, c) = d_pooled[c];
            break;
        case Readout::Max:
            for (int c = 0; c < d; ++c) d_h(trace.argmax[c], c) = d_pooled[c];
            break;
    }

    for (int l = static_cast<int>(params.layers.size()) - 1; l >= 0; --l)
        d_h = layer_backward(d_h, fam, params.layers[l], cfg.activation, trace.layers[l],
                             grad.layers[l]);

    if (g.categorical()) {
        for (int u = 0; u < n; ++u)
            for (int c = 0; c < d; ++c) grad.embedding(g.node_labels[u], c) += d_h(u, c);
    } else {
        affine_backward(g.node_features, params.input_proj, d_h, grad.input_proj);
    }
    return grad;
}

// ---------------------------------------------------------------------------
// enum + checkpoint serialization
// ---------------------------------------------------------------------------

std::string to_string(MixerDepth d) {
    switch (d) {
        case MixerDepth::Lin: return "Lin";
        case MixerDepth::OneLayer: return "1L";
        case MixerDepth::TwoLayer: return "2L";
    }
    return "?";
}

MixerDepth mixer_depth_from_string(const std::string& s) {
    if (s == "Lin" || s == "lin") return MixerDepth::Lin;
    if (s == "1L" || s == "1l") return MixerDepth::OneLayer;
    if (s == "2L" || s == "2l") return MixerDepth::TwoLayer;
    throw std::invalid_argument("unknown mixer depth '" + s + "' (expected Lin|1L|2L)");
}

std::string to_string(MixerVariant v) {
    return v == MixerVariant::Shd ? "shd" : "idp";
}

MixerVariant mixer_variant_from_string(const std::string& s) {
    if (s == "shd") return MixerVariant::Shd;
    if (s == "idp") return MixerVariant::Idp;
    throw std::invalid_argument("unknown mixer variant '" + s + "' (expected shd|idp)");
}

std::string to_string(Readout r) {
    switch (r) {
        case Readout::Mean: return "mean";
        case Readout::Max: return "max";
        case Readout::Sum: return "sum";
    }
    return "?";
}

Readout readout_from_string(const std::string& s) {
    if (s == "mean") return Readout::Mean;
    if (s == "max") return Readout::Max;
    if (s == "sum") return Readout::Sum;
    throw std::invalid_argument("unknown readout '" + s + "' (expected mean|max|sum)");
}

std::string to_string(Activation a) {
    return a == Activation::Gelu ? "gelu" : "identity";
}

Activation activation_from_string(const std::string& s) {
    if (s == "gelu") return Activation::Gelu;
    if (s == "identity") return Activation::Identity;
    throw std::invalid_argument("unknown activation '" + s + "' (expected gelu|identity)");
}

std::string to_string(const Sparsity& s) {
    return s.hop_masked ? "hop_masked:" + std::to_string(s.hops) : "dense";
}

Sparsity sparsity_from_string(const std::string& s) {
    if (s == "dense") return Sparsity::dense();
    const std::string prefix = "hop_masked:";
    if (s.rfind(prefix, 0) == 0) return Sparsity::masked(std::stoi(s.substr(prefix.size())));
    throw std::invalid_argument("unknown sparsity '" + s + "' (expected dense|hop_masked:<h>)");
}

namespace {

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    j["values"] = std::move(rows);
    return j;
}

Matrix matrix_from_json(const json& j) {
    Matrix m(j.at("rows").get<int>(), j.at("cols").get<int>());
    const json& rows = j.at("values");
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c].get<double>();
    return m;
}

json affine_to_json(const AffineParams& a) {
    return json{{"w", matrix_to_json(a.w)}, {"b", a.b}};
}

AffineParams affine_from_json(const json& j) {
    return {matrix_from_json(j.at("w")), j.at("b").get<Vector>()};
}

json mixer_to_json(const MixerParams& m) {
    json j;
    j["depth"] = to_string(m.depth);
    j["variant"] = to_string(m.variant);
    j["act"] = to_string(m.act);
    j["coeff"] = matrix_to_json(m.coeff);
    j["coeff_bias"] = m.coeff_bias;
    j["hid_w"] = matrix_to_json(m.hid_w);
    j["hid_b"] = m.hid_b;
    j["out_w"] = matrix_to_json(m.out_w);
    j["out_b"] = m.out_b;
    return j;
}

MixerParams mixer_from_json(const json& j) {
    MixerParams m;
    m.depth = mixer_depth_from_string(j.at("depth").get<std::string>());
    m.variant = mixer_variant_from_string(j.at("variant").get<std::string>());
    m.act = activation_from_string(j.at("act").get<std::string>());
    m.coeff = matrix_from_json(j.at("coeff"));
    m.coeff_bias = j.at("coeff_bias").get<Vector>();
    m.hid_w = matrix_from_json(j.at("hid_w"));
    m.hid_b = j.at("hid_b").get<Vector>();
    m.out_w = matrix_from_json(j.at("out_w"));
    m.out_b = j.at("out_b").get<Vector>();
    return m;
}

json model_config_to_json(const ModelConfig& cfg) {
    json fam = json::array();
    for (const FamilyEntry& e : cfg.family.entries) fam.push_back({e.eps, e.k});
    json j;
    j["hidden_dim"] = cfg.hidden_dim;
    j["num_layers"] = cfg.num_layers;
    j["variant"] = to_string(cfg.variant);
    j["depth"] = to_string(cfg.depth);
    j["mixer_hidden"] = cfg.mixer_hidden;
    j["family"] = {{"entries", std::move(fam)}, {"sparsity", to_string(cfg.family.sparsity)}};
    j["readout"] = to_string(cfg.readout);
    j["dropout"] = cfg.dropout;
    j["activation"] = to_string(cfg.activation);
    return j;
}

ModelConfig model_config_from_json(const json& j) {
    ModelConfig cfg;
    cfg.hidden_dim = j.at("hidden_dim").get<int>();
    cfg.num_layers = j.at("num_layers").get<int>();
    cfg.variant = mixer_variant_from_string(j.at("variant").get<std::string>());
    cfg.depth = mixer_depth_from_string(j.at("depth").get<std::string>());
    cfg.mixer_hidden = j.at("mixer_hidden").get<int>();
    for (const json& je : j.at("family").at("entries"))
        cfg.family.entries.push_back({je[0].get<double>(), je[1].get<int>()});
    cfg.family.sparsity = sparsity_from_string(j.at("family").at("sparsity").get<std::string>());
    cfg.readout = readout_from_string(j.at("readout").get<std::string>());
    cfg.dropout = j.at("dropout").get<double>();
    cfg.activation = activation_from_string(j.at("activation").get<std::string>());
    return cfg;
}

}  // namespace

std::string checkpoint_to_json(const ModelConfig& cfg, const PdfModelParams& p) {
    json j;
    j["version"] = 1;
    j["model_config"] = model_config_to_json(cfg);
    json jp;
    jp["embedding"] = matrix_to_json(p.embedding);
    jp["input_proj"] = affine_to_json(p.input_proj);
    json layers = json::array();
    for (const PdfLayerParams& lp : p.layers)
        layers.push_back(json{{"pre", affine_to_json(lp.pre)},
                              {"mixer", mixer_to_json(lp.mixer)},
                              {"post", affine_to_json(lp.post)}});
    jp["layers"] = std::move(layers);
    jp["head"] = affine_to_json(p.head);
    j["params"] = std::move(jp);
    return j.dump(2);
}

void checkpoint_from_json(const std::string& text, ModelConfig& cfg, PdfModelParams& p) {
    json j = json::parse(text);
    if (j.at("version").get<int>() != 1)
        throw std::runtime_error("checkpoint: unsupported version");
    cfg = model_config_from_json(j.at("model_config"));
    const json& jp = j.at("params");
    p = PdfModelParams{};
    p.embedding = matrix_from_json(jp.at("embedding"));
    p.input_proj = affine_from_json(jp.at("input_proj"));
    for (const json& jl : jp.at("layers")) {
        PdfLayerParams lp;
        lp.pre = affine_from_json(jl.at("pre"));
        lp.mixer = mixer_from_json(jl.at("mixer"));
        lp.post = affine_from_json(jl.at("post"));
        p.layers.push_back(std::move(lp));
    }
    p.head = affine_from_json(jp.at("head"));
}

}  // namespace pdf
