#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pathnet/autodiff.hpp"
#include "pathnet/common.hpp"
#include "pathnet/rng.hpp"
#include "pathnet/tensor.hpp"

namespace pathnet {

inline constexpr double kLayerNormEps = 1e-5;

struct ModelConfig {
    int d = 32;             // embedding width
    int heads = 4;          // attention heads
    int layers = 6;         // encoder layers per path
    double dropout = 0.1;
    int num_classes = 2;
    bool use_ffn = true;    // position-wise FFN sublayer in each encoder layer
    int fusion_layers = 1;  // depth of the cross-path fusion encoder

    // ablation switches
    bool use_path_modeling = true;  // per-path encoder; off = mean of embedded trajectory
    bool use_global_fusion = true;  // cross-path fusion; off = identity
    bool use_multihead = true;      // off = single head of width d
    bool use_temporal_pool = true;  // off = mean over time

    int effective_heads() const { return use_multihead ? heads : 1; }
    int head_dim() const { return d / effective_heads(); }

    void validate() const {
        if (d < 1) throw ConfigError("model: d must be >= 1");
        if (heads < 1) throw ConfigError("model: heads must be >= 1");
        if (d % heads != 0) {
            throw ConfigError("model: d (" + std::to_string(d) + ") must be divisible by heads (" +
                              std::to_string(heads) + ")");
        }
        if (layers < 1) throw ConfigError("model: layers must be >= 1");
        if (fusion_layers < 1) throw ConfigError("model: fusion_layers must be >= 1");
        if (num_classes < 2) throw ConfigError("model: num_classes must be >= 2");
        if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("model: dropout must be in [0,1)");
    }
};

struct LayerParams {
    Tensor wq, wk, wv, wo;          // [d x d]
    Tensor ln1_g, ln1_b;            // [d]
    Tensor ffn_w1, ffn_b1;          // [d x 4d], [4d]
    Tensor ffn_w2, ffn_b2;          // [4d x d], [d]
    Tensor ln2_g, ln2_b;            // [d]
    bool has_ffn = false;
};

// All learnable weights. Tensors present depend only on the config, so the
// parameter count is a pure function of it.
struct ModelParams {
    ModelConfig cfg;
    Tensor embed_w, embed_b;            // scalar lift to R^d
    std::vector<LayerParams> encoder;   // per-path encoder stack
    Tensor tp_w, tp_q;                  // temporal attention pooling
    std::vector<LayerParams> fusion;    // cross-path fusion stack
    Tensor ap_w, ap_u;                  // attention pooling over paths
    Tensor cls_w, cls_b;                // classifier [d x C], [C]

    static ModelParams init(const ModelConfig& cfg, uint64_t seed) {
        cfg.validate();
        Rng rng(mix_seed(seed, 0x706172616dULL));  // independent parameter stream
        ModelParams p;
        p.cfg = cfg;
        const int d = cfg.d;
        p.embed_w = Tensor::uniform({d}, -1.0, 1.0, rng);  // fan_in 1
        p.embed_b = Tensor::zeros({d});
        if (cfg.use_path_modeling) {
            p.encoder.reserve(static_cast<std::size_t>(cfg.layers));
            for (int l = 0; l < cfg.layers; ++l) p.encoder.push_back(init_layer(cfg, rng));
            if (cfg.use_temporal_pool) {
                p.tp_w = init_weight(d, d, rng);
                p.tp_q = init_weight_vec(d, rng);
            }
        }
        if (cfg.use_global_fusion) {
            p.fusion.reserve(static_cast<std::size_t>(cfg.fusion_layers));
            for (int l = 0; l < cfg.fusion_layers; ++l) p.fusion.push_back(init_layer(cfg, rng));
        }
        p.ap_w = init_weight(d, d, rng);
        p.ap_u = init_weight_vec(d, rng);
        p.cls_w = init_weight(d, cfg.num_classes, rng);
        p.cls_b = Tensor::zeros({cfg.num_classes});
        return p;
    }

    // Visits every tensor in a fixed order shared with ParamVars and the
    // checkpoint format.
    template <typename F>
    void visit(F&& f) {
        f("embed.w", embed_w);
        f("embed.b", embed_b);
        for (std::size_t l = 0; l < encoder.size(); ++l)
            visit_layer("encoder." + std::to_string(l), encoder[l], f);
        if (cfg.use_path_modeling && cfg.use_temporal_pool) {
            f("tp.w", tp_w);
            f("tp.q", tp_q);
        }
        for (std::size_t l = 0; l < fusion.size(); ++l)
            visit_layer("fusion." + std::to_string(l), fusion[l], f);
        f("ap.w", ap_w);
        f("ap.u", ap_u);
        f("cls.w", cls_w);
        f("cls.b", cls_b);
    }

    template <typename F>
    void visit(F&& f) const {
        const_cast<ModelParams*>(this)->visit(
            [&](const std::string& name, Tensor& t) { f(name, static_cast<const Tensor&>(t)); });
    }

    std::vector<Tensor*> tensors() {
        std::vector<Tensor*> out;
        visit([&](const std::string&, Tensor& t) { out.push_back(&t); });
        return out;
    }

    std::size_t param_count() const {
        std::size_t n = 0;
        visit([&](const std::string&, const Tensor& t) { n += t.numel(); });
        return n;
    }

private:
    static Tensor init_weight(int fan_in, int fan_out, Rng& rng) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        return Tensor::uniform({fan_in, fan_out}, -bound, bound, rng);
    }

    static Tensor init_weight_vec(int fan_in, Rng& rng) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        return Tensor::uniform({fan_in}, -bound, bound, rng);
    }

    static LayerParams init_layer(const ModelConfig& cfg, Rng& rng) {
        const int d = cfg.d;
        LayerParams lp;
        lp.wq = init_weight(d, d, rng);
        lp.wk = init_weight(d, d, rng);
        lp.wv = init_weight(d, d, rng);
        lp.wo = init_weight(d, d, rng);
        lp.ln1_g = Tensor::full({d}, 1.0);
        lp.ln1_b = Tensor::zeros({d});
        lp.has_ffn = cfg.use_ffn;
        if (cfg.use_ffn) {
            const int h = 4 * d;
            lp.ffn_w1 = init_weight(d, h, rng);
            lp.ffn_b1 = Tensor::zeros({h});
            lp.ffn_w2 = init_weight(h, d, rng);
            lp.ffn_b2 = Tensor::zeros({d});
            lp.ln2_g = Tensor::full({d}, 1.0);
            lp.ln2_b = Tensor::zeros({d});
        }
        return lp;
    }

    template <typename F>
    static void visit_layer(const std::string& prefix, LayerParams& lp, F&& f) {
        f(prefix + ".wq", lp.wq);
        f(prefix + ".wk", lp.wk);
        f(prefix + ".wv", lp.wv);
        f(prefix + ".wo", lp.wo);
        f(prefix + ".ln1.g", lp.ln1_g);
        f(prefix + ".ln1.b", lp.ln1_b);
        if (lp.has_ffn) {
            f(prefix + ".ffn.w1", lp.ffn_w1);
            f(prefix + ".ffn.b1", lp.ffn_b1);
            f(prefix + ".ffn.w2", lp.ffn_w2);
            f(prefix + ".ffn.b2", lp.ffn_b2);
            f(prefix + ".ln2.g", lp.ln2_g);
            f(prefix + ".ln2.b", lp.ln2_b);
        }
    }
};

struct LayerVars {
    Var wq, wk, wv, wo;
    Var ln1_g, ln1_b;
    Var ffn_w1, ffn_b1, ffn_w2, ffn_b2;
    Var ln2_g, ln2_b;
    bool has_ffn = false;
};

// Leaf Vars over a parameter set; one graph's view of the (shared, read-only)
// parameter tensors.
struct ParamVars {
    ModelConfig cfg;
    Var embed_w, embed_b;
    std::vector<LayerVars> encoder;
    Var tp_w, tp_q;
    std::vector<LayerVars> fusion;
    Var ap_w, ap_u;
    Var cls_w, cls_b;

    ParamVars() = default;

    explicit ParamVars(const ModelParams& p, bool requires_grad = true) : cfg(p.cfg) {
        embed_w = Var::leaf(p.embed_w, requires_grad);
        embed_b = Var::leaf(p.embed_b, requires_grad);
        for (const auto& lp : p.encoder) encoder.push_back(wrap_layer(lp, requires_grad));
        if (cfg.use_path_modeling && cfg.use_temporal_pool) {
            tp_w = Var::leaf(p.tp_w, requires_grad);
            tp_q = Var::leaf(p.tp_q, requires_grad);
        }
        for (const auto& lp : p.fusion) fusion.push_back(wrap_layer(lp, requires_grad));
        ap_w = Var::leaf(p.ap_w, requires_grad);
        ap_u = Var::leaf(p.ap_u, requires_grad);
        cls_w = Var::leaf(p.cls_w, requires_grad);
        cls_b = Var::leaf(p.cls_b, requires_grad);
    }

    // Rebuild the structure from leaf Vars given in ModelParams::visit order
    // (used by gradient checking, which owns the leaves).
    static ParamVars from_vars(const ModelConfig& cfg, const std::vector<Var>& vars) {
        ParamVars pv;
        pv.cfg = cfg;
        std::size_t k = 0;
        auto next = [&]() -> const Var& {
            if (k >= vars.size()) throw ContractError("ParamVars::from_vars: too few vars");
            return vars[k++];
        };
        auto read_layer = [&]() {
            LayerVars lv;
            lv.wq = next();
            lv.wk = next();
            lv.wv = next();
            lv.wo = next();
            lv.ln1_g = next();
            lv.ln1_b = next();
            lv.has_ffn = cfg.use_ffn;
            if (cfg.use_ffn) {
                lv.ffn_w1 = next();
                lv.ffn_b1 = next();
                lv.ffn_w2 = next();
                lv.ffn_b2 = next();
                lv.ln2_g = next();
                lv.ln2_b = next();
            }
            return lv;
        };
        pv.embed_w = next();
        pv.embed_b = next();
        if (cfg.use_path_modeling) {
            for (int l = 0; l < cfg.layers; ++l) pv.encoder.push_back(read_layer());
            if (cfg.use_temporal_pool) {
                pv.tp_w = next();
                pv.tp_q = next();
            }
        }
        if (cfg.use_global_fusion) {
            for (int l = 0; l < cfg.fusion_layers; ++l) pv.fusion.push_back(read_layer());
        }
        pv.ap_w = next();
        pv.ap_u = next();
        pv.cls_w = next();
        pv.cls_b = next();
        if (k != vars.size()) throw ContractError("ParamVars::from_vars: too many vars");
        return pv;
    }

    // same order as ModelParams::visit
    std::vector<Var> all() const {
        std::vector<Var> out;
        out.push_back(embed_w);
        out.push_back(embed_b);
        for (const auto& lv : encoder) push_layer(lv, out);
        if (cfg.use_path_modeling && cfg.use_temporal_pool) {
            out.push_back(tp_w);
            out.push_back(tp_q);
        }
        for (const auto& lv : fusion) push_layer(lv, out);
        out.push_back(ap_w);
        out.push_back(ap_u);
        out.push_back(cls_w);
        out.push_back(cls_b);
        return out;
    }

    // gradients aligned with ModelParams::tensors()
    std::vector<Tensor> grads() const {
        std::vector<Tensor> out;
        for (const Var& v : all()) out.push_back(v.grad());
        return out;
    }

private:
    static LayerVars wrap_layer(const LayerParams& lp, bool rg) {
        LayerVars lv;
        lv.wq = Var::leaf(lp.wq, rg);
        lv.wk = Var::leaf(lp.wk, rg);
        lv.wv = Var::leaf(lp.wv, rg);
        lv.wo = Var::leaf(lp.wo, rg);
        lv.ln1_g = Var::leaf(lp.ln1_g, rg);
        lv.ln1_b = Var::leaf(lp.ln1_b, rg);
        lv.has_ffn = lp.has_ffn;
        if (lp.has_ffn) {
            lv.ffn_w1 = Var::leaf(lp.ffn_w1, rg);
            lv.ffn_b1 = Var::leaf(lp.ffn_b1, rg);
            lv.ffn_w2 = Var::leaf(lp.ffn_w2, rg);
            lv.ffn_b2 = Var::leaf(lp.ffn_b2, rg);
            lv.ln2_g = Var::leaf(lp.ln2_g, rg);
            lv.ln2_b = Var::leaf(lp.ln2_b, rg);
        }
        return lv;
    }

    static void push_layer(const LayerVars& lv, std::vector<Var>& out) {
        out.push_back(lv.wq);
        out.push_back(lv.wk);
        out.push_back(lv.wv);
        out.push_back(lv.wo);
        out.push_back(lv.ln1_g);
        out.push_back(lv.ln1_b);
        if (lv.has_ffn) {
            out.push_back(lv.ffn_w1);
            out.push_back(lv.ffn_b1);
            out.push_back(lv.ffn_w2);
            out.push_back(lv.ffn_b2);
            out.push_back(lv.ln2_g);
            out.push_back(lv.ln2_b);
        }
    }
};

// Deterministic dropout stream: each dropout site draws the next counter
// value, so masks depend only on (seed, site order), never on thread timing.
struct DropoutState {
    uint64_t seed = 0;
    uint64_t counter = 0;
    bool active = false;

    uint64_t next() { return mix_seed(seed, counter++); }
};

// Fixed sin/cos positional table: pe[t, 2i] = sin(t / 10000^(2i/d)),
// pe[t, 2i+1] = cos(t / 10000^(2i/d)).
inline Tensor sinusoidal_positional_encoding(int timesteps, int d) {
    Tensor pe({timesteps, d});
    for (int t = 0; t < timesteps; ++t) {
        for (int i = 0; i < d; i += 2) {
            const double freq = std::pow(10000.0, -static_cast<double>(i) / d);
            pe(t, i) = std::sin(t * freq);
            if (i + 1 < d) pe(t, i + 1) = std::cos(t * freq);
        }
    }
    return pe;
}

// ---------------------------------------------------------------------------
// forward ops; all operate on B sequences of length `block_len` stacked
// row-wise into [(B*block_len) x d]

// Per-timestep embedding of path weights: x_t = w_t * e + b + pe[t].
// `weights` is flat [B*T]; the positional table repeats per block.
inline Var embed_paths(const std::vector<double>& weights, int block_len, const ParamVars& pv) {
    const int total = static_cast<int>(weights.size());
    if (block_len < 1 || total % block_len != 0) {
        throw ContractError("embed_paths: weight count " + std::to_string(total) +
                            " not divisible by T=" + std::to_string(block_len));
    }
    const int d = pv.cfg.d;
    const int blocks = total / block_len;
    Var wcol = Var::constant(Tensor({total, 1}, weights));
    Var x = matmul(wcol, reshape(pv.embed_w, {1, d}));
    x = add_rowvec(x, pv.embed_b);
    const Tensor pe = sinusoidal_positional_encoding(block_len, d);
    Tensor tiled({total, d});
    for (int b = 0; b < blocks; ++b)
        for (int t = 0; t < block_len; ++t)
            for (int j = 0; j < d; ++j) tiled(b * block_len + t, j) = pe(t, j);
    return add(x, Var::constant(std::move(tiled)));
}

inline Var embed_path(const std::vector<double>& weights, const ParamVars& pv) {
    return embed_paths(weights, static_cast<int>(weights.size()), pv);
}

inline Var multi_head_attention(const Var& x, const LayerVars& lv, const ModelConfig& cfg,
                                int block_len) {
    Var q = matmul(x, lv.wq);
    Var k = matmul(x, lv.wk);
    Var v = matmul(x, lv.wv);
    const int nheads = cfg.effective_heads();
    const int dh = cfg.d / nheads;
    const double att_scale = 1.0 / std::sqrt(static_cast<double>(dh));
    Var cat;
    if (nheads == 1) {
        cat = block_attention(q, k, v, block_len, att_scale);
    } else {
        std::vector<Var> heads;
        heads.reserve(static_cast<std::size_t>(nheads));
        for (int h = 0; h < nheads; ++h) {
            Var qh = col_slice(q, h * dh, dh);
            Var kh = col_slice(k, h * dh, dh);
            Var vh = col_slice(v, h * dh, dh);
            heads.push_back(block_attention(qh, kh, vh, block_len, att_scale));
        }
        cat = concat_cols(heads);
    }
    return matmul(cat, lv.wo);
}

// Z  = LayerNorm(X + MultiHead(X))
// Z' = LayerNorm(Z + FFN(Z))        (skipped when the FFN sublayer is off)
inline Var encoder_layer(const Var& x, const LayerVars& lv, const ModelConfig& cfg, int block_len,
                         DropoutState* drop = nullptr) {
    Var attn = multi_head_attention(x, lv, cfg, block_len);
    if (drop && drop->active && cfg.dropout > 0.0)
        attn = dropout(attn, cfg.dropout, drop->next());
    Var z = layer_norm(add(x, attn), lv.ln1_g, lv.ln1_b, kLayerNormEps);
    if (lv.has_ffn) {
        Var f = add_rowvec(matmul(z, lv.ffn_w1), lv.ffn_b1);
        f = relu(f);
        f = add_rowvec(matmul(f, lv.ffn_w2), lv.ffn_b2);
        if (drop && drop->active && cfg.dropout > 0.0)
            f = dropout(f, cfg.dropout, drop->next());
        z = layer_norm(add(z, f), lv.ln2_g, lv.ln2_b, kLayerNormEps);
    }
    return z;
}

struct PoolResult {
    Var pooled;   // [B x d]
    Var weights;  // flat [B * block_len]; undefined when mean pooling is used
};

// Attention pooling over time: beta = softmax_t(q . tanh(W z_t)),
// h = sum_t beta_t z_t. Falls back to the per-block mean when disabled.
inline PoolResult temporal_pool(const Var& z, const ParamVars& pv, int block_len) {
    if (!pv.cfg.use_temporal_pool) {
        return {block_mean_rows(z, block_len), Var()};
    }
    const int d = pv.cfg.d;
    Var scores = matmul(tanh(matmul(z, transpose(pv.tp_w))), reshape(pv.tp_q, {d, 1}));
    Var beta = block_softmax(reshape(scores, {scores.value().rows()}), block_len);
    return {block_weighted_sum(z, beta, block_len), beta};
}

// Cross-path fusion: encoder stack over the L path tokens, no positional
// encoding (paths are a set). Identity when global fusion is off.
inline Var cross_path_fuse(const Var& h, const ParamVars& pv, DropoutState* drop = nullptr) {
    if (!pv.cfg.use_global_fusion) return h;
    const int num_paths = h.value().rows();
    Var out = h;
    for (const auto& lv : pv.fusion) out = encoder_layer(out, lv, pv.cfg, num_paths, drop);
    return out;
}

struct AttentionPoolResult {
    Var pooled;   // [1 x d]
    Var weights;  // [L]
};

// alpha_l = softmax_l(u . tanh(W h_l)), z = sum_l alpha_l h_l
inline AttentionPoolResult attention_pool(const Var& h, const ParamVars& pv) {
    const int d = pv.cfg.d;
    const int num_paths = h.value().rows();
    Var scores = matmul(tanh(matmul(h, transpose(pv.ap_w))), reshape(pv.ap_u, {d, 1}));
    Var alpha = block_softmax(reshape(scores, {num_paths}), num_paths);
    return {block_weighted_sum(h, alpha, num_paths), alpha};
}

inline Var classify(const Var& z, const ParamVars& pv) {
    Var logits = add_rowvec(matmul(z, pv.cls_w), pv.cls_b);
    return softmax(logits, 1);
}

struct ForwardResult {
    Var probs;         // [1 x C]
    Var pooled;        // [1 x d] subject representation z
    Var path_weights;  // [L] attention-pool weights alpha
};

// Full composition over one subject's trajectories (all paths share T and the
// encoder parameters). `trajectories` is row-major [L x T].
inline ForwardResult forward_subject(const std::vector<std::vector<double>>& trajectories,
                                     const ParamVars& pv, DropoutState* drop = nullptr) {
    if (trajectories.empty()) throw ContractError("forward: no path trajectories");
    const int T = static_cast<int>(trajectories[0].size());
    if (T < 1) throw ContractError("forward: empty trajectory");
    std::vector<double> flat;
    flat.reserve(trajectories.size() * static_cast<std::size_t>(T));
    for (const auto& traj : trajectories) {
        if (static_cast<int>(traj.size()) != T) {
            throw ContractError("forward: mixed trajectory lengths " + std::to_string(T) +
                                " vs " + std::to_string(traj.size()));
        }
        flat.insert(flat.end(), traj.begin(), traj.end());
    }
    Var x = embed_paths(flat, T, pv);
    Var h;
    if (pv.cfg.use_path_modeling) {
        for (const auto& lv : pv.encoder) x = encoder_layer(x, lv, pv.cfg, T, drop);
        h = temporal_pool(x, pv, T).pooled;
    } else {
        h = block_mean_rows(x, T);
    }
    Var fused = cross_path_fuse(h, pv, drop);
    AttentionPoolResult ap = attention_pool(fused, pv);
    ForwardResult res;
    res.pooled = ap.pooled;
    res.path_weights = ap.weights;
    res.probs = classify(ap.pooled, pv);
    return res;
}

}  // namespace pathnet
