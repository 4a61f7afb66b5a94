#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sfnet/layers.hpp"
#include "sfnet/tensor.hpp"

namespace sfnet {

enum class FusionKind { ConEmb, Gated };

inline const char* to_string(FusionKind k) { return k == FusionKind::ConEmb ? "conemb" : "gated"; }

inline FusionKind fusion_from_string(const std::string& s) {
    if (s == "conemb") return FusionKind::ConEmb;
    if (s == "gated") return FusionKind::Gated;
    throw std::invalid_argument("unknown fusion kind: " + s);
}

/// Declarative architecture description. Both networks share a pair of
/// architecturally symmetric conv branches (one conv+ReLU+pool stage per
/// entry of conv_widths; the branches differ only in input channels, 3 for
/// RGB vs 1 for depth). The head depends on the fusion kind:
///   ConEmb: flatten both branches, concatenate (RGB first, depth second),
///           then FC chain fc_widths -> 1, ReLU after every hidden FC.
///   Gated:  per-branch embedding FCs of width embed_dim (+ReLU),
///           concatenate, FC gate_hidden (+ReLU), FC-2 producing the two
///           scalar gates (no activation), gated multiply-and-sum of the
///           embeddings, then FC chain post_widths -> 1 (+ReLU on hidden).
struct ModelConfig {
    FusionKind fusion = FusionKind::ConEmb;
    int64_t image_size = 240;
    std::vector<int64_t> conv_widths;
    std::vector<int64_t> fc_widths;    // ConEmb head
    int64_t embed_dim = 0;             // Gated head
    int64_t gate_hidden = 0;
    std::vector<int64_t> post_widths;
    std::string profile;

    int64_t stages() const { return static_cast<int64_t>(conv_widths.size()); }

    int64_t spatial_out() const { return image_size >> stages(); }

    int64_t flatten_per_branch() const {
        return spatial_out() * spatial_out() * conv_widths.back();
    }

    void validate() const {
        if (conv_widths.empty()) throw std::invalid_argument("config: conv_widths empty");
        if (image_size % (int64_t(1) << stages()) != 0)
            throw std::invalid_argument("config: image_size not divisible by 2^stages");
        if (spatial_out() < 1) throw std::invalid_argument("config: too many conv stages");
        for (int64_t w : conv_widths)
            if (w < 1) throw std::invalid_argument("config: conv width must be >= 1");
        if (fusion == FusionKind::ConEmb) {
            if (fc_widths.empty()) throw std::invalid_argument("config: fc_widths empty");
        } else {
            if (embed_dim < 1 || gate_hidden < 1 || post_widths.empty())
                throw std::invalid_argument("config: incomplete gated head");
        }
    }

    static ModelConfig paper_conemb() {
        ModelConfig c;
        c.fusion = FusionKind::ConEmb;
        c.image_size = 240;
        c.conv_widths = {16, 32, 64, 64};
        c.fc_widths = {2880, 288, 32};
        c.profile = "paper-conemb";
        return c;
    }

    static ModelConfig paper_gated() {
        ModelConfig c;
        c.fusion = FusionKind::Gated;
        c.image_size = 240;
        c.conv_widths = {16, 32, 32, 32};
        c.embed_dim = 1440;
        c.gate_hidden = 64;
        c.post_widths = {720, 32};
        c.profile = "paper-gated";
        return c;
    }

    static ModelConfig tiny_conemb() {
        ModelConfig c;
        c.fusion = FusionKind::ConEmb;
        c.image_size = 48;
        c.conv_widths = {4, 8, 8, 8};
        c.fc_widths = {64, 32, 16};
        c.profile = "tiny-conemb";
        return c;
    }

    static ModelConfig tiny_gated() {
        ModelConfig c;
        c.fusion = FusionKind::Gated;
        c.image_size = 48;
        c.conv_widths = {4, 8, 8, 8};
        c.embed_dim = 32;
        c.gate_hidden = 16;
        c.post_widths = {16, 8};
        c.profile = "tiny-gated";
        return c;
    }

    /// Profile lookup by the names used in CLI flags and config files.
    static ModelConfig by_name(const std::string& profile_name) {
        if (profile_name == "paper-conemb") return paper_conemb();
        if (profile_name == "paper-gated") return paper_gated();
        if (profile_name == "tiny-conemb") return tiny_conemb();
        if (profile_name == "tiny-gated") return tiny_gated();
        throw std::invalid_argument("unknown profile: " + profile_name);
    }
};

/// Per-sample scalar gate weights of the gated network, plus their batch
/// means as logged during training.
struct GateRecord {
    std::vector<double> w_rgb;
    std::vector<double> w_depth;
    double mean_rgb = 0.0;
    double mean_depth = 0.0;
};

template <typename T>
struct NamedParam {
    std::string name;
    TensorT<T>* tensor;
};

template <typename T>
struct FusionModel {
    ModelConfig config;
    std::vector<Conv2d<T>> rgb_branch;
    std::vector<Conv2d<T>> depth_branch;
    // ConEmb head: hidden FCs then the 1-wide output FC, all in `head`.
    std::vector<Fc<T>> head;
    // Gated head.
    Fc<T> embed_rgb, embed_depth;
    Fc<T> gate_fc1, gate_fc2;
    std::vector<Fc<T>> post;

    /// Registry of every learnable tensor, in a fixed documented order:
    /// rgb branch convs, depth branch convs, then the head in forward
    /// order. Checkpoints, optimizer state and gradient sets all follow
    /// this order.
    std::vector<NamedParam<T>> parameters() {
        std::vector<NamedParam<T>> ps;
        auto add_conv = [&](const std::string& prefix, std::vector<Conv2d<T>>& branch) {
            for (size_t i = 0; i < branch.size(); ++i) {
                ps.push_back({prefix + ".conv" + std::to_string(i) + ".weight", &branch[i].weight});
                ps.push_back({prefix + ".conv" + std::to_string(i) + ".bias", &branch[i].bias});
            }
        };
        auto add_fc = [&](const std::string& name, Fc<T>& fc) {
            ps.push_back({name + ".weight", &fc.weight});
            ps.push_back({name + ".bias", &fc.bias});
        };
        add_conv("rgb", rgb_branch);
        add_conv("depth", depth_branch);
        if (config.fusion == FusionKind::ConEmb) {
            for (size_t i = 0; i < head.size(); ++i) add_fc("head.fc" + std::to_string(i), head[i]);
        } else {
            add_fc("embed_rgb", embed_rgb);
            add_fc("embed_depth", embed_depth);
            add_fc("gate.fc0", gate_fc1);
            add_fc("gate.fc1", gate_fc2);
            for (size_t i = 0; i < post.size(); ++i) add_fc("post.fc" + std::to_string(i), post[i]);
        }
        return ps;
    }
};

/// Allocates every layer of the configured architecture with zeroed
/// parameters (checkpoint loading fills them in).
template <typename T>
FusionModel<T> build_model_structure(const ModelConfig& config) {
    config.validate();
    FusionModel<T> m;
    m.config = config;
    auto build_branch = [&](int64_t in_channels) {
        std::vector<Conv2d<T>> branch;
        int64_t ci = in_channels;
        for (int64_t co : config.conv_widths) {
            branch.emplace_back(co, ci);
            ci = co;
        }
        return branch;
    };
    m.rgb_branch = build_branch(3);
    m.depth_branch = build_branch(1);

    const int64_t flat = config.flatten_per_branch();
    if (config.fusion == FusionKind::ConEmb) {
        int64_t di = 2 * flat;
        for (int64_t w : config.fc_widths) {
            m.head.emplace_back(w, di);
            di = w;
        }
        m.head.emplace_back(1, di);
    } else {
        m.embed_rgb = Fc<T>(config.embed_dim, flat);
        m.embed_depth = Fc<T>(config.embed_dim, flat);
        m.gate_fc1 = Fc<T>(config.gate_hidden, 2 * config.embed_dim);
        m.gate_fc2 = Fc<T>(2, config.gate_hidden);
        int64_t di = config.embed_dim;
        for (int64_t w : config.post_widths) {
            m.post.emplace_back(w, di);
            di = w;
        }
        m.post.emplace_back(1, di);
    }
    return m;
}

/// Builds and initializes a fresh model. Hidden layers draw He-normal
/// weights, the output FC draws Xavier-uniform, biases start at zero; the
/// draw order is the parameter registry order, so a seed fully determines
/// the initialization.
template <typename T>
FusionModel<T> build_model(const ModelConfig& config, Rng& rng) {
    FusionModel<T> m = build_model_structure<T>(config);
    for (Conv2d<T>& conv : m.rgb_branch) init_conv(rng, conv);
    for (Conv2d<T>& conv : m.depth_branch) init_conv(rng, conv);
    if (config.fusion == FusionKind::ConEmb) {
        for (size_t i = 0; i + 1 < m.head.size(); ++i) init_fc_hidden(rng, m.head[i]);
        init_fc_output(rng, m.head.back());
    } else {
        init_fc_hidden(rng, m.embed_rgb);
        init_fc_hidden(rng, m.embed_depth);
        init_fc_hidden(rng, m.gate_fc1);
        init_fc_hidden(rng, m.gate_fc2);
        for (size_t i = 0; i + 1 < m.post.size(); ++i) init_fc_hidden(rng, m.post[i]);
        init_fc_output(rng, m.post.back());
    }
    return m;
}

// ---------------------------------------------------------------------------
// Forward pass with optional activation cache for the backward pass.

template <typename T>
struct BranchCache {
    std::vector<TensorT<T>> conv_in;   // input of each conv stage
    std::vector<TensorT<T>> conv_out;  // pre-ReLU conv output per stage
    std::vector<MaxPoolResult<T>> pool;
    TensorT<T> flat;                   // [N, flatten_per_branch]
};

template <typename T>
struct ForwardCache {
    BranchCache<T> rgb, depth;
    // ConEmb
    std::vector<TensorT<T>> fc_in;   // input of head FC i
    std::vector<TensorT<T>> fc_out;  // pre-ReLU output of head FC i
    // Gated
    TensorT<T> embed_rgb_pre, embed_depth_pre;  // pre-ReLU embeddings
    TensorT<T> embed_rgb_act, embed_depth_act;  // post-ReLU embeddings
    TensorT<T> fused;                           // [N, 2*embed]
    TensorT<T> gate_hidden_pre;                 // pre-ReLU FC gate_hidden
    TensorT<T> gates;                           // [N, 2]
    TensorT<T> gated;                           // [N, embed]
    std::vector<TensorT<T>> post_in, post_out;
};

template <typename T>
struct ForwardResult {
    TensorT<T> omega;  // [N, 1]
    std::optional<GateRecord> gate_record;
    ForwardCache<T> cache;
};

namespace detail {

template <typename T>
TensorT<T> branch_forward(const std::vector<Conv2d<T>>& branch, const TensorT<T>& input,
                          BranchCache<T>* cache) {
    TensorT<T> x = input;
    for (const Conv2d<T>& conv : branch) {
        TensorT<T> pre = conv2d_forward(conv, x);
        TensorT<T> act = relu_forward(pre);
        MaxPoolResult<T> pooled = maxpool2_forward(act);
        if (cache) {
            cache->conv_in.push_back(std::move(x));
            cache->conv_out.push_back(std::move(pre));
        }
        x = pooled.out;
        if (cache) cache->pool.push_back(std::move(pooled));
    }
    TensorT<T> flat = flatten_samples(x);
    if (cache) cache->flat = flat;
    return flat;
}

template <typename T>
TensorT<T> branch_backward(const std::vector<Conv2d<T>>& branch, const BranchCache<T>& cache,
                           const TensorT<T>& grad_flat, std::vector<TensorT<T>>& grad_sink) {
    // grad_sink receives {weight, bias} per stage, deepest stage last;
    // callers reorder through the parameter registry.
    const size_t stages = branch.size();
    TensorT<T> g = reshape(grad_flat, cache.pool.back().out.shape());
    std::vector<TensorT<T>> stage_grads;
    for (size_t s = stages; s-- > 0;) {
        TensorT<T> g_relu = maxpool2_backward(cache.pool[s], g);
        TensorT<T> g_conv = relu_backward(cache.conv_out[s], g_relu);
        Conv2dGrads<T> cg = conv2d_backward(branch[s], cache.conv_in[s], g_conv);
        stage_grads.push_back(std::move(cg.bias));
        stage_grads.push_back(std::move(cg.weight));
        g = std::move(cg.input);
    }
    // Reverse into forward order: stage0 weight, stage0 bias, ...
    for (size_t s = stage_grads.size(); s-- > 0;) grad_sink.push_back(std::move(stage_grads[s]));
    return g;  // gradient w.r.t. the branch input image
}

}  // namespace detail

/// Runs the configured architecture on a batch of normalized inputs.
/// rgb is [N,3,S,S], depth is [N,1,S,S] with S == config.image_size.
/// `want_cache` retains every intermediate needed by backward();
/// `record_gates` fills a GateRecord for gated models.
template <typename T>
ForwardResult<T> forward(const FusionModel<T>& model, const TensorT<T>& rgb,
                         const TensorT<T>& depth, bool want_cache = false,
                         bool record_gates = false) {
    const ModelConfig& cfg = model.config;
    detail::require(rgb.rank() == 4 && depth.rank() == 4, "forward: rank-4 inputs expected");
    detail::require(rgb.dim(0) == depth.dim(0), "forward: batch size mismatch");
    detail::require(rgb.dim(1) == 3 && depth.dim(1) == 1, "forward: channel mismatch");
    detail::require(rgb.dim(2) == cfg.image_size && rgb.dim(3) == cfg.image_size &&
                        depth.dim(2) == cfg.image_size && depth.dim(3) == cfg.image_size,
                    "forward: image size does not match model config");

    ForwardResult<T> r;
    BranchCache<T>* rc = want_cache ? &r.cache.rgb : nullptr;
    BranchCache<T>* dc = want_cache ? &r.cache.depth : nullptr;
    TensorT<T> flat_rgb = detail::branch_forward(model.rgb_branch, rgb, rc);
    TensorT<T> flat_depth = detail::branch_forward(model.depth_branch, depth, dc);
    const int64_t N = rgb.dim(0);

    if (cfg.fusion == FusionKind::ConEmb) {
        TensorT<T> x = concat_forward(flat_rgb, flat_depth);
        for (size_t i = 0; i < model.head.size(); ++i) {
            if (want_cache) r.cache.fc_in.push_back(x);
            TensorT<T> pre = fc_forward(model.head[i], x);
            if (want_cache) r.cache.fc_out.push_back(pre);
            const bool is_output = (i + 1 == model.head.size());
            x = is_output ? std::move(pre) : relu_forward(pre);
        }
        r.omega = std::move(x);
    } else {
        TensorT<T> e_rgb_pre = fc_forward(model.embed_rgb, flat_rgb);
        TensorT<T> e_depth_pre = fc_forward(model.embed_depth, flat_depth);
        TensorT<T> e_rgb = relu_forward(e_rgb_pre);
        TensorT<T> e_depth = relu_forward(e_depth_pre);
        TensorT<T> fused = concat_forward(e_rgb, e_depth);
        TensorT<T> gh_pre = fc_forward(model.gate_fc1, fused);
        TensorT<T> gh = relu_forward(gh_pre);
        TensorT<T> gates = fc_forward(model.gate_fc2, gh);  // [N,2], no activation

        const int64_t E = cfg.embed_dim;
        TensorT<T> gated({N, E});
        for (int64_t n = 0; n < N; ++n) {
            const T wr = gates(n, 0), wd = gates(n, 1);
            const T* er = e_rgb.data() + n * E;
            const T* ed = e_depth.data() + n * E;
            T* out = gated.data() + n * E;
            for (int64_t e = 0; e < E; ++e) out[e] = wr * er[e] + wd * ed[e];
        }

        if (record_gates) {
            GateRecord rec;
            double sr = 0.0, sd = 0.0;
            for (int64_t n = 0; n < N; ++n) {
                rec.w_rgb.push_back(static_cast<double>(gates(n, 0)));
                rec.w_depth.push_back(static_cast<double>(gates(n, 1)));
                sr += rec.w_rgb.back();
                sd += rec.w_depth.back();
            }
            rec.mean_rgb = sr / static_cast<double>(N);
            rec.mean_depth = sd / static_cast<double>(N);
            r.gate_record = std::move(rec);
        }

        TensorT<T> x = gated;
        for (size_t i = 0; i < model.post.size(); ++i) {
            if (want_cache) r.cache.post_in.push_back(x);
            TensorT<T> pre = fc_forward(model.post[i], x);
            if (want_cache) r.cache.post_out.push_back(pre);
            const bool is_output = (i + 1 == model.post.size());
            x = is_output ? std::move(pre) : relu_forward(pre);
        }
        r.omega = std::move(x);

        if (want_cache) {
            r.cache.embed_rgb_pre = std::move(e_rgb_pre);
            r.cache.embed_depth_pre = std::move(e_depth_pre);
            r.cache.embed_rgb_act = std::move(e_rgb);
            r.cache.embed_depth_act = std::move(e_depth);
            r.cache.fused = std::move(fused);
            r.cache.gate_hidden_pre = std::move(gh_pre);
            r.cache.gates = std::move(gates);
            r.cache.gated = std::move(gated);
        }
    }
    return r;
}

/// Gradient of a scalar loss with respect to every parameter, given
/// d(loss)/d(omega). Returned tensors align with parameters() order.
template <typename T>
std::vector<TensorT<T>> backward(const FusionModel<T>& model, const ForwardCache<T>& cache,
                                 const TensorT<T>& grad_omega) {
    const ModelConfig& cfg = model.config;
    detail::require(grad_omega.rank() == 2 && grad_omega.dim(1) == 1,
                    "backward: grad_omega must be [N,1]");
    const int64_t flat = cfg.flatten_per_branch();

    std::vector<TensorT<T>> head_grads;  // in forward order per head layer: weight, bias
    TensorT<T> grad_flat_rgb, grad_flat_depth;

    if (cfg.fusion == FusionKind::ConEmb) {
        detail::require(!cache.fc_in.empty(), "backward: stale or missing cache");
        head_grads.resize(2 * model.head.size());
        TensorT<T> g = grad_omega;
        for (size_t i = model.head.size(); i-- > 0;) {
            const bool is_output = (i + 1 == model.head.size());
            TensorT<T> g_pre = is_output ? g : relu_backward(cache.fc_out[i], g);
            FcGrads<T> fg = fc_backward(model.head[i], cache.fc_in[i], g_pre);
            head_grads[2 * i] = std::move(fg.weight);
            head_grads[2 * i + 1] = std::move(fg.bias);
            g = std::move(fg.input);
        }
        auto [gr, gd] = concat_backward(g, flat, flat);
        grad_flat_rgb = std::move(gr);
        grad_flat_depth = std::move(gd);
    } else {
        detail::require(!cache.post_in.empty(), "backward: stale or missing cache");
        const int64_t N = grad_omega.dim(0);
        const int64_t E = cfg.embed_dim;

        std::vector<TensorT<T>> post_grads(2 * model.post.size());
        TensorT<T> g = grad_omega;
        for (size_t i = model.post.size(); i-- > 0;) {
            const bool is_output = (i + 1 == model.post.size());
            TensorT<T> g_pre = is_output ? g : relu_backward(cache.post_out[i], g);
            FcGrads<T> fg = fc_backward(model.post[i], cache.post_in[i], g_pre);
            post_grads[2 * i] = std::move(fg.weight);
            post_grads[2 * i + 1] = std::move(fg.bias);
            g = std::move(fg.input);
        }
        // g is now grad w.r.t. the gated sum. Product rule:
        //   d/d(w_rgb)  = <g, E_rgb>,  d/d(E_rgb) += w_rgb * g   (and depth alike)
        TensorT<T> grad_gates({N, 2});
        TensorT<T> grad_e_rgb({N, E}), grad_e_depth({N, E});
        for (int64_t n = 0; n < N; ++n) {
            const T* gp = g.data() + n * E;
            const T* er = cache.embed_rgb_act.data() + n * E;
            const T* ed = cache.embed_depth_act.data() + n * E;
            const T wr = cache.gates(n, 0), wd = cache.gates(n, 1);
            T acc_r = T(0), acc_d = T(0);
            T* gr = grad_e_rgb.data() + n * E;
            T* gd = grad_e_depth.data() + n * E;
            for (int64_t e = 0; e < E; ++e) {
                acc_r += gp[e] * er[e];
                acc_d += gp[e] * ed[e];
                gr[e] = wr * gp[e];
                gd[e] = wd * gp[e];
            }
            grad_gates(n, 0) = acc_r;
            grad_gates(n, 1) = acc_d;
        }

        FcGrads<T> g2 = fc_backward(model.gate_fc2, relu_forward(cache.gate_hidden_pre), grad_gates);
        TensorT<T> g_gh = relu_backward(cache.gate_hidden_pre, g2.input);
        FcGrads<T> g1 = fc_backward(model.gate_fc1, cache.fused, g_gh);
        auto [gfr, gfd] = concat_backward(g1.input, E, E);
        grad_e_rgb = add(grad_e_rgb, gfr);
        grad_e_depth = add(grad_e_depth, gfd);

        TensorT<T> g_er_pre = relu_backward(cache.embed_rgb_pre, grad_e_rgb);
        TensorT<T> g_ed_pre = relu_backward(cache.embed_depth_pre, grad_e_depth);
        FcGrads<T> ger = fc_backward(model.embed_rgb, cache.rgb.flat, g_er_pre);
        FcGrads<T> ged = fc_backward(model.embed_depth, cache.depth.flat, g_ed_pre);
        grad_flat_rgb = std::move(ger.input);
        grad_flat_depth = std::move(ged.input);

        head_grads.push_back(std::move(ger.weight));
        head_grads.push_back(std::move(ger.bias));
        head_grads.push_back(std::move(ged.weight));
        head_grads.push_back(std::move(ged.bias));
        head_grads.push_back(std::move(g1.weight));
        head_grads.push_back(std::move(g1.bias));
        head_grads.push_back(std::move(g2.weight));
        head_grads.push_back(std::move(g2.bias));
        for (auto& t : post_grads) head_grads.push_back(std::move(t));
    }

    std::vector<TensorT<T>> grads;
    detail::branch_backward(model.rgb_branch, cache.rgb, grad_flat_rgb, grads);
    detail::branch_backward(model.depth_branch, cache.depth, grad_flat_depth, grads);
    for (auto& t : head_grads) grads.push_back(std::move(t));
    return grads;
}

// ---------------------------------------------------------------------------
// Closed-form parameter and FLOP counts from the config alone, plus an
// actual-sum variant over a built model. Biases are included.

inline int64_t count_parameters(const ModelConfig& cfg) {
    cfg.validate();
    int64_t total = 0;
    auto branch = [&](int64_t in_channels) {
        int64_t ci = in_channels;
        for (int64_t co : cfg.conv_widths) {
            total += co * ci * 9 + co;
            ci = co;
        }
    };
    branch(3);
    branch(1);
    auto fc = [&](int64_t d_in, int64_t d_out) { total += d_out * d_in + d_out; };
    const int64_t flat = cfg.flatten_per_branch();
    if (cfg.fusion == FusionKind::ConEmb) {
        int64_t di = 2 * flat;
        for (int64_t w : cfg.fc_widths) {
            fc(di, w);
            di = w;
        }
        fc(di, 1);
    } else {
        fc(flat, cfg.embed_dim);
        fc(flat, cfg.embed_dim);
        fc(2 * cfg.embed_dim, cfg.gate_hidden);
        fc(cfg.gate_hidden, 2);
        int64_t di = cfg.embed_dim;
        for (int64_t w : cfg.post_widths) {
            fc(di, w);
            di = w;
        }
        fc(di, 1);
    }
    return total;
}

template <typename T>
int64_t count_parameters(FusionModel<T>& model) {
    int64_t total = 0;
    for (const auto& p : model.parameters()) total += p.tensor->numel();
    return total;
}

/// Forward multiply-add count x2 for a single sample: conv stages at their
/// running resolution, every FC, and the gated multiply/sum (3 ops per
/// embedding element). Bias adds, ReLU and pooling are not counted.
inline int64_t count_flops(const ModelConfig& cfg) {
    cfg.validate();
    int64_t total = 0;
    auto branch = [&](int64_t in_channels) {
        int64_t ci = in_channels;
        int64_t res = cfg.image_size;
        for (int64_t co : cfg.conv_widths) {
            total += 2 * res * res * co * ci * 9;
            ci = co;
            res /= 2;
        }
    };
    branch(3);
    branch(1);
    auto fc = [&](int64_t d_in, int64_t d_out) { total += 2 * d_in * d_out; };
    const int64_t flat = cfg.flatten_per_branch();
    if (cfg.fusion == FusionKind::ConEmb) {
        int64_t di = 2 * flat;
        for (int64_t w : cfg.fc_widths) {
            fc(di, w);
            di = w;
        }
        fc(di, 1);
    } else {
        fc(flat, cfg.embed_dim);
        fc(flat, cfg.embed_dim);
        fc(2 * cfg.embed_dim, cfg.gate_hidden);
        fc(cfg.gate_hidden, 2);
        total += 3 * cfg.embed_dim;
        int64_t di = cfg.embed_dim;
        for (int64_t w : cfg.post_widths) {
            fc(di, w);
            di = w;
        }
        fc(di, 1);
    }
    return total;
}

// ---------------------------------------------------------------------------
// Modality masking for the ablation study. The named modality is replaced
// by exact zeros; masking applies to the normalized network input.

enum class Mask { None, Rgb, Depth };

inline const char* to_string(Mask m) {
    switch (m) {
        case Mask::Rgb: return "rgb";
        case Mask::Depth: return "depth";
        default: return "none";
    }
}

inline Mask mask_from_string(const std::string& s) {
    if (s == "none") return Mask::None;
    if (s == "rgb") return Mask::Rgb;
    if (s == "depth") return Mask::Depth;
    throw std::invalid_argument("unknown mask: " + s);
}

template <typename T>
std::pair<TensorT<T>, TensorT<T>> mask_modality(const TensorT<T>& rgb, const TensorT<T>& depth,
                                                Mask mask) {
    switch (mask) {
        case Mask::Rgb: return {TensorT<T>::zeros(rgb.shape()), depth};
        case Mask::Depth: return {rgb, TensorT<T>::zeros(depth.shape())};
        default: return {rgb, depth};
    }
}

}  // namespace sfnet
