#pragma once

#include <array>
#include <string>
#include <vector>

#include "lc/codec/codec.hpp"
#include "lc/core/error.hpp"
#include "lc/nn/tape.hpp"

namespace lc::model {

struct ModelConfig {
    int latent_channels = 384;  // c, from the video codec
    int fusion_channels = 128;  // c'
    int depth = 4;
    int width = 128;
    int heads = 4;
    int text_dim = 64;
    int l_max = 8;
    int time_embed_dim = 128;
    int t_diff = 1000;
    int max_tokens = 4096;

    void validate() const {
        if (latent_channels <= 0 || fusion_channels <= 0 || depth <= 0 || width <= 0 ||
            heads <= 0 || text_dim <= 0 || time_embed_dim <= 0 || t_diff <= 0)
            throw config_error("model config: all dims must be > 0");
        if (width % heads != 0) throw config_error("model config: width must be divisible by heads");
    }
};

// Sinusoidal timestep features, [1, dim].
template <typename T>
nn::Mat<T> timestep_embedding(int t, int dim) {
    nn::Mat<T> e(1, dim);
    int half = dim / 2;
    for (int i = 0; i < half; ++i) {
        double freq = std::exp(-std::log(10000.0) * double(i) / double(half));
        double a = double(t) * freq;
        e(0, i) = T(std::sin(a));
        e(0, half + i) = T(std::cos(a));
    }
    return e;
}

// Factorized space-time position code: channels split into three chunks,
// each holding a 1-D sinusoidal code of its axis index.
template <typename T>
nn::Mat<T> spacetime_posenc(int lt, int lh, int lw, int width) {
    auto axis_code = [&](int pos, int chunk, T* out) {
        for (int d = 0; d < chunk; ++d) {
            double freq = std::pow(10000.0, -double(2 * (d / 2)) / double(chunk));
            double a = double(pos) * freq;
            out[d] = T(d % 2 == 0 ? std::sin(a) : std::cos(a));
        }
    };
    int c0 = width / 3, c1 = width / 3, c2 = width - 2 * (width / 3);
    nn::Mat<T> pe(lt * lh * lw, width);
    int row = 0;
    for (int i = 0; i < lt; ++i)
        for (int j = 0; j < lh; ++j)
            for (int k = 0; k < lw; ++k, ++row) {
                T* p = &pe.v[size_t(row) * width];
                axis_code(i, c0, p);
                axis_code(j, c1, p + c0);
                axis_code(k, c2, p + c0 + c1);
            }
    return pe;
}

template <typename T>
nn::Mat<T> latent_to_mat(const codec::Latent& z) {
    nn::Mat<T> m(int(z.cells()), z.c);
    for (size_t i = 0; i < z.data.size(); ++i) m.v[i] = T(z.data[i]);
    return m;
}

template <typename T>
codec::Latent mat_to_latent(const nn::Mat<T>& m, int t, int h, int w, std::array<int, 3> factors) {
    require(size_t(t) * h * w == size_t(m.rows), "mat_to_latent: grid mismatch");
    codec::Latent z(t, h, w, m.cols, factors);
    for (size_t i = 0; i < z.data.size(); ++i) z.data[i] = float(m.v[i]);
    return z;
}

// The merge network: per-cell channel fusion of the three conditioning
// latents, then a transformer over visual + text tokens that predicts the
// clean composed latent. Timestep enters through adaptive layer modulation.
template <typename T>
class Composer {
  public:
    using Tape = nn::Tape<T>;
    using Id = typename Tape::Id;

    ModelConfig cfg;
    nn::ParamSet<T> params;

    explicit Composer(ModelConfig c) : cfg(c) {
        cfg.validate();
        build_params();
    }

    // Standard training init: small normal weights, zeroed modulation and
    // output head so the network starts as an identity-plus-zero map.
    void init_weights(uint64_t seed) { init_impl(seed, false); }
    // Fully random init (all tensors non-zero); used by gradient checks.
    void init_weights_random(uint64_t seed) { init_impl(seed, true); }

    struct Bound {
        std::vector<Id> p;  // parallel to params.items
    };

    // grad_sinks: one buffer per parameter, or nullptr for inference.
    Bound bind(Tape& tape, std::vector<nn::Mat<T>>* grad_sinks) const {
        Bound b;
        b.p.reserve(params.items.size());
        for (size_t i = 0; i < params.items.size(); ++i)
            b.p.push_back(tape.leaf(&params.items[i].w,
                                    grad_sinks ? &(*grad_sinks)[i] : nullptr));
        return b;
    }

    // Eq-style channel fusion: concat(z_noisy, z_fg, z_bg) -> MLP per cell.
    Id fuse(Tape& tape, const Bound& b, Id z_noisy, Id z_fg, Id z_bg) const {
        const auto& zn = tape.val(z_noisy);
        require(zn.cols == cfg.latent_channels, "fuse: latent channel mismatch");
        require(tape.val(z_fg).rows == zn.rows && tape.val(z_bg).rows == zn.rows &&
                    tape.val(z_fg).cols == zn.cols && tape.val(z_bg).cols == zn.cols,
                "fuse: conditioning latents must match the noisy latent shape");
        Id cat = tape.concat_cols({z_noisy, z_fg, z_bg});
        Id h = tape.linear(cat, b.p[ix_.fuse_w1], b.p[ix_.fuse_b1]);
        h = tape.silu(h);
        return tape.linear(h, b.p[ix_.fuse_w2], b.p[ix_.fuse_b2]);
    }

    // z_vision: [N_v, c'] fused cells in (t, h, w) row-major cell order.
    Id forward(Tape& tape, const Bound& b, Id z_vision, const codec::TextEmbedding& text,
               std::array<int, 3> grid, int timestep) const {
        require(timestep >= 0 && timestep < cfg.t_diff, "forward: timestep out of range");
        const int n_vis = grid[0] * grid[1] * grid[2];
        require(tape.val(z_vision).rows == n_vis, "forward: grid does not match token count");
        require(tape.val(z_vision).cols == cfg.fusion_channels, "forward: fusion channel mismatch");
        require(text.length <= cfg.l_max, "forward: text longer than configured cap");
        if (n_vis + text.length > cfg.max_tokens)
            throw contract_error("forward: sequence exceeds configured cap");

        Id x = tape.linear(z_vision, b.p[ix_.in_proj_w], b.p[ix_.in_proj_b]);
        x = tape.add_const(x, spacetime_posenc<T>(grid[0], grid[1], grid[2], cfg.width));

        if (text.length > 0) {
            nn::Mat<T> tm(text.length, text.dim);
            for (size_t i = 0; i < text.encoded.size(); ++i) tm.v[i] = T(text.encoded[i]);
            Id txt = tape.linear(tape.constant(std::move(tm)), b.p[ix_.text_proj_w],
                                 b.p[ix_.text_proj_b]);
            txt = tape.add_rowvec(txt, b.p[ix_.text_segment]);
            x = tape.concat_rows(x, txt);
        }

        // timestep conditioning vector
        Id te = tape.constant(timestep_embedding<T>(timestep, cfg.time_embed_dim));
        Id e = tape.linear(te, b.p[ix_.tmlp_w1], b.p[ix_.tmlp_b1]);
        e = tape.silu(e);
        e = tape.linear(e, b.p[ix_.tmlp_w2], b.p[ix_.tmlp_b2]);
        Id e_act = tape.silu(e);

        const T eps = T(1e-5);
        for (int blk = 0; blk < cfg.depth; ++blk) {
            const auto& ib = ix_.blocks[blk];
            Id mod = tape.linear(e_act, b.p[ib.ada_w], b.p[ib.ada_b]);
            const int W = cfg.width;
            Id shift1 = tape.slice_cols(mod, 0, W);
            Id scale1 = tape.slice_cols(mod, W, 2 * W);
            Id gate1 = tape.slice_cols(mod, 2 * W, 3 * W);
            Id shift2 = tape.slice_cols(mod, 3 * W, 4 * W);
            Id scale2 = tape.slice_cols(mod, 4 * W, 5 * W);
            Id gate2 = tape.slice_cols(mod, 5 * W, 6 * W);

            Id h = tape.modulate(tape.layernorm(x, eps), scale1, shift1);
            Id q = tape.linear(h, b.p[ib.q_w], b.p[ib.q_b]);
            Id k = tape.linear(h, b.p[ib.k_w], b.p[ib.k_b]);
            Id v = tape.linear(h, b.p[ib.v_w], b.p[ib.v_b]);
            Id a = tape.attention(q, k, v, cfg.heads);
            a = tape.linear(a, b.p[ib.o_w], b.p[ib.o_b]);
            x = tape.add(x, tape.scale_rows(a, gate1));

            Id h2 = tape.modulate(tape.layernorm(x, eps), scale2, shift2);
            Id m = tape.linear(h2, b.p[ib.mlp_w1], b.p[ib.mlp_b1]);
            m = tape.silu(m);
            m = tape.linear(m, b.p[ib.mlp_w2], b.p[ib.mlp_b2]);
            x = tape.add(x, tape.scale_rows(m, gate2));
        }

        // read prediction from the visual tokens only
        Id xv = text.length > 0 ? tape.slice_rows(x, 0, n_vis) : x;
        Id fmod = tape.linear(e_act, b.p[ix_.final_ada_w], b.p[ix_.final_ada_b]);
        Id fshift = tape.slice_cols(fmod, 0, cfg.width);
        Id fscale = tape.slice_cols(fmod, cfg.width, 2 * cfg.width);
        Id f = tape.modulate(tape.layernorm(xv, eps), fscale, fshift);
        return tape.linear(f, b.p[ix_.head_w], b.p[ix_.head_b]);
    }

    // Inference convenience: one fuse+forward pass on a private tape.
    codec::Latent predict(const codec::Latent& z_noisy, const codec::Latent& z_fg,
                          const codec::Latent& z_bg, const codec::TextEmbedding& text,
                          int timestep) const {
        require(z_noisy.same_shape(z_fg) && z_noisy.same_shape(z_bg),
                "predict: latent shape mismatch");
        Tape tape;
        Bound b = bind(tape, nullptr);
        Id zn = tape.constant(latent_to_mat<T>(z_noisy));
        Id zf = tape.constant(latent_to_mat<T>(z_fg));
        Id zb = tape.constant(latent_to_mat<T>(z_bg));
        Id vis = fuse(tape, b, zn, zf, zb);
        Id out = forward(tape, b, vis, text, {z_noisy.t, z_noisy.h, z_noisy.w}, timestep);
        return mat_to_latent<T>(tape.val(out), z_noisy.t, z_noisy.h, z_noisy.w, z_noisy.factors);
    }

  private:
    struct BlockIx {
        int q_w, q_b, k_w, k_b, v_w, v_b, o_w, o_b;
        int mlp_w1, mlp_b1, mlp_w2, mlp_b2;
        int ada_w, ada_b;
    };
    struct Ix {
        int fuse_w1, fuse_b1, fuse_w2, fuse_b2;
        int in_proj_w, in_proj_b;
        int text_proj_w, text_proj_b, text_segment;
        int tmlp_w1, tmlp_b1, tmlp_w2, tmlp_b2;
        std::vector<BlockIx> blocks;
        int final_ada_w, final_ada_b, head_w, head_b;
    } ix_;

    void build_params() {
        const int c = cfg.latent_channels, cp = cfg.fusion_channels, W = cfg.width;
        auto add = [&](const std::string& n, int r, int co) { return params.add(n, r, co); };
        ix_.fuse_w1 = add("fuse.w1", 3 * c, 4 * cp);
        ix_.fuse_b1 = add("fuse.b1", 1, 4 * cp);
        ix_.fuse_w2 = add("fuse.w2", 4 * cp, cp);
        ix_.fuse_b2 = add("fuse.b2", 1, cp);
        ix_.in_proj_w = add("in_proj.w", cp, W);
        ix_.in_proj_b = add("in_proj.b", 1, W);
        ix_.text_proj_w = add("text_proj.w", cfg.text_dim, W);
        ix_.text_proj_b = add("text_proj.b", 1, W);
        ix_.text_segment = add("text_segment", 1, W);
        ix_.tmlp_w1 = add("tmlp.w1", cfg.time_embed_dim, W);
        ix_.tmlp_b1 = add("tmlp.b1", 1, W);
        ix_.tmlp_w2 = add("tmlp.w2", W, W);
        ix_.tmlp_b2 = add("tmlp.b2", 1, W);
        for (int i = 0; i < cfg.depth; ++i) {
            std::string p = "block" + std::to_string(i) + ".";
            BlockIx bi;
            bi.q_w = add(p + "q.w", W, W);
            bi.q_b = add(p + "q.b", 1, W);
            bi.k_w = add(p + "k.w", W, W);
            bi.k_b = add(p + "k.b", 1, W);
            bi.v_w = add(p + "v.w", W, W);
            bi.v_b = add(p + "v.b", 1, W);
            bi.o_w = add(p + "o.w", W, W);
            bi.o_b = add(p + "o.b", 1, W);
            bi.mlp_w1 = add(p + "mlp.w1", W, 4 * W);
            bi.mlp_b1 = add(p + "mlp.b1", 1, 4 * W);
            bi.mlp_w2 = add(p + "mlp.w2", 4 * W, W);
            bi.mlp_b2 = add(p + "mlp.b2", 1, W);
            bi.ada_w = add(p + "ada.w", W, 6 * W);
            bi.ada_b = add(p + "ada.b", 1, 6 * W);
            ix_.blocks.push_back(bi);
        }
        ix_.final_ada_w = add("final_ada.w", W, 2 * W);
        ix_.final_ada_b = add("final_ada.b", 1, 2 * W);
        ix_.head_w = add("head.w", W, cfg.latent_channels);
        ix_.head_b = add("head.b", 1, cfg.latent_channels);
    }

    void init_impl(uint64_t seed, bool all_random) {
        Rng rng(Rng::mix({seed, 0x171ull}));
        for (auto& p : params.items) {
            bool is_bias = p.name.size() > 2 && (p.name.substr(p.name.size() - 2) == ".b" ||
                                                 p.name.find(".b1") != std::string::npos ||
                                                 p.name.find(".b2") != std::string::npos);
            bool zero_init = p.name.find("ada.") != std::string::npos ||
                             p.name.find("head.") != std::string::npos;
            T std_dev = T(0.02);
            if (all_random) {
                for (auto& v : p.w.v) v = T(rng.normal()) * T(0.05);
            } else if (zero_init || is_bias) {
                std::fill(p.w.v.begin(), p.w.v.end(), T(0));
            } else {
                for (auto& v : p.w.v) v = T(rng.normal()) * std_dev;
            }
        }
    }
};

}  // namespace lc::model
