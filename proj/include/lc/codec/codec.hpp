#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lc/core/video.hpp"

namespace lc::codec {

// Latent tensor (t, h, w, c), row-major, with recorded downsampling factors.
struct Latent {
    int t = 0, h = 0, w = 0, c = 0;
    std::array<int, 3> factors = {1, 1, 1};
    std::vector<float> data;

    Latent() = default;
    Latent(int t_, int h_, int w_, int c_, std::array<int, 3> f = {1, 1, 1})
        : t(t_), h(h_), w(w_), c(c_), factors(f), data(size_t(t_) * h_ * w_ * c_, 0.0f) {}

    size_t cells() const { return size_t(t) * h * w; }
    size_t numel() const { return data.size(); }
    float* cell(size_t i) { return &data[i * c]; }
    const float* cell(size_t i) const { return &data[i * c]; }
    bool same_shape(const Latent& o) const {
        return t == o.t && h == o.h && w == o.w && c == o.c;
    }
};

// Fractional latent-space mask (t, h, w) in [0, 1]: mean pooling of the
// pixel mask over each patch, preserving the area-normalization semantics.
struct FracMask {
    int t = 0, h = 0, w = 0;
    std::vector<float> data;

    FracMask() = default;
    FracMask(int t_, int h_, int w_) : t(t_), h(h_), w(w_), data(size_t(t_) * h_ * w_, 0.0f) {}
    size_t cells() const { return data.size(); }
};

struct CodecConfig {
    int f_t = 2, f_h = 8, f_w = 8;
    uint64_t basis_seed = 0x0c0dec0ull;
    int text_dim = 64;
    int l_max = 8;
    uint64_t text_seed = 0x7e8700ull;
    std::vector<std::string> vocab;  // empty -> default closed vocabulary

    int patch_dim() const { return f_t * f_h * f_w * 3; }
};

std::vector<std::string> default_vocabulary();

// Deterministic space-time codec: non-overlapping patch flattening followed
// by a fixed orthonormal linear map per patch. Exactly invertible, and each
// latent cell depends only on the patch it covers.
class VideoCodec {
  public:
    explicit VideoCodec(CodecConfig cfg);

    const CodecConfig& config() const { return cfg_; }
    int channels() const { return cfg_.patch_dim(); }

    Latent encode(const VideoClip& clip) const;
    VideoClip decode(const Latent& z, float fps = 8.0f) const;
    FracMask downsample_mask(const MaskVideo& mask) const;

  private:
    CodecConfig cfg_;
    std::vector<double> basis_;  // row-major [patch_dim, patch_dim], rows orthonormal
};

struct TextEmbedding {
    std::vector<int> ids;          // vocabulary id trace
    std::vector<float> table;      // [L, d] embedding lookups (no positions)
    std::vector<float> encoded;    // [L, d] with sinusoidal positions added
    int length = 0, dim = 0;
};

// Whitespace tokenizer over the closed vocabulary with a frozen, seeded
// embedding table. OOV words map to the reserved <unk> token.
class TextCodec {
  public:
    explicit TextCodec(const CodecConfig& cfg);

    TextEmbedding encode(const std::string& caption) const;
    std::vector<int> tokenize(const std::string& caption) const;
    const std::vector<std::string>& vocabulary() const { return vocab_; }
    int dim() const { return dim_; }
    int l_max() const { return l_max_; }

  private:
    std::vector<std::string> vocab_;
    std::vector<float> table_;  // [V, d]
    int dim_, l_max_;
};

}  // namespace lc::codec
