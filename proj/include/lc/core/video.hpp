#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "lc/core/error.hpp"

namespace lc {

// Dense RGB frame tensor, (T, H, W, 3) row-major, values in [0, 1].
struct VideoClip {
    int t = 0, h = 0, w = 0;
    float fps = 8.0f;
    std::vector<float> data;

    VideoClip() = default;
    VideoClip(int t_, int h_, int w_, float fps_ = 8.0f)
        : t(t_), h(h_), w(w_), fps(fps_), data(size_t(t_) * h_ * w_ * 3, 0.0f) {}

    size_t numel() const { return data.size(); }
    size_t idx(int f, int y, int x, int c) const {
        return ((size_t(f) * h + y) * w + x) * 3 + c;
    }
    float& at(int f, int y, int x, int c) { return data[idx(f, y, x, c)]; }
    float at(int f, int y, int x, int c) const { return data[idx(f, y, x, c)]; }

    bool same_shape(const VideoClip& o) const { return t == o.t && h == o.h && w == o.w; }
};

// Binary mask, (T, H, W) row-major, values in {0, 1}.
struct MaskVideo {
    int t = 0, h = 0, w = 0;
    std::vector<uint8_t> data;

    MaskVideo() = default;
    MaskVideo(int t_, int h_, int w_) : t(t_), h(h_), w(w_), data(size_t(t_) * h_ * w_, 0) {}

    size_t idx(int f, int y, int x) const { return (size_t(f) * h + y) * w + x; }
    uint8_t& at(int f, int y, int x) { return data[idx(f, y, x)]; }
    uint8_t at(int f, int y, int x) const { return data[idx(f, y, x)]; }

    size_t count() const {
        size_t n = 0;
        for (uint8_t v : data) n += v;
        return n;
    }
    bool same_shape(const VideoClip& o) const { return t == o.t && h == o.h && w == o.w; }
};

inline float clamp01(float v) { return v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v); }

// original = fg*mask + bg*(1-mask), exact at every pixel.
inline VideoClip compose_layers(const VideoClip& fg, const MaskVideo& mask, const VideoClip& bg) {
    require(fg.same_shape(bg) && mask.same_shape(fg), "compose_layers: shape mismatch");
    VideoClip out(fg.t, fg.h, fg.w, bg.fps);
    for (size_t i = 0; i < mask.data.size(); ++i) {
        const float* f = &fg.data[i * 3];
        const float* b = &bg.data[i * 3];
        float* o = &out.data[i * 3];
        if (mask.data[i]) {
            o[0] = f[0]; o[1] = f[1]; o[2] = f[2];
        } else {
            o[0] = b[0]; o[1] = b[1]; o[2] = b[2];
        }
    }
    return out;
}

// Quantize to the 8-bit grid the on-disk format uses.
inline float quantize255(float v) {
    int q = int(clamp01(v) * 255.0f + 0.5f);
    return float(q) / 255.0f;
}

}  // namespace lc
