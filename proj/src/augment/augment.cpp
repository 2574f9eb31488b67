#include "lc/augment/augment.hpp"

#include <cmath>

#include "lc/core/error.hpp"

namespace lc::augment {

double retained_mask_fraction(const MaskVideo& mask, const CropBox& box) {
    size_t total = 0, kept = 0;
    for (int f = 0; f < mask.t; ++f)
        for (int y = 0; y < mask.h; ++y)
            for (int x = 0; x < mask.w; ++x) {
                if (!mask.at(f, y, x)) continue;
                ++total;
                if (y >= box.y && y < box.y + box.h && x >= box.x && x < box.x + box.w) ++kept;
            }
    if (total == 0) return 1.0;
    return double(kept) / double(total);
}

namespace {

// Aggregated 2-D prefix sums over time make the retention check O(1) per
// candidate box, which the Monte Carlo tests rely on.
struct MaskPrefix {
    int h, w;
    std::vector<int64_t> ps;  // (h+1) x (w+1)
    int64_t total = 0;

    explicit MaskPrefix(const MaskVideo& m) : h(m.h), w(m.w), ps(size_t(m.h + 1) * (m.w + 1), 0) {
        std::vector<int32_t> flat(size_t(m.h) * m.w, 0);
        for (int f = 0; f < m.t; ++f)
            for (int y = 0; y < m.h; ++y)
                for (int x = 0; x < m.w; ++x) flat[size_t(y) * m.w + x] += m.at(f, y, x);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                int64_t v = flat[size_t(y) * w + x];
                ps[size_t(y + 1) * (w + 1) + (x + 1)] = v + ps[size_t(y) * (w + 1) + (x + 1)] +
                                                        ps[size_t(y + 1) * (w + 1) + x] -
                                                        ps[size_t(y) * (w + 1) + x];
                total += v;
            }
    }

    int64_t rect(int y0, int x0, int y1, int x1) const {  // half-open, clamped
        y0 = std::max(y0, 0); x0 = std::max(x0, 0);
        y1 = std::min(y1, h); x1 = std::min(x1, w);
        if (y0 >= y1 || x0 >= x1) return 0;
        return ps[size_t(y1) * (w + 1) + x1] - ps[size_t(y0) * (w + 1) + x1] -
               ps[size_t(y1) * (w + 1) + x0] + ps[size_t(y0) * (w + 1) + x0];
    }
};

}  // namespace

AugmentParams sample_params(const MaskVideo& mask, Rng& rng, const AugmentConfig& cfg) {
    AugmentParams p = AugmentParams::identity(mask.h, mask.w);
    p.rng_seed = rng.state;

    if (mask.count() == 0) {
        p.degenerate_mask = true;
        return p;
    }

    p.flipped = rng.bernoulli(cfg.p_flip);

    if (rng.bernoulli(cfg.p_crop)) {
        // The crop box is sampled in the post-flip frame; retention is
        // mirror-invariant so the prefix table is built on the flipped mask.
        MaskPrefix prefix(p.flipped ? flip_x(mask) : mask);
        const int H = mask.h, W = mask.w;
        for (int attempt = 0; attempt < cfg.max_crop_attempts; ++attempt) {
            double s = rng.uniform(cfg.scale_lo, cfg.scale_hi);
            int bh = std::max(1, (int)std::lround(H / s));
            int bw = std::max(1, (int)std::lround(W / s));
            int ylo = std::min(0, H - bh), yhi = std::max(0, H - bh);
            int xlo = std::min(0, W - bw), xhi = std::max(0, W - bw);
            CropBox box;
            box.y = (int)rng.uniform_int(ylo, yhi);
            box.x = (int)rng.uniform_int(xlo, xhi);
            box.h = bh;
            box.w = bw;
            int64_t kept = prefix.rect(box.y, box.x, box.y + box.h, box.x + box.w);
            if (double(kept) >= cfg.min_retain * double(prefix.total)) {
                p.crop_box = box;
                p.scale = s;
                p.crop_applied = true;
                break;
            }
        }
        // fall-through keeps the identity box
    }

    if (rng.bernoulli(cfg.p_color)) {
        p.color_applied = true;
        for (int i = 0; i < 4; ++i) p.color_delta[i] = rng.uniform(0.0, cfg.color_max);
    }
    return p;
}

namespace {

void jitter_pixel(float* px, const std::array<double, 4>& d) {
    float r = px[0], g = px[1], b = px[2];
    // brightness
    r += float(d[0]); g += float(d[0]); b += float(d[0]);
    // contrast about mid-gray
    float kc = 1.0f + float(d[1]);
    r = (r - 0.5f) * kc + 0.5f;
    g = (g - 0.5f) * kc + 0.5f;
    b = (b - 0.5f) * kc + 0.5f;
    // saturation about luma
    float luma = 0.299f * r + 0.587f * g + 0.114f * b;
    float ks = 1.0f + float(d[2]);
    r = luma + (r - luma) * ks;
    g = luma + (g - luma) * ks;
    b = luma + (b - luma) * ks;
    r = clamp01(r); g = clamp01(g); b = clamp01(b);
    // hue shift, clamped rather than wrapped
    if (d[3] > 0.0) {
        auto hsv = rgb_to_hsv(r, g, b);
        hsv[0] = std::min(1.0f, hsv[0] + float(d[3]));
        auto rgb = hsv_to_rgb(hsv[0], hsv[1], hsv[2]);
        r = rgb[0]; g = rgb[1]; b = rgb[2];
    }
    px[0] = clamp01(r); px[1] = clamp01(g); px[2] = clamp01(b);
}

}  // namespace

std::pair<VideoClip, MaskVideo> apply(const VideoClip& fg, const MaskVideo& mask,
                                      const AugmentParams& p) {
    require(mask.same_shape(fg), "augment apply: shape mismatch");

    VideoClip out_fg = fg;
    MaskVideo out_mask = mask;
    if (p.flipped) {
        out_fg = flip_x(out_fg);
        out_mask = flip_x(out_mask);
    }
    if (!p.crop_box.is_identity(fg.h, fg.w)) {
        out_fg = crop_resize(out_fg, p.crop_box);
        out_mask = crop_resize(out_mask, p.crop_box);
    }
    if (p.color_applied) {
        for (size_t i = 0; i < out_mask.data.size(); ++i)
            if (out_mask.data[i]) jitter_pixel(&out_fg.data[i * 3], p.color_delta);
    }
    // bilinear resampling can bleed past the nearest-neighbor mask edge;
    // re-mask so fg stays exactly zero outside the transformed mask
    for (size_t i = 0; i < out_mask.data.size(); ++i)
        if (!out_mask.data[i]) {
            out_fg.data[i * 3] = 0.0f;
            out_fg.data[i * 3 + 1] = 0.0f;
            out_fg.data[i * 3 + 2] = 0.0f;
        }
    return {std::move(out_fg), std::move(out_mask)};
}

}  // namespace lc::augment
