#pragma once

#include <array>
#include <cstdint>
#include <utility>

#include "lc/core/image_ops.hpp"
#include "lc/core/rng.hpp"
#include "lc/core/video.hpp"

namespace lc::augment {

struct AugmentConfig {
    double p_flip = 0.7;
    double p_crop = 0.7;
    double p_color = 0.2;
    double scale_lo = 0.5, scale_hi = 2.0;
    double min_retain = 0.9;   // fraction of mask area the crop must keep
    double color_max = 0.2;
    int max_crop_attempts = 100;
};

struct AugmentParams {
    bool flipped = false;
    bool crop_applied = false;
    bool color_applied = false;
    CropBox crop_box;                            // full frame when identity
    double scale = 1.0;
    std::array<double, 4> color_delta = {0, 0, 0, 0};  // brightness, contrast, saturation, hue
    uint64_t rng_seed = 0;
    bool degenerate_mask = false;  // all-zero mask: params forced to identity

    static AugmentParams identity(int h, int w) {
        AugmentParams p;
        p.crop_box = {0, 0, h, w};
        return p;
    }
};

// Fraction of mask pixels inside the (frame-constant) crop box.
double retained_mask_fraction(const MaskVideo& mask, const CropBox& box);

// Draws flip/crop/color decisions. The crop box is rejection-sampled until
// it keeps at least min_retain of the mask area (scale and position are
// redrawn each attempt); after max_crop_attempts the crop falls back to
// identity.
AugmentParams sample_params(const MaskVideo& mask, Rng& rng, const AugmentConfig& cfg);

// Applies flip -> crop/resize -> masked color jitter. The same spatial
// transform is applied to every frame; photometric changes touch only
// pixels inside the transformed mask, and the output is re-masked so it
// stays exactly zero outside it.
std::pair<VideoClip, MaskVideo> apply(const VideoClip& fg, const MaskVideo& mask,
                                      const AugmentParams& p);

}  // namespace lc::augment
