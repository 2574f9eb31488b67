#pragma once

#include <array>
#include <cmath>

#include "lc/core/video.hpp"

namespace lc {

struct CropBox {
    int y = 0, x = 0, h = 0, w = 0;  // source rectangle, may extend past the frame
    bool is_identity(int frame_h, int frame_w) const {
        return y == 0 && x == 0 && h == frame_h && w == frame_w;
    }
};

VideoClip flip_x(const VideoClip& clip);
MaskVideo flip_x(const MaskVideo& mask);

// Samples `box` from every frame and resizes it back to the full frame.
// Bilinear for clips, nearest-neighbor for masks; out-of-frame source reads 0.
VideoClip crop_resize(const VideoClip& clip, const CropBox& box);
MaskVideo crop_resize(const MaskVideo& mask, const CropBox& box);

// Integer translation with zero fill, applied to every frame.
VideoClip shift(const VideoClip& clip, int dy, int dx);
MaskVideo shift(const MaskVideo& mask, int dy, int dx);

// h, s, v all in [0, 1]; hue wraps.
std::array<float, 3> rgb_to_hsv(float r, float g, float b);
std::array<float, 3> hsv_to_rgb(float h, float s, float v);

}  // namespace lc
