#include "lc/core/image_ops.hpp"

namespace lc {

VideoClip flip_x(const VideoClip& clip) {
    VideoClip out(clip.t, clip.h, clip.w, clip.fps);
    for (int f = 0; f < clip.t; ++f)
        for (int y = 0; y < clip.h; ++y)
            for (int x = 0; x < clip.w; ++x)
                for (int c = 0; c < 3; ++c)
                    out.at(f, y, x, c) = clip.at(f, y, clip.w - 1 - x, c);
    return out;
}

MaskVideo flip_x(const MaskVideo& mask) {
    MaskVideo out(mask.t, mask.h, mask.w);
    for (int f = 0; f < mask.t; ++f)
        for (int y = 0; y < mask.h; ++y)
            for (int x = 0; x < mask.w; ++x)
                out.at(f, y, x) = mask.at(f, y, mask.w - 1 - x);
    return out;
}

VideoClip crop_resize(const VideoClip& clip, const CropBox& box) {
    require(box.h >= 1 && box.w >= 1, "crop_resize: degenerate box");
    if (box.is_identity(clip.h, clip.w)) return clip;
    VideoClip out(clip.t, clip.h, clip.w, clip.fps);
    const double sy_scale = double(box.h) / clip.h;
    const double sx_scale = double(box.w) / clip.w;
    for (int f = 0; f < clip.t; ++f) {
        for (int y = 0; y < clip.h; ++y) {
            double sy = box.y + (y + 0.5) * sy_scale - 0.5;
            int y0 = (int)std::floor(sy);
            float fy = float(sy - y0);
            for (int x = 0; x < clip.w; ++x) {
                double sx = box.x + (x + 0.5) * sx_scale - 0.5;
                int x0 = (int)std::floor(sx);
                float fx = float(sx - x0);
                const float wgt[4] = {(1 - fy) * (1 - fx), (1 - fy) * fx, fy * (1 - fx), fy * fx};
                const int yy[4] = {y0, y0, y0 + 1, y0 + 1};
                const int xx[4] = {x0, x0 + 1, x0, x0 + 1};
                for (int c = 0; c < 3; ++c) {
                    float acc = 0.0f;
                    for (int k = 0; k < 4; ++k) {
                        if (yy[k] < 0 || yy[k] >= clip.h || xx[k] < 0 || xx[k] >= clip.w) continue;
                        acc += wgt[k] * clip.at(f, yy[k], xx[k], c);
                    }
                    out.at(f, y, x, c) = acc;
                }
            }
        }
    }
    return out;
}

MaskVideo crop_resize(const MaskVideo& mask, const CropBox& box) {
    require(box.h >= 1 && box.w >= 1, "crop_resize: degenerate box");
    if (box.is_identity(mask.h, mask.w)) return mask;
    MaskVideo out(mask.t, mask.h, mask.w);
    const double sy_scale = double(box.h) / mask.h;
    const double sx_scale = double(box.w) / mask.w;
    for (int f = 0; f < mask.t; ++f) {
        for (int y = 0; y < mask.h; ++y) {
            int sy = (int)std::lround(box.y + (y + 0.5) * sy_scale - 0.5);
            for (int x = 0; x < mask.w; ++x) {
                int sx = (int)std::lround(box.x + (x + 0.5) * sx_scale - 0.5);
                uint8_t v = 0;
                if (sy >= 0 && sy < mask.h && sx >= 0 && sx < mask.w) v = mask.at(f, sy, sx);
                out.at(f, y, x) = v;
            }
        }
    }
    return out;
}

VideoClip shift(const VideoClip& clip, int dy, int dx) {
    VideoClip out(clip.t, clip.h, clip.w, clip.fps);
    for (int f = 0; f < clip.t; ++f)
        for (int y = 0; y < clip.h; ++y) {
            int sy = y - dy;
            if (sy < 0 || sy >= clip.h) continue;
            for (int x = 0; x < clip.w; ++x) {
                int sx = x - dx;
                if (sx < 0 || sx >= clip.w) continue;
                for (int c = 0; c < 3; ++c) out.at(f, y, x, c) = clip.at(f, sy, sx, c);
            }
        }
    return out;
}

MaskVideo shift(const MaskVideo& mask, int dy, int dx) {
    MaskVideo out(mask.t, mask.h, mask.w);
    for (int f = 0; f < mask.t; ++f)
        for (int y = 0; y < mask.h; ++y) {
            int sy = y - dy;
            if (sy < 0 || sy >= mask.h) continue;
            for (int x = 0; x < mask.w; ++x) {
                int sx = x - dx;
                if (sx < 0 || sx >= mask.w) continue;
                out.at(f, y, x) = mask.at(f, sy, sx);
            }
        }
    return out;
}

std::array<float, 3> rgb_to_hsv(float r, float g, float b) {
    float mx = std::max(r, std::max(g, b));
    float mn = std::min(r, std::min(g, b));
    float d = mx - mn;
    float h = 0.0f;
    if (d > 0.0f) {
        if (mx == r)
            h = (g - b) / d;
        else if (mx == g)
            h = 2.0f + (b - r) / d;
        else
            h = 4.0f + (r - g) / d;
        h /= 6.0f;
        if (h < 0.0f) h += 1.0f;
    }
    float s = mx > 0.0f ? d / mx : 0.0f;
    return {h, s, mx};
}

std::array<float, 3> hsv_to_rgb(float h, float s, float v) {
    if (s <= 0.0f) return {v, v, v};
    h = h - std::floor(h);
    float hf = h * 6.0f;
    int i = (int)hf % 6;
    float f = hf - std::floor(hf);
    float p = v * (1.0f - s);
    float q = v * (1.0f - s * f);
    float t = v * (1.0f - s * (1.0f - f));
    switch (i) {
        case 0: return {v, t, p};
        case 1: return {q, v, p};
        case 2: return {p, v, t};
        case 3: return {p, q, v};
        case 4: return {t, p, v};
        default: return {v, p, q};
    }
}

}  // namespace lc
