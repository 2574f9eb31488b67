#include "lc/world/world.hpp"

#include <cmath>

#include "lc/core/error.hpp"

namespace lc::world {

namespace {
constexpr double kTau = 6.283185307179586477;

float lattice_hash(uint64_t seed, int64_t gy, int64_t gx) {
    uint64_t h = Rng::mix({seed, uint64_t(gy) * 0x9e3779b97f4a7c15ull ^ 0x1234567u, uint64_t(gx)});
    return float(double(h >> 11) * 0x1.0p-53);
}

// Smooth value noise on an integer lattice, range [-1, 1].
float vnoise(uint64_t seed, float u, float v) {
    float fu = std::floor(u), fv = std::floor(v);
    int64_t gu = (int64_t)fu, gv = (int64_t)fv;
    float du = u - fu, dv = v - fv;
    // smoothstep
    float su = du * du * (3.0f - 2.0f * du);
    float sv = dv * dv * (3.0f - 2.0f * dv);
    float n00 = lattice_hash(seed, gv, gu);
    float n01 = lattice_hash(seed, gv, gu + 1);
    float n10 = lattice_hash(seed, gv + 1, gu);
    float n11 = lattice_hash(seed, gv + 1, gu + 1);
    float a = n00 + (n01 - n00) * su;
    float b = n10 + (n11 - n10) * su;
    return 2.0f * (a + (b - a) * sv) - 1.0f;
}

float pattern_value(TextureKind kind, uint64_t seed, float u, float v) {
    switch (kind) {
        case TextureKind::gradient: return std::sin(float(kTau) * (u + 2.0f * v) / 96.0f);
        case TextureKind::stripes: return std::sin(float(kTau) * u / 11.0f);
        case TextureKind::checker:
            return std::sin(float(kTau) * u / 12.0f) * std::sin(float(kTau) * v / 12.0f);
        case TextureKind::noise_field: return vnoise(seed, u / 7.0f, v / 7.0f);
    }
    return 0.0f;
}

std::array<float, 3> lerp3(const std::array<float, 3>& a, const std::array<float, 3>& b, float t) {
    return {a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t, a[2] + (b[2] - a[2]) * t};
}

}  // namespace

const char* to_string(Shape s) {
    switch (s) {
        case Shape::circle: return "circle";
        case Shape::square: return "square";
        default: return "triangle";
    }
}
const char* to_string(Trajectory t) {
    switch (t) {
        case Trajectory::linear_left: return "linear-left";
        case Trajectory::linear_right: return "linear-right";
        case Trajectory::sinusoidal: return "sinusoidal";
        case Trajectory::bounce: return "bounce";
        default: return "static";
    }
}
const char* to_string(SceneClass s) {
    switch (s) {
        case SceneClass::water: return "water";
        case SceneClass::ground: return "ground";
        default: return "sky";
    }
}
const char* to_string(TextureKind t) {
    switch (t) {
        case TextureKind::gradient: return "gradient";
        case TextureKind::stripes: return "stripes";
        case TextureKind::checker: return "checker";
        default: return "noise-field";
    }
}

Shape shape_from_string(const std::string& s) {
    if (s == "circle") return Shape::circle;
    if (s == "square") return Shape::square;
    if (s == "triangle") return Shape::triangle;
    throw config_error("unknown shape: " + s);
}
Trajectory trajectory_from_string(const std::string& s) {
    if (s == "linear-left") return Trajectory::linear_left;
    if (s == "linear-right") return Trajectory::linear_right;
    if (s == "sinusoidal") return Trajectory::sinusoidal;
    if (s == "bounce") return Trajectory::bounce;
    if (s == "static") return Trajectory::fixed;
    throw config_error("unknown trajectory: " + s);
}
SceneClass scene_from_string(const std::string& s) {
    if (s == "water") return SceneClass::water;
    if (s == "ground") return SceneClass::ground;
    if (s == "sky") return SceneClass::sky;
    throw config_error("unknown scene: " + s);
}
TextureKind texture_from_string(const std::string& s) {
    if (s == "gradient") return TextureKind::gradient;
    if (s == "stripes") return TextureKind::stripes;
    if (s == "checker") return TextureKind::checker;
    if (s == "noise-field") return TextureKind::noise_field;
    throw config_error("unknown texture: " + s);
}

const std::vector<NamedColor>& sprite_palette() {
    static const std::vector<NamedColor> palette = {
        {"red", {220.0f / 255, 40.0f / 255, 30.0f / 255}},
        {"yellow", {235.0f / 255, 200.0f / 255, 40.0f / 255}},
        {"magenta", {200.0f / 255, 50.0f / 255, 190.0f / 255}},
        {"white", {247.0f / 255, 247.0f / 255, 247.0f / 255}},
    };
    return palette;
}

void WorldConfig::validate() const {
    if (t < 2) throw config_error("world config: T must be >= 2");
    if (h < 16 || w < 16) throw config_error("world config: frame too small");
    if (sprite_size_min < 4) throw config_error("world config: sprite size must be >= 4 px");
    if (sprite_size_max >= std::min(h, w)) throw config_error("world config: sprite larger than frame");
    if (sprite_size_min > sprite_size_max) throw config_error("world config: bad sprite size range");
    if (trajectories.empty() || scenes.empty() || textures.empty() || camera_speeds.empty())
        throw config_error("world config: empty choice set");
    for (int v : camera_speeds)
        if (std::abs(v) > 4) throw config_error("world config: |camera speed| must be <= 4");
    for (const auto& s : trajectories) trajectory_from_string(s);
    for (const auto& s : scenes) scene_from_string(s);
    for (const auto& s : textures) texture_from_string(s);
}

std::array<float, 2> sprite_center(const SpriteSpec& s, int frame) {
    float t = float(frame);
    float cx = s.x0 + s.vx * t;
    float cy = s.y0;
    switch (s.trajectory) {
        case Trajectory::sinusoidal:
            cy = s.y0 + s.amp * std::sin(float(kTau) * t / s.period + s.phase);
            break;
        case Trajectory::bounce: {
            float span = s.y_max - s.y_min;
            float pos = (s.y0 - s.y_min) + s.vy * t;
            float m = std::fmod(pos, 2.0f * span);
            if (m < 0) m += 2.0f * span;
            cy = s.y_min + (m <= span ? m : 2.0f * span - m);
            break;
        }
        default: break;
    }
    return {cx, cy};
}

std::array<float, 3> background_color(const BackgroundSpec& bg, int frame, int y, int x) {
    float u = x + bg.camera_motion[0] * frame;
    float v = y + bg.camera_motion[1] * frame;
    float p = pattern_value(bg.texture, bg.texture_seed, u, v);
    p += 0.6f * vnoise(bg.texture_seed ^ 0xd17e5ull, u / 5.0f, v / 5.0f);
    // extra fine-grain dither so even flat regions localize under block
    // matching and phase correlation
    float dither = 0.035f * vnoise(bg.texture_seed ^ 0xf1371ull, u / 3.0f, v / 3.0f);

    const float yr = float(y);
    std::array<float, 3> c{};
    switch (bg.scene) {
        case SceneClass::water: {
            float split = bg.horizon;
            if (yr < split) {
                float f = yr / std::max(split, 1.0f);
                c = lerp3({0.70f, 0.84f, 0.95f}, {0.56f, 0.74f, 0.92f}, f);
                c[0] += 0.02f * p; c[1] += 0.02f * p; c[2] += 0.02f * p;
            } else {
                c = {0.07f, 0.20f, 0.58f};
                float m = 1.0f + 0.22f * p;
                c[0] *= m; c[1] *= m; c[2] *= m;
            }
            break;
        }
        case SceneClass::ground: {
            float split = bg.horizon;
            if (yr < split) {
                float f = yr / std::max(split, 1.0f);
                c = lerp3({0.68f, 0.82f, 0.94f}, {0.58f, 0.75f, 0.91f}, f);
                c[0] += 0.02f * p; c[1] += 0.02f * p; c[2] += 0.02f * p;
            } else {
                float mixv = 0.5f + 0.5f * vnoise(bg.texture_seed ^ 0x6707ull, u / 9.0f, v / 9.0f);
                c = lerp3({0.22f, 0.44f, 0.12f}, {0.38f, 0.30f, 0.12f}, mixv);
                float m = 1.0f + 0.18f * p;
                c[0] *= m; c[1] *= m; c[2] *= m;
            }
            break;
        }
        case SceneClass::sky: {
            float split = bg.horizon;  // ground strip starts here
            if (yr < split) {
                float f = yr / std::max(split, 1.0f);
                c = lerp3({0.50f, 0.68f, 0.92f}, {0.72f, 0.83f, 0.95f}, f);
                float cloud = vnoise(bg.texture_seed ^ 0xc10dull, u / 10.0f, v / 10.0f);
                if (cloud > 0) { c[0] += 0.06f * cloud; c[1] += 0.05f * cloud; c[2] += 0.03f * cloud; }
                c[0] += 0.02f * p; c[1] += 0.02f * p; c[2] += 0.02f * p;
            } else {
                c = {0.17f, 0.17f, 0.18f};
                float m = 1.0f + 0.15f * p;
                c[0] *= m; c[1] *= m; c[2] *= m;
            }
            break;
        }
    }
    c[0] += dither;
    c[1] += dither;
    c[2] += dither;
    return c;
}

namespace {

bool sprite_contains(const SpriteSpec& s, float cx, float cy, int px, int py) {
    float r = s.size * 0.5f;
    float dx = px - cx, dy = py - cy;
    switch (s.shape) {
        case Shape::circle: return dx * dx + dy * dy <= r * r;
        case Shape::square: return std::fabs(dx) <= r && std::fabs(dy) <= r;
        case Shape::triangle: {
            if (dy < -r || dy > r) return false;
            float half_width = (dy + r) * 0.5f;  // apex up
            return std::fabs(dx) <= half_width;
        }
    }
    return false;
}

}  // namespace

LayerSet generate_clip(uint64_t seed, const WorldConfig& cfg) {
    cfg.validate();
    Rng rng(Rng::mix({0x1a9e75e7ull, seed}));

    // --- background (camera speed chosen after the sprite) ---
    BackgroundSpec bg;
    bg.scene = scene_from_string(cfg.scenes[rng.uniform_int(0, int(cfg.scenes.size()) - 1)]);
    bg.texture = texture_from_string(cfg.textures[rng.uniform_int(0, int(cfg.textures.size()) - 1)]);
    bg.camera_motion = {0.0f, cfg.camera_vy};
    bg.texture_seed = Rng::mix({seed, 0x7e47ull});
    switch (bg.scene) {
        case SceneClass::water: {
            float yh = float(rng.uniform(0.35, 0.55));
            bg.horizon = yh * cfg.h;
            bg.band_lo = yh + 0.03f;
            bg.band_hi = yh + 0.33f;
            break;
        }
        case SceneClass::ground: {
            float yh = float(rng.uniform(0.40, 0.60));
            bg.horizon = yh * cfg.h;
            bg.band_lo = yh + 0.03f;
            bg.band_hi = yh + 0.33f;
            break;
        }
        case SceneClass::sky: {
            float yg = float(rng.uniform(0.72, 0.88));
            bg.horizon = yg * cfg.h;
            bg.band_lo = 0.10f;
            bg.band_hi = yg - 0.28f;
            break;
        }
    }

    // --- sprite ---
    SpriteSpec sp;
    const auto& palette = sprite_palette();
    sp.color_id = int(rng.uniform_int(0, int(palette.size()) - 1));
    sp.color = palette[sp.color_id].rgb;
    sp.shape = Shape(rng.uniform_int(0, 2));
    sp.size = int(rng.uniform_int(cfg.sprite_size_min, cfg.sprite_size_max));
    sp.trajectory =
        trajectory_from_string(cfg.trajectories[rng.uniform_int(0, int(cfg.trajectories.size()) - 1)]);

    const float r = sp.size * 0.5f;
    const float band_lo_px = bg.band_lo * cfg.h;
    const float band_hi_px = bg.band_hi * cfg.h;
    const float ylo = std::max(band_lo_px, r + 0.5f);
    const float yhi = std::min(band_hi_px, cfg.h - 1 - r - 0.5f);
    if (!(yhi > ylo + 2.0f))
        throw config_error("generate_clip: affordance band too narrow for sprite size");

    auto solve_x = [&](float speed_abs, int dir) {
        // keep the bbox inside the frame over all frames
        float travel = speed_abs * (cfg.t - 1);
        float xmin = r + 0.5f, xmax = cfg.w - 1 - r - 0.5f;
        if (travel > xmax - xmin) {
            speed_abs = (xmax - xmin) / (cfg.t - 1) * 0.95f;
            travel = speed_abs * (cfg.t - 1);
        }
        float lo = dir > 0 ? xmin : xmin + travel;
        float hi = dir > 0 ? xmax - travel : xmax;
        sp.vx = dir * speed_abs;
        sp.x0 = float(rng.uniform(lo, hi));
    };

    // Sprites move fast enough to clear their own footprint within half the
    // clip, keeping every scene pixel background-dominated over time.
    const float lin_speed_lo = std::max(1.0f, sp.size / 7.5f);
    const float osc_speed_lo = std::max(0.8f, sp.size / 9.0f);
    switch (sp.trajectory) {
        case Trajectory::linear_left:
            solve_x(float(rng.uniform(lin_speed_lo, 2.2)), -1);
            sp.y0 = float(rng.uniform(ylo, yhi));
            break;
        case Trajectory::linear_right:
            solve_x(float(rng.uniform(lin_speed_lo, 2.2)), +1);
            sp.y0 = float(rng.uniform(ylo, yhi));
            break;
        case Trajectory::sinusoidal: {
            // vertical extent kept well under the band height so benchmark
            // displacement always has room to move the whole track
            solve_x(float(rng.uniform(osc_speed_lo, 1.6)), rng.bernoulli(0.5) ? 1 : -1);
            sp.period = float(8 + 4 * rng.uniform_int(0, 2));  // 8, 12, 16
            sp.phase = float(rng.uniform(0.0, kTau));
            float half = 0.5f * (yhi - ylo);
            float amp_hi = std::min(4.0f, 0.9f * half);
            float amp_lo = std::min(1.8f, 0.6f * amp_hi);
            sp.amp = float(rng.uniform(amp_lo, amp_hi));
            sp.y0 = float(rng.uniform(ylo + sp.amp, yhi - sp.amp));
            break;
        }
        case Trajectory::bounce: {
            solve_x(float(rng.uniform(osc_speed_lo, 1.6)), rng.bernoulli(0.5) ? 1 : -1);
            float max_span = std::min(8.0f, 0.9f * (yhi - ylo));
            float min_span = std::min(4.0f, 0.6f * max_span);
            float span = float(rng.uniform(min_span, max_span));
            sp.y_min = float(rng.uniform(ylo, yhi - span));
            sp.y_max = sp.y_min + span;
            sp.vy = float(rng.uniform(1.5, 2.2));
            sp.y0 = float(rng.uniform(sp.y_min, sp.y_max));
            break;
        }
        case Trajectory::fixed:
            sp.vx = 0;
            sp.x0 = float(rng.uniform(r + 0.5f, cfg.w - 1 - r - 0.5f));
            sp.y0 = float(rng.uniform(ylo, yhi));
            break;
    }

    // Keep the sprite's speed relative to the scene content above the
    // footprint-clearing bound: content moves at -camera_vx, so a sprite
    // "surfing" along with the pan would park on the same scene pixels.
    {
        std::vector<int> allowed;
        for (int cv : cfg.camera_speeds) {
            if (sp.trajectory == Trajectory::fixed) {
                allowed.push_back(cv);
            } else {
                float rel = std::fabs(sp.vx + float(cv));
                if (rel >= sp.size / 8.0f) allowed.push_back(cv);
            }
        }
        if (allowed.empty()) allowed = cfg.camera_speeds;
        bg.camera_motion[0] = float(allowed[rng.uniform_int(0, int(allowed.size()) - 1)]);
    }

    // --- render ---
    LayerSet out;
    out.original = VideoClip(cfg.t, cfg.h, cfg.w, cfg.fps);
    out.foreground = VideoClip(cfg.t, cfg.h, cfg.w, cfg.fps);
    out.background = VideoClip(cfg.t, cfg.h, cfg.w, cfg.fps);
    out.mask = MaskVideo(cfg.t, cfg.h, cfg.w);

    std::array<float, 3> qcolor = {quantize255(sp.color[0]), quantize255(sp.color[1]),
                                   quantize255(sp.color[2])};
    for (int f = 0; f < cfg.t; ++f) {
        auto [cx, cy] = sprite_center(sp, f);
        for (int y = 0; y < cfg.h; ++y) {
            for (int x = 0; x < cfg.w; ++x) {
                auto bc = background_color(bg, f, y, x);
                for (int c = 0; c < 3; ++c) out.background.at(f, y, x, c) = quantize255(bc[c]);
                if (sprite_contains(sp, cx, cy, x, y)) {
                    out.mask.at(f, y, x) = 1;
                    for (int c = 0; c < 3; ++c) out.foreground.at(f, y, x, c) = qcolor[c];
                }
            }
        }
    }
    out.original = compose_layers(out.foreground, out.mask, out.background);

    out.caption = make_caption(palette[sp.color_id].name, to_string(sp.shape),
                               to_string(sp.trajectory), to_string(bg.scene));
    out.meta.oracle = true;
    out.meta.seed = seed;
    out.meta.sprite = sp;
    out.meta.background = bg;
    return out;
}

std::vector<VideoClip> temporal_chunk(const VideoClip& clip, int chunk_len, int rate_divisor) {
    require(rate_divisor >= 1 && rate_divisor <= 4, "temporal_chunk: rate_divisor must be in {1,2,3,4}");
    require(chunk_len >= 2, "temporal_chunk: chunk_len must be >= 2");
    std::vector<int> frames;
    for (int f = 0; f < clip.t; f += rate_divisor) frames.push_back(f);
    std::vector<VideoClip> chunks;
    int n_chunks = int(frames.size()) / chunk_len;
    for (int k = 0; k < n_chunks; ++k) {
        VideoClip chunk(chunk_len, clip.h, clip.w, clip.fps / rate_divisor);
        for (int i = 0; i < chunk_len; ++i) {
            int src = frames[k * chunk_len + i];
            std::copy_n(&clip.data[clip.idx(src, 0, 0, 0)], size_t(clip.h) * clip.w * 3,
                        &chunk.data[chunk.idx(i, 0, 0, 0)]);
        }
        chunks.push_back(std::move(chunk));
    }
    return chunks;
}

std::string make_caption(const std::string& color, const std::string& shape,
                         const std::string& trajectory, const std::string& scene) {
    return "a " + color + " " + shape + " moving " + trajectory + " over " + scene;
}

std::string scene_only_caption(const std::string& scene) { return "a " + scene + " scene"; }

}  // namespace lc::world
