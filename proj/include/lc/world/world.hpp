#pragma once

#include <array>
#include <string>
#include <vector>

#include "lc/core/rng.hpp"
#include "lc/core/video.hpp"

namespace lc::world {

enum class Shape { circle, square, triangle };
enum class Trajectory { linear_left, linear_right, sinusoidal, bounce, fixed };
enum class SceneClass { water, ground, sky };
enum class TextureKind { gradient, stripes, checker, noise_field };

const char* to_string(Shape s);
const char* to_string(Trajectory t);
const char* to_string(SceneClass s);
const char* to_string(TextureKind t);
Shape shape_from_string(const std::string& s);
Trajectory trajectory_from_string(const std::string& s);
SceneClass scene_from_string(const std::string& s);
TextureKind texture_from_string(const std::string& s);

struct NamedColor {
    const char* name;
    std::array<float, 3> rgb;
};
// Closed sprite palette; hues chosen to stay clear of the scene palettes.
const std::vector<NamedColor>& sprite_palette();

struct SpriteSpec {
    Shape shape = Shape::circle;
    std::array<float, 3> color = {1, 0, 0};
    int color_id = 0;
    int size = 8;  // bounding-box side, px
    Trajectory trajectory = Trajectory::linear_right;
    // Trajectory parameters (px, frames, radians). Unused fields stay 0.
    float x0 = 0, y0 = 0;
    float vx = 0;
    float amp = 0, period = 8, phase = 0;    // sinusoidal
    float vy = 0, y_min = 0, y_max = 0;      // bounce fold interval
};

struct BackgroundSpec {
    TextureKind texture = TextureKind::noise_field;
    std::array<float, 2> camera_motion = {0, 0};  // px/frame (vx, vy)
    SceneClass scene = SceneClass::water;
    float band_lo = 0.5f, band_hi = 0.8f;  // affordance band, fraction of H
    float horizon = 28.0f;                 // region split line, px
    uint64_t texture_seed = 0;
};

struct ClipMeta {
    bool oracle = false;  // true when layers come from the generator
    uint64_t seed = 0;
    SpriteSpec sprite;
    BackgroundSpec background;
};

struct LayerSet {
    VideoClip original;
    VideoClip foreground;  // zero outside mask
    MaskVideo mask;
    VideoClip background;
    std::string caption;
    ClipMeta meta;
};

struct WorldConfig {
    int t = 16, h = 64, w = 64;
    float fps = 8.0f;
    int sprite_size_min = 8, sprite_size_max = 14;
    std::vector<std::string> trajectories = {"linear-left", "linear-right", "sinusoidal",
                                             "bounce", "static"};
    std::vector<std::string> scenes = {"water", "ground", "sky"};
    std::vector<std::string> textures = {"gradient", "stripes", "checker", "noise-field"};
    std::vector<int> camera_speeds = {-2, -1, 0, 1, 2};  // horizontal px/frame
    float camera_vy = 0.0f;  // vertical texture drift (horizon stays fixed)

    void validate() const;  // throws config_error
};

// Center of the sprite at a frame index.
std::array<float, 2> sprite_center(const SpriteSpec& s, int frame);

// Procedural background color at a pixel (before quantization).
std::array<float, 3> background_color(const BackgroundSpec& bg, int frame, int y, int x);

// Deterministic multi-layer clip generation; pure in (seed, config).
LayerSet generate_clip(uint64_t seed, const WorldConfig& cfg);

// Frame-rate downsample by rate_divisor, then split into chunk_len chunks;
// incomplete tails are dropped. Short input yields an empty list.
std::vector<VideoClip> temporal_chunk(const VideoClip& clip, int chunk_len, int rate_divisor);

// Caption template over the closed vocabulary.
std::string make_caption(const std::string& color, const std::string& shape,
                         const std::string& trajectory, const std::string& scene);
std::string scene_only_caption(const std::string& scene);

}  // namespace lc::world
