#pragma once

#include <array>
#include <string>
#include <vector>

#include "lc/core/video.hpp"
#include "lc/world/world.hpp"

namespace lc::decompose {

struct DecomposerConfig {
    enum class Path { oracle, algorithmic };
    enum class InpaintMode { temporal_median, temporal_median_spatial };

    Path path = Path::algorithmic;
    double diff_threshold = 0.05;  // tuned once against the synthetic corpus
    int morphology_radius = 1;
    InpaintMode inpaint = InpaintMode::temporal_median_spatial;

    void validate() const {
        if (!(diff_threshold > 0.0 && diff_threshold < 1.0))
            throw config_error("decomposer: diff_threshold must be in (0,1)");
        if (morphology_radius < 0) throw config_error("decomposer: morphology_radius must be >= 0");
    }
};

// Integer translation of frame b relative to frame a via phase correlation:
// b(y, x) ~= a(y - dy, x - dx). Grayscale inputs, row-major h*w.
std::array<int, 2> phase_correlate(const std::vector<float>& a, const std::vector<float>& b,
                                   int h, int w);

// Cumulative per-frame content offsets (frame 0 is the reference).
std::vector<std::array<int, 2>> estimate_camera_track(const VideoClip& clip);

struct SegmentationResult {
    MaskVideo mask;
    bool no_subject = false;
    std::vector<std::array<int, 2>> camera;  // offsets used for compensation
};

// Background-motion compensation (phase correlation), thresholding against a
// motion-compensated temporal-median plate, morphological closing, then the
// largest connected component per frame.
SegmentationResult segment_motion(const VideoClip& clip, const DecomposerConfig& cfg);

// Chebyshev-radius morphological closing and largest-component filtering,
// shared by segmentation and the evaluation harness's subject locator.
MaskVideo mask_morph_close(const MaskVideo& mask, int radius);
void mask_keep_largest_component(MaskVideo& mask);

// clip inside mask, zero outside.
VideoClip extract_foreground(const VideoClip& clip, const MaskVideo& mask);

// Outside-mask pixels copied verbatim. Masked pixels take the temporal
// median of motion-compensated co-located unmasked observations when any
// exist, else iterative spatial averaging from the hole boundary
// (unknowns start at mid-gray; convergence at max-change < 1e-4).
VideoClip inpaint_background(const VideoClip& clip, const MaskVideo& mask,
                             const DecomposerConfig& cfg);

// ---- attribute classifiers (shared with the evaluation harness) ----

struct TrackPoint {
    double x = 0, y = 0;
    bool valid = false;
};
std::vector<TrackPoint> centroid_track(const MaskVideo& mask);

// Constrained least-squares residuals per trajectory class, in the order
// {linear-left, linear-right, sinusoidal, bounce, static}. Mean squared
// residual per valid frame.
std::array<double, 5> trajectory_fit_residuals(const std::vector<TrackPoint>& track);

int classify_color(const VideoClip& clip, const MaskVideo& mask);  // sprite palette index
world::Shape classify_shape(const MaskVideo& mask);
world::Trajectory classify_trajectory(const std::vector<TrackPoint>& track);
world::SceneClass classify_scene(const VideoClip& background);

// Partial layer view for captioning.
struct CaptionInput {
    const VideoClip* clip = nullptr;        // original pixels
    const MaskVideo* mask = nullptr;
    const VideoClip* background = nullptr;  // inpainted background
    bool no_subject = false;
};
std::string caption_clip(const CaptionInput& in);

// Full algorithmic pipeline; consumes pixels only.
world::LayerSet decompose(const VideoClip& clip, const DecomposerConfig& cfg);

// Oracle path: passes the generator's stored layers through unchanged.
inline world::LayerSet decompose_oracle(const world::LayerSet& generated) { return generated; }

}  // namespace lc::decompose
