#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lc/core/video.hpp"
#include "lc/world/world.hpp"

namespace lc::eval {

// Handcrafted layer descriptor: an 8-bins-per-channel color histogram over
// masked pixels plus area-normalized central moments of the mask, each
// block unit-normalized before the final L2 normalization. With no (or an
// empty) mask the histogram covers the full frame, the shape block is
// zeroed, and *flagged is set.
std::vector<double> descriptor(const VideoClip& clip, const MaskVideo* mask,
                               bool* flagged = nullptr);

// Exact 1.0 for bitwise-identical inputs.
double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

// Probability over {linear-left, linear-right, sinusoidal, bounce, static}
// from the centroid-track fit residuals. *undefined is set when the mask is
// empty in more than half of the frames.
std::array<double, 5> action_distribution(const VideoClip& fg, const MaskVideo& mask,
                                          bool* undefined);

// KL(p||q) with epsilon smoothing; exactly 0 for identical distributions.
double kl_divergence(const std::array<double, 5>& p, const std::array<double, 5>& q);

// Dense integer flow by exhaustive block matching (8x8 blocks, +-4 px),
// (dy, dx) per block; ties resolve toward the smallest displacement.
std::vector<std::array<int, 2>> block_flow(const VideoClip& clip, int frame);

// Mean squared flow-vector difference over all frame pairs and blocks.
double flow_mse(const VideoClip& bg_in, const VideoClip& bg_out);

struct ParsedCaption {
    bool scene_only = false;
    std::string color, shape, trajectory, scene;
};
ParsedCaption parse_caption(const std::string& caption);  // contract error if unparseable

// Fraction of caption attributes matched by classifying the video through
// the decomposition machinery.
double textual_alignment(const VideoClip& video, const std::string& caption);
// Same, reusing already-decomposed output layers.
double textual_alignment_layers(const world::LayerSet& layers, const std::string& caption);

// Subject localization for affordance scoring: thresholded difference
// against the conditioning background (both per-frame and frame-0
// references), closed and reduced to the largest component per frame.
MaskVideo locate_subject(const VideoClip& output, const VideoClip& bg, double threshold = 0.12);

double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace lc::eval
