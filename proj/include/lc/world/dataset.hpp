#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lc/world/world.hpp"

namespace lc::world {

// On-disk clip layout, one directory per clip:
//   original.npy  fg.npy  bg.npy   (u8, (T,H,W,3))
//   mask.lcbm                      (bit-packed, (T,H,W))
//   meta.json                      (caption + generator metadata)
void save_clip_dir(const std::string& dir, const LayerSet& layers);
LayerSet load_clip_dir(const std::string& dir);

// Cheap partial loaders for pipelines that need a single layer.
VideoClip load_clip_layer(const std::string& dir, const std::string& layer);  // original|fg|bg
MaskVideo load_clip_mask(const std::string& dir);
ClipMeta load_clip_meta(const std::string& dir, std::string* caption = nullptr);

struct TestTriplet {
    std::string fg_clip;  // clip id supplying foreground + mask (+ sprite labels)
    std::string bg_clip;  // clip id supplying background (+ band)
    std::string prompt;
    int shift_dy = 0, shift_dx = 0;  // applied to fg/mask at load time
    bool displaced = false;
};

struct DatasetManifest {
    WorldConfig world;
    uint64_t seed = 0;
    std::vector<std::string> clip_ids;
    std::vector<std::string> train, val, test;
    std::vector<TestTriplet> triplets;
    std::string root;  // directory holding clips/ (set on load)

    std::string clip_dir(const std::string& id) const;
};

struct BuildOptions {
    std::array<double, 3> split_ratios = {0.8, 0.1, 0.1};
    uint64_t seed = 0;
    int benchmark_triplets = 0;      // 0: one triplet per test clip (self-pair layout unused)
    bool displace_out_of_band = false;
    int displace_margin_px = 4;
};

// Generates n clips, writes clip dirs + manifest.json under out_dir.
DatasetManifest build_dataset(int n, const WorldConfig& cfg, const BuildOptions& opts,
                              const std::string& out_dir);

DatasetManifest load_manifest(const std::string& dir);
void save_manifest(const DatasetManifest& m, const std::string& dir);

// Materializes a triplet's conditioning inputs (fg/mask shifted per record).
struct TripletInputs {
    VideoClip fg;
    MaskVideo mask;
    VideoClip bg;
    std::string prompt;
    ClipMeta fg_meta, bg_meta;
};
TripletInputs load_triplet(const DatasetManifest& m, const TestTriplet& t);

// Vertical displacement that puts the whole sprite track outside the band.
// Returns nullopt when no in-frame placement exists.
std::optional<int> out_of_band_shift(const ClipMeta& fg_meta, const BackgroundSpec& bg, int frames,
                                     int frame_h, int margin_px, Rng& rng);

}  // namespace lc::world
