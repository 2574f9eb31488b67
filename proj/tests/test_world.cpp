#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <set>

#include "lc/core/error.hpp"
#include "lc/world/dataset.hpp"
#include "lc/world/world.hpp"

using namespace lc;
using namespace lc::world;

namespace {
double mask_center_y(const MaskVideo& m, int frame) {
    double sy = 0;
    long n = 0;
    for (int y = 0; y < m.h; ++y)
        for (int x = 0; x < m.w; ++x)
            if (m.at(frame, y, x)) {
                sy += y;
                ++n;
            }
    return n ? sy / n : -1.0;
}
}  // namespace

TEST_CASE("generate_clip: deterministic and mask non-empty in every frame") {
    WorldConfig cfg;
    LayerSet a = generate_clip(0, cfg);
    LayerSet b = generate_clip(0, cfg);
    CHECK(a.original.data == b.original.data);
    CHECK(a.foreground.data == b.foreground.data);
    CHECK(a.background.data == b.background.data);
    CHECK(a.mask.data == b.mask.data);
    CHECK(a.caption == b.caption);
    for (int f = 0; f < cfg.t; ++f) {
        size_t n = 0;
        for (int y = 0; y < cfg.h; ++y)
            for (int x = 0; x < cfg.w; ++x) n += a.mask.at(f, y, x);
        CHECK(n > 0);
    }
    LayerSet c = generate_clip(1, cfg);
    CHECK(c.original.data != a.original.data);
}

TEST_CASE("generate_clip: exact layer consistency") {
    WorldConfig cfg;
    for (uint64_t seed : {0, 7, 123}) {
        LayerSet ls = generate_clip(seed, cfg);
        VideoClip re = compose_layers(ls.foreground, ls.mask, ls.background);
        float max_diff = 0;
        for (size_t i = 0; i < re.data.size(); ++i)
            max_diff = std::max(max_diff, std::fabs(re.data[i] - ls.original.data[i]));
        CHECK(max_diff == 0.0f);
    }
}

TEST_CASE("generate_clip: sprite center inside the affordance band, 1000 seeds") {
    WorldConfig cfg;
    int violations = 0;
    for (uint64_t seed = 0; seed < 1000; ++seed) {
        LayerSet ls = generate_clip(seed, cfg);
        const auto& bg = ls.meta.background;
        float lo = bg.band_lo * cfg.h, hi = bg.band_hi * cfg.h;
        for (int f = 0; f < cfg.t; ++f) {
            auto c = sprite_center(ls.meta.sprite, f);
            if (!(c[1] >= lo && c[1] <= hi)) ++violations;
            // bounding box inside the frame
            float r = ls.meta.sprite.size * 0.5f;
            CHECK(c[0] - r >= -1e-3);
            CHECK(c[0] + r <= cfg.w - 1 + 1e-3);
            CHECK(c[1] - r >= -1e-3);
            CHECK(c[1] + r <= cfg.h - 1 + 1e-3);
        }
    }
    CHECK(violations == 0);
}

TEST_CASE("generate_clip: rendered mask tracks the analytic center") {
    WorldConfig cfg;
    LayerSet ls = generate_clip(42, cfg);
    for (int f = 0; f < cfg.t; ++f) {
        auto c = sprite_center(ls.meta.sprite, f);
        double cy = mask_center_y(ls.mask, f);
        CHECK(std::fabs(cy - c[1]) < 1.5);
    }
}

TEST_CASE("generate_clip: invalid configs rejected") {
    WorldConfig bad;
    bad.t = 1;
    CHECK_THROWS_AS(generate_clip(0, bad), config_error);
    WorldConfig big;
    big.sprite_size_min = big.sprite_size_max = 70;
    CHECK_THROWS_AS(generate_clip(0, big), config_error);
}

TEST_CASE("temporal_chunk: chunk counts and the identity case") {
    VideoClip clip98(98, 4, 4);
    CHECK(temporal_chunk(clip98, 49, 1).size() == 2);

    VideoClip clip16(16, 4, 4);
    for (size_t i = 0; i < clip16.data.size(); ++i) clip16.data[i] = float(i % 97) / 97.0f;
    auto chunks = temporal_chunk(clip16, 16, 1);
    REQUIRE(chunks.size() == 1);
    CHECK(chunks[0].data == clip16.data);

    VideoClip short_clip(10, 4, 4);
    CHECK(temporal_chunk(short_clip, 49, 1).empty());
}

TEST_CASE("temporal_chunk: downsample-then-chunk index oracle") {
    // frame index encoded in pixel values
    VideoClip clip(100, 2, 2);
    for (int f = 0; f < 100; ++f)
        for (int y = 0; y < 2; ++y)
            for (int x = 0; x < 2; ++x)
                for (int c = 0; c < 3; ++c) clip.at(f, y, x, c) = float(f);
    auto chunks = temporal_chunk(clip, 16, 2);
    REQUIRE(chunks.size() == 3);
    for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 16; ++i) {
            int expected_src = 2 * (16 * k + i);  // {0,2,..,30},{32..62},{64..94}
            CHECK(chunks[k].at(i, 0, 0, 0) == float(expected_src));
        }
    CHECK_THROWS_AS(temporal_chunk(clip, 16, 5), contract_error);
    CHECK_THROWS_AS(temporal_chunk(clip, 1, 2), contract_error);
}

TEST_CASE("build_dataset: splits, cross-pairing, benchmark count") {
    std::string dir = "/tmp/lc_test_dataset";
    std::filesystem::remove_all(dir);
    WorldConfig cfg;
    cfg.t = 8;
    cfg.h = 32;
    cfg.w = 32;
    cfg.sprite_size_min = 6;
    cfg.sprite_size_max = 9;
    BuildOptions opts;
    opts.split_ratios = {0.8, 0.1, 0.1};
    opts.benchmark_triplets = 93;
    DatasetManifest m = build_dataset(100, cfg, opts, dir);

    CHECK(m.train.size() == 80);
    CHECK(m.val.size() == 10);
    CHECK(m.test.size() == 10);
    std::set<std::string> all;
    for (const auto& v : {m.train, m.val, m.test})
        for (const auto& id : v) CHECK(all.insert(id).second);  // no overlap
    CHECK(all.size() == 100);

    REQUIRE(m.triplets.size() == 93);
    for (const auto& t : m.triplets) CHECK(t.fg_clip != t.bg_clip);

    // round-trip through disk
    DatasetManifest m2 = load_manifest(dir);
    CHECK(m2.train == m.train);
    CHECK(m2.triplets.size() == m.triplets.size());
    LayerSet ls = load_clip_dir(m.clip_dir(m.clip_ids[0]));
    LayerSet gen = generate_clip(Rng::mix({opts.seed, 0}), cfg);
    CHECK(ls.original.data == gen.original.data);
    CHECK(ls.mask.data == gen.mask.data);
    CHECK(ls.caption == gen.caption);

    std::filesystem::remove_all(dir);
}

TEST_CASE("build_dataset: displaced triplets leave the band in every frame") {
    std::string dir = "/tmp/lc_test_dataset_disp";
    std::filesystem::remove_all(dir);
    WorldConfig cfg;  // default 16x64x64
    BuildOptions opts;
    opts.split_ratios = {0.6, 0.0, 0.4};
    opts.benchmark_triplets = 20;
    opts.displace_out_of_band = true;
    DatasetManifest m = build_dataset(30, cfg, opts, dir);
    REQUIRE(m.triplets.size() == 20);
    int displaced = 0;
    for (const auto& t : m.triplets) {
        if (!t.displaced) continue;
        ++displaced;
        auto in = load_triplet(m, t);
        float lo = in.bg_meta.background.band_lo * cfg.h;
        float hi = in.bg_meta.background.band_hi * cfg.h;
        for (int f = 0; f < cfg.t; ++f) {
            auto c = sprite_center(in.fg_meta.sprite, f);
            float cy = c[1] + t.shift_dy;
            CHECK((cy < lo || cy > hi));
        }
    }
    CHECK(displaced >= 18);  // geometry admits a shift almost always
    std::filesystem::remove_all(dir);
}

TEST_CASE("build_dataset: contract errors") {
    WorldConfig cfg;
    BuildOptions opts;
    CHECK_THROWS_AS(build_dataset(5, cfg, opts, "/tmp/lc_nope"), contract_error);
    BuildOptions bad;
    bad.split_ratios = {0.5, 0.2, 0.2};
    CHECK_THROWS_AS(build_dataset(20, cfg, bad, "/tmp/lc_nope"), contract_error);
    CHECK_THROWS_AS(build_dataset(20, cfg, opts, "/dev/null/x"), io_error);
}
