#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "lc/decompose/decomposer.hpp"
#include "lc/eval/benchmark.hpp"
#include "lc/eval/metrics.hpp"

using namespace lc;
using namespace lc::eval;

namespace {
std::pair<VideoClip, MaskVideo> sprite_clip(int t, int h, int w,
                                            std::array<float, 3> color, int y0, int x0, int side,
                                            float vx = 0.0f) {
    VideoClip clip(t, h, w);
    MaskVideo mask(t, h, w);
    for (int f = 0; f < t; ++f) {
        int ox = x0 + int(std::lround(vx * f));
        for (int y = y0; y < y0 + side; ++y)
            for (int x = ox; x < ox + side; ++x) {
                mask.at(f, y, x) = 1;
                for (int c = 0; c < 3; ++c) clip.at(f, y, x, c) = color[c];
            }
    }
    return {clip, mask};
}

// wrap-scrolling value-noise texture: dx px/frame, non-degenerate
VideoClip scroll_clip(int t, int h, int w, int dx, uint64_t seed) {
    std::vector<float> base(size_t(h) * w * 3);
    Rng rng(seed);
    for (auto& v : base) v = quantize255(float(rng.unit()));
    VideoClip clip(t, h, w);
    for (int f = 0; f < t; ++f)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                int sx = ((x - dx * f) % w + w) % w;
                for (int c = 0; c < 3; ++c)
                    clip.at(f, y, x, c) = base[(size_t(y) * w + sx) * 3 + c];
            }
    return clip;
}
}  // namespace

TEST_CASE("descriptor: identity gives exactly 1.0, unit norm") {
    auto [clip, mask] = sprite_clip(4, 32, 32, {0.8f, 0.1f, 0.1f}, 10, 8, 7, 1.0f);
    auto d = descriptor(clip, &mask);
    double norm = 0;
    for (double v : d) norm += v * v;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(cosine_similarity(d, d) == 1.0);
}

TEST_CASE("descriptor: red vs blue sprite of the same shape scores < 0.6") {
    // bin-disjoint channel values in all three channels
    auto [ra, ma] = sprite_clip(4, 32, 32, {0.863f, 0.157f, 0.118f}, 10, 8, 7);
    auto [bb, mb] = sprite_clip(4, 32, 32, {0.118f, 0.353f, 0.863f}, 10, 8, 7);
    auto da = descriptor(ra, &ma);
    auto db = descriptor(bb, &mb);
    // color sub-vectors occupy disjoint bins
    double color_dot = 0;
    for (int i = 0; i < 24; ++i) color_dot += da[i] * db[i];
    CHECK(color_dot == 0.0);
    CHECK(cosine_similarity(da, db) < 0.6);
    CHECK(cosine_similarity(da, db) > 0.3);  // shape block still matches
}

TEST_CASE("descriptor: empty mask flags and zeroes the shape block") {
    auto [clip, mask] = sprite_clip(4, 32, 32, {0.8f, 0.1f, 0.1f}, 10, 8, 7);
    MaskVideo empty(4, 32, 32);
    bool flagged = false;
    auto d = descriptor(clip, &empty, &flagged);
    CHECK(flagged);
    for (size_t i = 24; i < d.size(); ++i) CHECK(d[i] == 0.0);
    bool flagged2 = false;
    descriptor(clip, &mask, &flagged2);
    CHECK_FALSE(flagged2);
}

TEST_CASE("action_distribution: identity KL is exactly zero, KL >= 0") {
    world::WorldConfig cfg;
    cfg.trajectories = {"linear-right", "bounce"};
    auto ls = world::generate_clip(3, cfg);
    bool und = false;
    auto p = action_distribution(ls.foreground, ls.mask, &und);
    CHECK_FALSE(und);
    CHECK(kl_divergence(p, p) == 0.0);

    auto ls2 = world::generate_clip(4, cfg);
    auto q = action_distribution(ls2.foreground, ls2.mask, &und);
    CHECK(kl_divergence(p, q) >= 0.0);
    CHECK(kl_divergence(q, p) >= 0.0);
}

TEST_CASE("action_distribution: argmax matches labels on 200 clips") {
    world::WorldConfig cfg;
    int correct = 0;
    const int N = 200;
    for (uint64_t seed = 3000; seed < 3000 + N; ++seed) {
        auto ls = world::generate_clip(seed, cfg);
        bool und = false;
        auto p = action_distribution(ls.foreground, ls.mask, &und);
        REQUIRE_FALSE(und);
        int arg = 0;
        for (int i = 1; i < 5; ++i)
            if (p[i] > p[arg]) arg = i;
        static const world::Trajectory order[5] = {
            world::Trajectory::linear_left, world::Trajectory::linear_right,
            world::Trajectory::sinusoidal, world::Trajectory::bounce, world::Trajectory::fixed};
        if (order[arg] == ls.meta.sprite.trajectory) ++correct;
    }
    INFO("accuracy ", correct, "/", N);
    CHECK(correct >= int(0.9 * N));
}

TEST_CASE("action_distribution: mostly-empty mask is flagged undefined") {
    VideoClip clip(8, 16, 16);
    MaskVideo mask(8, 16, 16);
    mask.at(0, 4, 4) = 1;  // visible in 1 of 8 frames
    bool und = false;
    action_distribution(clip, mask, &und);
    CHECK(und);
}

TEST_CASE("flow: identical videos give exactly zero MSE") {
    VideoClip clip = scroll_clip(6, 32, 32, 1, 5);
    CHECK(flow_mse(clip, clip) == 0.0);
}

TEST_CASE("flow: 2 px/frame scroll matches everywhere; vs static gives 4.0") {
    VideoClip moving = scroll_clip(6, 32, 32, 2, 9);
    // every estimated vector is (0, 2)
    for (int f = 0; f + 1 < moving.t; ++f) {
        auto flow = block_flow(moving, f);
        for (auto& u : flow) {
            CHECK(u[0] == 0);
            CHECK(u[1] == 2);
        }
    }
    VideoClip still(6, 32, 32);
    for (int f = 0; f < 6; ++f)
        for (size_t i = 0; i < still.data.size() / 6; ++i)
            still.data[size_t(f) * (still.data.size() / 6) + i] = moving.data[i];
    CHECK(flow_mse(moving, still) == 4.0);
}

TEST_CASE("parse_caption: grammar and errors") {
    auto p = parse_caption("a red circle moving linear-right over water");
    CHECK_FALSE(p.scene_only);
    CHECK(p.color == "red");
    CHECK(p.shape == "circle");
    CHECK(p.trajectory == "linear-right");
    CHECK(p.scene == "water");
    auto s = parse_caption("a sky scene");
    CHECK(s.scene_only);
    CHECK(s.scene == "sky");
    CHECK_THROWS_AS(parse_caption("a purple blob moving weirdly over lava"), contract_error);
    CHECK_THROWS_AS(parse_caption(""), contract_error);
}

TEST_CASE("textual_alignment: own caption scores 1.0; wrong color scores 0.75") {
    world::WorldConfig cfg;
    cfg.trajectories = {"linear-left", "linear-right", "bounce"};
    cfg.camera_speeds = {0};
    auto ls = world::generate_clip(21, cfg);
    double self_score = textual_alignment(ls.original, ls.caption);
    CHECK(self_score == 1.0);

    // alter only the color word
    auto parsed = parse_caption(ls.caption);
    std::string wrong_color = parsed.color == "red" ? "yellow" : "red";
    std::string wrong = world::make_caption(wrong_color, parsed.shape, parsed.trajectory,
                                            parsed.scene);
    CHECK(textual_alignment(ls.original, wrong) == 0.75);
}

TEST_CASE("textual_alignment: scrambled captions score near chance on random pairs") {
    world::WorldConfig cfg;
    Rng rng(77);
    double total = 0;
    const int N = 40;
    const char* colors[] = {"red", "yellow", "magenta", "white"};
    const char* shapes[] = {"circle", "square", "triangle"};
    const char* trajs[] = {"linear-left", "linear-right", "sinusoidal", "bounce", "static"};
    const char* scenes[] = {"water", "ground", "sky"};
    for (int i = 0; i < N; ++i) {
        auto ls = world::generate_clip(5000 + i, cfg);
        std::string scrambled =
            world::make_caption(colors[rng.uniform_int(0, 3)], shapes[rng.uniform_int(0, 2)],
                                trajs[rng.uniform_int(0, 4)], scenes[rng.uniform_int(0, 2)]);
        total += textual_alignment(ls.original, scrambled);
    }
    CHECK(total / N <= 0.4);
}

TEST_CASE("locate_subject: finds a pasted sprite against its background") {
    world::WorldConfig cfg;
    auto ls = world::generate_clip(33, cfg);
    MaskVideo loc = locate_subject(ls.original, ls.background);
    size_t inter = 0, uni = 0;
    for (size_t i = 0; i < loc.data.size(); ++i) {
        inter += loc.data[i] && ls.mask.data[i];
        uni += loc.data[i] || ls.mask.data[i];
    }
    CHECK(double(inter) / uni > 0.75);
}

TEST_CASE("evaluate_benchmark: oracle-original on self-pairs is near-perfect") {
    std::string dir = "/tmp/lc_eval_selfpairs";
    std::filesystem::remove_all(dir);
    world::WorldConfig cfg;
    cfg.trajectories = {"linear-left", "linear-right", "sinusoidal", "bounce"};
    world::BuildOptions opts;
    opts.split_ratios = {0.4, 0.0, 0.6};
    opts.seed = 3;
    world::DatasetManifest m = world::build_dataset(20, cfg, opts, dir);
    // rewrite triplets as self-pairs: fg and bg from the same clip
    for (auto& t : m.triplets) {
        t.bg_clip = t.fg_clip;
        auto meta = world::load_clip_meta(m.clip_dir(t.fg_clip));
        t.prompt = world::make_caption(
            world::sprite_palette()[meta.sprite.color_id].name, world::to_string(meta.sprite.shape),
            world::to_string(meta.sprite.trajectory), world::to_string(meta.background.scene));
        t.shift_dy = t.shift_dx = 0;
        t.displaced = false;
    }
    world::save_manifest(m, dir);
    auto data = world::load_manifest(dir);

    eval::BenchmarkOptions bo;
    bo.method = eval::Method::oracle_original;
    bo.max_triplets = 8;
    auto rep = evaluate_benchmark(nullptr, data, bo);
    CHECK(rep.n_failed == 0);
    CHECK(rep.rows.size() == 8);  // report row count == triplet count
    CHECK(rep.m1_fg >= 0.99);
    CHECK(rep.m1_bg >= 0.99);
    CHECK(rep.m2 <= 0.05);
    CHECK(rep.m3 <= 0.05);
    CHECK(rep.m4 >= 0.9);
    CHECK(rep.afford_rate >= 0.95);  // generator output is in-band by construction
    std::filesystem::remove_all(dir);
}

TEST_CASE("evaluate_benchmark: copy-paste on displaced triplets misses the band") {
    std::string dir = "/tmp/lc_eval_displaced";
    std::filesystem::remove_all(dir);
    world::WorldConfig cfg;
    cfg.camera_speeds = {-2, -1, 1, 2};
    world::BuildOptions opts;
    opts.split_ratios = {0.4, 0.0, 0.6};
    opts.seed = 5;
    opts.benchmark_triplets = 10;
    opts.displace_out_of_band = true;
    world::build_dataset(20, cfg, opts, dir);
    auto data = world::load_manifest(dir);

    eval::BenchmarkOptions bo;
    bo.method = eval::Method::copy_paste;
    auto rep = evaluate_benchmark(nullptr, data, bo);
    CHECK(rep.rows.size() == 10);
    CHECK(rep.afford_rate <= 0.2);
    CHECK(rep.m3 > 0.5);  // frozen background loses the camera motion
    std::filesystem::remove_all(dir);
}

TEST_CASE("pearson: correlation sanity") {
    std::vector<double> xs = {1, 2, 3, 4, 5};
    std::vector<double> ys = {2, 4, 6, 8, 10};
    CHECK(pearson(xs, ys) == doctest::Approx(1.0));
    std::vector<double> inv = {10, 8, 6, 4, 2};
    CHECK(pearson(xs, inv) == doctest::Approx(-1.0));
}
