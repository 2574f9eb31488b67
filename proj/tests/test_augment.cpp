#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lc/augment/augment.hpp"
#include "lc/world/world.hpp"

using namespace lc;
using namespace lc::augment;

namespace {
// foreground + mask with a solid square sprite
std::pair<VideoClip, MaskVideo> square_sprite(int t, int h, int w, int y0, int x0, int side) {
    VideoClip fg(t, h, w);
    MaskVideo mask(t, h, w);
    for (int f = 0; f < t; ++f)
        for (int y = y0; y < y0 + side; ++y)
            for (int x = x0; x < x0 + side; ++x) {
                mask.at(f, y, x) = 1;
                fg.at(f, y, x, 0) = 0.8f;
                fg.at(f, y, x, 1) = 0.2f;
                fg.at(f, y, x, 2) = 0.1f;
            }
    return {fg, mask};
}

double centroid_x(const MaskVideo& m, int frame) {
    double sx = 0;
    long n = 0;
    for (int y = 0; y < m.h; ++y)
        for (int x = 0; x < m.w; ++x)
            if (m.at(frame, y, x)) {
                sx += x;
                ++n;
            }
    return sx / n;
}
}  // namespace

TEST_CASE("apply: identity params are bit-exact") {
    auto [fg, mask] = square_sprite(4, 32, 32, 10, 6, 8);
    auto p = AugmentParams::identity(32, 32);
    auto [ofg, omask] = apply(fg, mask, p);
    CHECK(ofg.data == fg.data);
    CHECK(omask.data == mask.data);
}

TEST_CASE("apply: flip mirrors the centroid; double flip is identity") {
    auto [fg, mask] = square_sprite(4, 32, 32, 10, 4, 6);
    AugmentParams p = AugmentParams::identity(32, 32);
    p.flipped = true;
    auto [f1, m1] = apply(fg, mask, p);
    CHECK(centroid_x(m1, 0) == doctest::Approx(32 - 1 - centroid_x(mask, 0)).epsilon(1e-12));
    auto [f2, m2] = apply(f1, m1, p);
    CHECK(f2.data == fg.data);
    CHECK(m2.data == mask.data);
}

TEST_CASE("apply: fg stays exactly zero outside the transformed mask") {
    auto [fg, mask] = square_sprite(3, 32, 32, 12, 9, 7);
    Rng rng(5);
    AugmentConfig cfg;
    for (int draw = 0; draw < 100; ++draw) {
        AugmentParams p = sample_params(mask, rng, cfg);
        auto [ofg, omask] = apply(fg, mask, p);
        for (size_t i = 0; i < omask.data.size(); ++i)
            if (!omask.data[i]) {
                CHECK(ofg.data[i * 3] == 0.0f);
                CHECK(ofg.data[i * 3 + 1] == 0.0f);
                CHECK(ofg.data[i * 3 + 2] == 0.0f);
            }
    }
}

TEST_CASE("sample_params: crop retention constraint always holds") {
    auto [fg, mask] = square_sprite(4, 64, 64, 30, 20, 10);
    Rng rng(17);
    AugmentConfig cfg;
    int crops = 0;
    for (int draw = 0; draw < 2000; ++draw) {
        AugmentParams p = sample_params(mask, rng, cfg);
        if (!p.crop_applied) continue;
        ++crops;
        CHECK(p.scale >= cfg.scale_lo);
        CHECK(p.scale <= cfg.scale_hi);
        double retained = retained_mask_fraction(p.flipped ? flip_x(mask) : mask, p.crop_box);
        CHECK(retained >= cfg.min_retain);
        for (double d : p.color_delta) {
            CHECK(d >= 0.0);
            CHECK(d <= cfg.color_max);
        }
    }
    CHECK(crops > 1000);
}

TEST_CASE("sample_params: empirical rates near the configured probabilities") {
    auto [fg, mask] = square_sprite(2, 64, 64, 28, 24, 9);
    Rng rng(23);
    AugmentConfig cfg;
    int flips = 0, crops = 0, colors = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        AugmentParams p = sample_params(mask, rng, cfg);
        flips += p.flipped;
        crops += p.crop_applied;
        colors += p.color_applied;
    }
    CHECK(double(flips) / n == doctest::Approx(0.7).epsilon(0.02));
    CHECK(double(crops) / n == doctest::Approx(0.7).epsilon(0.02));
    CHECK(double(colors) / n == doctest::Approx(0.2).epsilon(0.06));
}

TEST_CASE("sample_params: forced-off probabilities give identity params") {
    auto [fg, mask] = square_sprite(2, 32, 32, 10, 10, 6);
    Rng rng(3);
    AugmentConfig cfg;
    cfg.p_flip = cfg.p_crop = cfg.p_color = 0.0;
    AugmentParams p = sample_params(mask, rng, cfg);
    CHECK_FALSE(p.flipped);
    CHECK_FALSE(p.crop_applied);
    CHECK_FALSE(p.color_applied);
    CHECK(p.crop_box.is_identity(32, 32));
    auto [ofg, omask] = apply(fg, mask, p);
    CHECK(ofg.data == fg.data);
}

TEST_CASE("sample_params: degenerate all-zero mask flags and stays identity") {
    MaskVideo empty(2, 16, 16);
    Rng rng(9);
    AugmentParams p = sample_params(empty, rng, AugmentConfig{});
    CHECK(p.degenerate_mask);
    CHECK(p.crop_box.is_identity(16, 16));
    CHECK_FALSE(p.flipped);
}

TEST_CASE("apply: color jitter touches only masked pixels and moves them") {
    auto [fg, mask] = square_sprite(2, 32, 32, 8, 8, 10);
    AugmentParams p = AugmentParams::identity(32, 32);
    p.color_applied = true;
    p.color_delta = {0.1, 0.05, 0.1, 0.0};
    auto [ofg, omask] = apply(fg, mask, p);
    CHECK(omask.data == mask.data);
    bool changed = false;
    for (size_t i = 0; i < mask.data.size(); ++i) {
        if (mask.data[i]) {
            if (ofg.data[i * 3] != fg.data[i * 3]) changed = true;
        } else {
            CHECK(ofg.data[i * 3] == 0.0f);
        }
    }
    CHECK(changed);
}

TEST_CASE("apply: shape mismatch is a contract error") {
    auto [fg, mask] = square_sprite(2, 32, 32, 8, 8, 6);
    MaskVideo wrong(2, 16, 16);
    CHECK_THROWS_AS(apply(fg, wrong, AugmentParams::identity(32, 32)), contract_error);
}
