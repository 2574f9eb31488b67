#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lc/codec/codec.hpp"
#include "lc/core/error.hpp"
#include "lc/core/rng.hpp"

using namespace lc;
using namespace lc::codec;

namespace {
VideoClip random_clip(int t, int h, int w, uint64_t seed) {
    VideoClip clip(t, h, w);
    Rng rng(seed);
    for (auto& v : clip.data) v = float(rng.unit());
    return clip;
}
MaskVideo random_mask(int t, int h, int w, uint64_t seed, double p = 0.3) {
    MaskVideo m(t, h, w);
    Rng rng(seed);
    for (auto& v : m.data) v = rng.bernoulli(p) ? 1 : 0;
    return m;
}
}  // namespace

TEST_CASE("encode: default shape arithmetic 16x64x64 -> 8x8x8x384") {
    VideoCodec codec{CodecConfig{}};
    VideoClip clip = random_clip(16, 64, 64, 1);
    Latent z = codec.encode(clip);
    CHECK(z.t == 8);
    CHECK(z.h == 8);
    CHECK(z.w == 8);
    CHECK(z.c == 384);
    CHECK(z.c == 2 * 8 * 8 * 3);
}

TEST_CASE("codec: exact invertibility within 1e-5") {
    VideoCodec codec{CodecConfig{}};
    for (uint64_t seed = 0; seed < 5; ++seed) {
        VideoClip clip = random_clip(16, 64, 64, seed);
        VideoClip back = codec.decode(codec.encode(clip));
        float max_diff = 0;
        for (size_t i = 0; i < clip.data.size(); ++i)
            max_diff = std::max(max_diff, std::fabs(clip.data[i] - back.data[i]));
        CHECK(max_diff < 1e-5f);
    }
}

TEST_CASE("codec: zero clip maps to zero latent") {
    VideoCodec codec{CodecConfig{}};
    VideoClip zero(8, 16, 16);
    CodecConfig small;
    small.f_t = 2;
    small.f_h = 8;
    small.f_w = 8;
    VideoCodec c2{small};
    Latent z = c2.encode(zero);
    for (float v : z.data) CHECK(v == 0.0f);
}

TEST_CASE("codec: locality - zeroing one pixel patch changes exactly one cell") {
    CodecConfig cfg;
    VideoCodec codec{cfg};
    VideoClip clip = random_clip(16, 64, 64, 3);
    Latent z0 = codec.encode(clip);
    // zero the patch covering latent cell (1, 2, 3)
    for (int dt = 0; dt < cfg.f_t; ++dt)
        for (int dy = 0; dy < cfg.f_h; ++dy)
            for (int dx = 0; dx < cfg.f_w; ++dx)
                for (int c = 0; c < 3; ++c)
                    clip.at(1 * cfg.f_t + dt, 2 * cfg.f_h + dy, 3 * cfg.f_w + dx, c) = 0.0f;
    Latent z1 = codec.encode(clip);
    int changed_cells = 0;
    for (size_t cell = 0; cell < z0.cells(); ++cell) {
        bool diff = false;
        for (int c = 0; c < z0.c; ++c)
            if (z0.cell(cell)[c] != z1.cell(cell)[c]) diff = true;
        if (diff) ++changed_cells;
    }
    CHECK(changed_cells == 1);
}

TEST_CASE("codec: random latent re-encodes to itself where unclamped") {
    VideoCodec codec{CodecConfig{}};
    // decode a latent that came from a valid clip (stays in [0,1], no clamping)
    VideoClip clip = random_clip(16, 64, 64, 11);
    Latent z = codec.encode(clip);
    Latent z2 = codec.encode(codec.decode(z));
    float max_diff = 0;
    for (size_t i = 0; i < z.data.size(); ++i)
        max_diff = std::max(max_diff, std::fabs(z.data[i] - z2.data[i]));
    CHECK(max_diff < 1e-4f);
}

TEST_CASE("codec: contract errors") {
    VideoCodec codec{CodecConfig{}};
    VideoClip bad(15, 64, 64);
    CHECK_THROWS_AS(codec.encode(bad), contract_error);
    Latent z(2, 2, 2, 7, {2, 8, 8});
    CHECK_THROWS_AS(codec.decode(z), contract_error);
    MaskVideo m(15, 64, 64);
    CHECK_THROWS_AS(codec.downsample_mask(m), contract_error);
}

TEST_CASE("downsample_mask: means, half-covered patch, mass conservation") {
    CodecConfig cfg;
    VideoCodec codec{cfg};

    MaskVideo ones(16, 64, 64);
    std::fill(ones.data.begin(), ones.data.end(), 1);
    FracMask f1 = codec.downsample_mask(ones);
    for (float v : f1.data) CHECK(v == 1.0f);

    // exactly half of one patch
    MaskVideo half(16, 64, 64);
    for (int dt = 0; dt < 2; ++dt)
        for (int dy = 0; dy < 8; ++dy)
            for (int dx = 0; dx < 4; ++dx) half.at(dt, dy, dx) = 1;
    FracMask fh = codec.downsample_mask(half);
    CHECK(fh.data[0] == 0.5f);

    // brute-force per-patch mean oracle + exact mass conservation
    MaskVideo rnd = random_mask(16, 64, 64, 5);
    FracMask fr = codec.downsample_mask(rnd);
    double latent_mass = 0;
    size_t cell = 0;
    for (int i = 0; i < fr.t; ++i)
        for (int j = 0; j < fr.h; ++j)
            for (int k = 0; k < fr.w; ++k, ++cell) {
                int cnt = 0;
                for (int dt = 0; dt < 2; ++dt)
                    for (int dy = 0; dy < 8; ++dy)
                        for (int dx = 0; dx < 8; ++dx)
                            cnt += rnd.at(i * 2 + dt, j * 8 + dy, k * 8 + dx);
                CHECK(fr.data[cell] == float(cnt) / 128.0f);
                latent_mass += double(fr.data[cell]);
            }
    CHECK(latent_mass * 128.0 == double(rnd.count()));
}

TEST_CASE("text: tokenize, determinism, single-word difference, OOV") {
    CodecConfig cfg;
    TextCodec tc(cfg);

    TextEmbedding empty = tc.encode("");
    CHECK(empty.length == 0);

    TextEmbedding a1 = tc.encode("a red circle moving bounce over water");
    TextEmbedding a2 = tc.encode("a red circle moving bounce over water");
    CHECK(a1.ids == a2.ids);
    CHECK(a1.encoded == a2.encoded);
    CHECK(a1.length == 7);

    TextEmbedding b = tc.encode("a red square moving bounce over water");
    REQUIRE(b.length == a1.length);
    for (int i = 0; i < a1.length; ++i) {
        bool same = true;
        for (int d = 0; d < a1.dim; ++d)
            if (a1.table[i * a1.dim + d] != b.table[i * b.dim + d]) same = false;
        CHECK(same == (i != 2));  // only "circle" vs "square" differs, pre-position
    }

    TextEmbedding oov = tc.encode("zebra");
    CHECK(oov.ids == std::vector<int>{0});

    // L_max cap
    TextEmbedding longcap = tc.encode("a a a a a a a a a a a a");
    CHECK(longcap.length == cfg.l_max);
}
