#include "lc/eval/metrics.hpp"

#include <cmath>

#include "lc/decompose/decomposer.hpp"

namespace lc::eval {

namespace {

void normalize_block(std::vector<double>& v, size_t from, size_t to) {
    double ss = 0;
    for (size_t i = from; i < to; ++i) ss += v[i] * v[i];
    if (ss <= 0) return;
    double inv = 1.0 / std::sqrt(ss);
    for (size_t i = from; i < to; ++i) v[i] *= inv;
}

}  // namespace

std::vector<double> descriptor(const VideoClip& clip, const MaskVideo* mask, bool* flagged) {
    bool use_mask = mask && mask->count() > 0;
    if (flagged) *flagged = (mask == nullptr) || !use_mask;

    std::vector<double> v(24 + 7, 0.0);
    // color histogram, 8 bins per channel
    long count = 0;
    for (int f = 0; f < clip.t; ++f)
        for (int y = 0; y < clip.h; ++y)
            for (int x = 0; x < clip.w; ++x) {
                if (use_mask && !mask->at(f, y, x)) continue;
                ++count;
                for (int c = 0; c < 3; ++c) {
                    int bin = std::min(7, int(clip.at(f, y, x, c) * 8.0f));
                    v[size_t(c) * 8 + bin] += 1.0;
                }
            }
    if (count > 0)
        for (size_t i = 0; i < 24; ++i) v[i] /= double(count);
    normalize_block(v, 0, 24);

    // area-normalized central moments of the mask, pooled over frames
    if (use_mask) {
        double m00 = 0, mx = 0, my = 0;
        for (int f = 0; f < mask->t; ++f)
            for (int y = 0; y < mask->h; ++y)
                for (int x = 0; x < mask->w; ++x)
                    if (mask->at(f, y, x)) {
                        m00 += 1;
                        mx += x;
                        my += y;
                    }
        double cx = mx / m00, cy = my / m00;
        double mu[4][4] = {};
        for (int f = 0; f < mask->t; ++f)
            for (int y = 0; y < mask->h; ++y)
                for (int x = 0; x < mask->w; ++x)
                    if (mask->at(f, y, x)) {
                        double dx = x - cx, dy = y - cy;
                        double px = 1;
                        for (int p = 0; p <= 3; ++p) {
                            double py = 1;
                            for (int q = 0; q <= 3 - p; ++q) {
                                mu[p][q] += px * py;
                                py *= dy;
                            }
                            px *= dx;
                        }
                    }
        auto eta = [&](int p, int q) {
            return mu[p][q] / std::pow(m00, 1.0 + (p + q) / 2.0);
        };
        v[24] = eta(2, 0);
        v[25] = eta(1, 1);
        v[26] = eta(0, 2);
        v[27] = eta(3, 0);
        v[28] = eta(2, 1);
        v[29] = eta(1, 2);
        v[30] = eta(0, 3);
        normalize_block(v, 24, 31);
    }

    // final normalization of the concatenated vector
    normalize_block(v, 0, v.size());
    return v;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    require(a.size() == b.size(), "cosine: size mismatch");
    double dab = 0, daa = 0, dbb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        dab += a[i] * b[i];
        daa += a[i] * a[i];
        dbb += b[i] * b[i];
    }
    if (daa == 0 || dbb == 0) return 0.0;
    // sqrt(fl(d*d)) == d in IEEE round-to-nearest, so identical inputs
    // yield exactly 1.0
    return dab / std::sqrt(daa * dbb);
}

std::array<double, 5> action_distribution(const VideoClip& fg, const MaskVideo& mask,
                                          bool* undefined) {
    require(fg.t >= 4, "action_distribution: need T >= 4");
    require(mask.same_shape(fg), "action_distribution: shape mismatch");
    if (undefined) *undefined = false;
    auto track = decompose::centroid_track(mask);
    int valid = 0;
    for (const auto& p : track) valid += p.valid;
    if (valid * 2 < fg.t || valid < 4) {
        if (undefined) *undefined = true;
        return {0.2, 0.2, 0.2, 0.2, 0.2};
    }
    auto resid = decompose::trajectory_fit_residuals(track);
    const double tau = 0.5;  // px^2 temperature
    std::array<double, 5> p{};
    double mn = resid[0];
    for (double r : resid) mn = std::min(mn, r);
    double z = 0;
    for (int i = 0; i < 5; ++i) {
        p[i] = std::exp(-(resid[i] - mn) / tau);
        z += p[i];
    }
    for (auto& x : p) x /= z;
    return p;
}

double kl_divergence(const std::array<double, 5>& p, const std::array<double, 5>& q) {
    const double eps = 1e-6;
    double zp = 0, zq = 0;
    for (int i = 0; i < 5; ++i) {
        zp += p[i] + eps;
        zq += q[i] + eps;
    }
    double kl = 0;
    for (int i = 0; i < 5; ++i) {
        double pi = (p[i] + eps) / zp, qi = (q[i] + eps) / zq;
        kl += pi * std::log(pi / qi);
    }
    return std::max(0.0, kl);
}

std::vector<std::array<int, 2>> block_flow(const VideoClip& clip, int frame) {
    require(frame >= 0 && frame + 1 < clip.t, "block_flow: frame pair out of range");
    const int B = 8, R = 4;
    require(clip.h >= B + 2 * R && clip.w >= B + 2 * R, "block_flow: frame too small");
    // blocks sit inside a search-radius margin so every block sees the
    // complete +-R candidate window
    const int by = (clip.h - B - 2 * R) / B + 1, bx = (clip.w - B - 2 * R) / B + 1;
    std::vector<std::array<int, 2>> flow(size_t(by) * bx, {0, 0});

    static const auto candidates = [] {
        std::vector<std::array<int, 2>> c;
        for (int dy = -R; dy <= R; ++dy)
            for (int dx = -R; dx <= R; ++dx) c.push_back({dy, dx});
        std::sort(c.begin(), c.end(), [](const auto& a, const auto& b) {
            int da = std::abs(a[0]) + std::abs(a[1]), db = std::abs(b[0]) + std::abs(b[1]);
            if (da != db) return da < db;
            return a < b;
        });
        return c;
    }();

    for (int ty = 0; ty < by; ++ty)
        for (int tx = 0; tx < bx; ++tx) {
            const int y0 = R + ty * B, x0 = R + tx * B;
            double best = 1e300;
            std::array<int, 2> best_d = {0, 0};
            for (const auto& d : candidates) {
                int oy = y0 + d[0], ox = x0 + d[1];
                double sad = 0;
                for (int y = 0; y < B; ++y)
                    for (int x = 0; x < B; ++x)
                        for (int c = 0; c < 3; ++c)
                            sad += std::fabs(double(clip.at(frame, y0 + y, x0 + x, c)) -
                                             double(clip.at(frame + 1, oy + y, ox + x, c)));
                if (sad < best) {
                    best = sad;
                    best_d = d;
                }
            }
            flow[size_t(ty) * bx + tx] = best_d;
        }
    return flow;
}

double flow_mse(const VideoClip& bg_in, const VideoClip& bg_out) {
    require(bg_in.same_shape(bg_out), "flow_mse: shape mismatch");
    require(bg_in.t >= 2, "flow_mse: need at least 2 frames");
    long double acc = 0;
    long n = 0;
    for (int f = 0; f + 1 < bg_in.t; ++f) {
        auto fa = block_flow(bg_in, f);
        auto fb = block_flow(bg_out, f);
        for (size_t i = 0; i < fa.size(); ++i) {
            double dy = double(fa[i][0]) - double(fb[i][0]);
            double dx = double(fa[i][1]) - double(fb[i][1]);
            acc += dy * dy + dx * dx;
            ++n;
        }
    }
    return double(acc / (long double)n);
}

ParsedCaption parse_caption(const std::string& caption) {
    std::vector<std::string> words;
    {
        std::string cur;
        for (char ch : caption) {
            if (ch == ' ') {
                if (!cur.empty()) words.push_back(cur);
                cur.clear();
            } else {
                cur += ch;
            }
        }
        if (!cur.empty()) words.push_back(cur);
    }
    auto is_scene = [](const std::string& w) {
        return w == "water" || w == "ground" || w == "sky";
    };
    auto is_color = [](const std::string& w) {
        for (const auto& nc : world::sprite_palette())
            if (w == nc.name) return true;
        return false;
    };
    auto is_shape = [](const std::string& w) {
        return w == "circle" || w == "square" || w == "triangle";
    };
    auto is_traj = [](const std::string& w) {
        return w == "linear-left" || w == "linear-right" || w == "sinusoidal" || w == "bounce" ||
               w == "static";
    };

    ParsedCaption out;
    if (words.size() == 3 && words[0] == "a" && is_scene(words[1]) && words[2] == "scene") {
        out.scene_only = true;
        out.scene = words[1];
        return out;
    }
    if (words.size() == 7 && words[0] == "a" && is_color(words[1]) && is_shape(words[2]) &&
        words[3] == "moving" && is_traj(words[4]) && words[5] == "over" && is_scene(words[6])) {
        out.color = words[1];
        out.shape = words[2];
        out.trajectory = words[4];
        out.scene = words[6];
        return out;
    }
    throw contract_error("caption does not parse against the template grammar: " + caption);
}

double textual_alignment_layers(const world::LayerSet& layers, const std::string& caption) {
    ParsedCaption want = parse_caption(caption);
    std::string scene = world::to_string(decompose::classify_scene(layers.background));
    if (want.scene_only) return scene == want.scene ? 1.0 : 0.0;

    int matched = 0;
    if (scene == want.scene) ++matched;
    if (layers.mask.count() > 0) {
        int color = decompose::classify_color(layers.original, layers.mask);
        if (world::sprite_palette()[color].name == want.color) ++matched;
        if (world::to_string(decompose::classify_shape(layers.mask)) == want.shape) ++matched;
        auto track = decompose::centroid_track(layers.mask);
        int valid = 0;
        for (const auto& p : track) valid += p.valid;
        if (valid >= 4 &&
            world::to_string(decompose::classify_trajectory(track)) == want.trajectory)
            ++matched;
    }
    return matched / 4.0;
}

double textual_alignment(const VideoClip& video, const std::string& caption) {
    world::LayerSet layers = decompose::decompose(video, decompose::DecomposerConfig{});
    return textual_alignment_layers(layers, caption);
}

MaskVideo locate_subject(const VideoClip& output, const VideoClip& bg, double threshold) {
    require(output.same_shape(bg), "locate_subject: shape mismatch");
    MaskVideo mask(output.t, output.h, output.w);
    for (int f = 0; f < output.t; ++f)
        for (int y = 0; y < output.h; ++y)
            for (int x = 0; x < output.w; ++x) {
                float d = 0;
                for (int c = 0; c < 3; ++c) {
                    float dc = std::min(std::fabs(output.at(f, y, x, c) - bg.at(f, y, x, c)),
                                        std::fabs(output.at(f, y, x, c) - bg.at(0, y, x, c)));
                    d = std::max(d, dc);
                }
                if (d > float(threshold)) mask.at(f, y, x) = 1;
            }
    MaskVideo closed = decompose::mask_morph_close(mask, 1);
    decompose::mask_keep_largest_component(closed);
    return closed;
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    require(xs.size() == ys.size() && xs.size() >= 2, "pearson: bad inputs");
    double mx = 0, my = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= double(xs.size());
    my /= double(ys.size());
    double sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx <= 0 || syy <= 0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace lc::eval
