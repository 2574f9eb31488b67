#include "lc/decompose/decomposer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <queue>

#include <fftw3.h>

#include "lc/core/image_ops.hpp"

namespace lc::decompose {

namespace {

std::mutex g_fftw_mutex;  // FFTW's planner is not thread-safe

std::vector<float> gray_frame(const VideoClip& clip, int f) {
    std::vector<float> g(size_t(clip.h) * clip.w);
    for (int y = 0; y < clip.h; ++y)
        for (int x = 0; x < clip.w; ++x)
            g[size_t(y) * clip.w + x] =
                (clip.at(f, y, x, 0) + clip.at(f, y, x, 1) + clip.at(f, y, x, 2)) / 3.0f;
    return g;
}

}  // namespace

std::array<int, 2> phase_correlate(const std::vector<float>& a, const std::vector<float>& b,
                                   int h, int w) {
    require(int(a.size()) == h * w && int(b.size()) == h * w, "phase_correlate: size mismatch");
    const int n = h * w;
    const int nc = h * (w / 2 + 1);

    double* ra = fftw_alloc_real(n);
    double* rb = fftw_alloc_real(n);
    fftw_complex* fa = fftw_alloc_complex(nc);
    fftw_complex* fb = fftw_alloc_complex(nc);
    double* corr = fftw_alloc_real(n);

    fftw_plan pa, pb, pinv;
    {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        pa = fftw_plan_dft_r2c_2d(h, w, ra, fa, FFTW_ESTIMATE);
        pb = fftw_plan_dft_r2c_2d(h, w, rb, fb, FFTW_ESTIMATE);
        pinv = fftw_plan_dft_c2r_2d(h, w, fa, corr, FFTW_ESTIMATE);
    }
    // mean removal and a Hann window tame the non-circular frame edges
    double mean_a = 0, mean_b = 0;
    for (int i = 0; i < n; ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= n;
    mean_b /= n;
    for (int y = 0; y < h; ++y) {
        double wy = 0.5 - 0.5 * std::cos(2.0 * M_PI * y / (h - 1));
        for (int x = 0; x < w; ++x) {
            double wx = 0.5 - 0.5 * std::cos(2.0 * M_PI * x / (w - 1));
            ra[y * w + x] = (a[size_t(y) * w + x] - mean_a) * wy * wx;
            rb[y * w + x] = (b[size_t(y) * w + x] - mean_b) * wy * wx;
        }
    }
    fftw_execute(pa);
    fftw_execute(pb);
    // normalized cross-power spectrum conj(Fa).Fb: peak lands at +d
    for (int i = 0; i < nc; ++i) {
        double re = fa[i][0] * fb[i][0] + fa[i][1] * fb[i][1];
        double im = fa[i][0] * fb[i][1] - fa[i][1] * fb[i][0];
        double mag = std::sqrt(re * re + im * im) + 1e-12;
        fa[i][0] = re / mag;
        fa[i][1] = im / mag;
    }
    fftw_execute(pinv);

    // Search only physically plausible shifts (camera bound + margin),
    // visiting smaller displacements first with strict improvement so a
    // textureless (all-tied) surface resolves to zero motion.
    const int max_shift = std::min({6, h / 2, w / 2});
    std::vector<std::array<int, 2>> cand;
    for (int sy = -max_shift; sy <= max_shift; ++sy)
        for (int sx = -max_shift; sx <= max_shift; ++sx) cand.push_back({sy, sx});
    std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
        int da = std::abs(a[0]) + std::abs(a[1]), db = std::abs(b[0]) + std::abs(b[1]);
        if (da != db) return da < db;
        return a < b;
    });
    int best_py = 0, best_px = 0;
    double best_v = -1e300;
    for (const auto& s : cand) {
        int iy = s[0] < 0 ? s[0] + h : s[0];
        int ix = s[1] < 0 ? s[1] + w : s[1];
        double v = corr[iy * w + ix];
        if (v > best_v) {
            best_v = v;
            best_py = s[0];
            best_px = s[1];
        }
    }
    int py = best_py, px = best_px;

    {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        fftw_destroy_plan(pa);
        fftw_destroy_plan(pb);
        fftw_destroy_plan(pinv);
    }
    fftw_free(ra);
    fftw_free(rb);
    fftw_free(fa);
    fftw_free(fb);
    fftw_free(corr);
    // peak at (py, px) means b(y, x) ~= a(y - py, x - px)
    return {py, px};
}

namespace {

// Dominant translation between two frames: phase-correlate a grid of tiles
// and take the component-wise median of the votes. A compact moving subject
// corrupts only the tiles it touches, so the camera translation wins even
// when the subject has far more edge energy than the scene texture.
std::array<int, 2> dominant_translation(const std::vector<float>& a, const std::vector<float>& b,
                                        int h, int w) {
    const int tile = 16;
    if (h < 2 * tile || w < 2 * tile) return phase_correlate(a, b, h, w);
    int ny = h / tile, nx = w / tile;
    std::vector<int> dys, dxs;
    std::vector<float> ta(tile * tile), tb(tile * tile);
    for (int ty = 0; ty < ny; ++ty)
        for (int tx = 0; tx < nx; ++tx) {
            for (int y = 0; y < tile; ++y)
                for (int x = 0; x < tile; ++x) {
                    ta[y * tile + x] = a[size_t(ty * tile + y) * w + (tx * tile + x)];
                    tb[y * tile + x] = b[size_t(ty * tile + y) * w + (tx * tile + x)];
                }
            auto d = phase_correlate(ta, tb, tile, tile);
            dys.push_back(d[0]);
            dxs.push_back(d[1]);
        }
    auto med = [](std::vector<int>& v) {
        std::sort(v.begin(), v.end());
        return v[(v.size() - 1) / 2];  // lower median stays integral
    };
    return {med(dys), med(dxs)};
}

}  // namespace

std::vector<std::array<int, 2>> estimate_camera_track(const VideoClip& clip) {
    require(clip.t >= 2, "camera track: need at least 2 frames");
    std::vector<std::array<int, 2>> off(clip.t, {0, 0});
    std::vector<float> prev = gray_frame(clip, 0);
    for (int f = 1; f < clip.t; ++f) {
        std::vector<float> cur = gray_frame(clip, f);
        auto d = dominant_translation(prev, cur, clip.h, clip.w);
        off[f] = {off[f - 1][0] + d[0], off[f - 1][1] + d[1]};
        prev = std::move(cur);
    }
    return off;
}

namespace {

// Motion-compensated temporal-median plate in reference (frame 0) coords,
// over an extended canvas covering every frame's footprint.
struct MedianPlate {
    int y0, x0, ph, pw;  // canvas origin and size
    std::vector<float> data;  // ph*pw*3; NaN where never observed
    std::vector<uint8_t> seen;

    float at(int y, int x, int c) const { return data[(size_t(y - y0) * pw + (x - x0)) * 3 + c]; }
    bool inside(int y, int x) const {
        return y >= y0 && y < y0 + ph && x >= x0 && x < x0 + pw;
    }
    bool observed(int y, int x) const { return seen[size_t(y - y0) * pw + (x - x0)] != 0; }
};

float median_of(std::vector<float>& v) {
    size_t n = v.size();
    size_t mid = n / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    float hi = v[mid];
    if (n % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + mid - 1, v.end());
    return 0.5f * (v[mid - 1] + hi);
}

// mask == nullptr: use all observations (segmentation plate).
// mask != nullptr: use only unmasked observations (inpainting).
MedianPlate build_plate(const VideoClip& clip, const std::vector<std::array<int, 2>>& off,
                        const MaskVideo* mask) {
    MedianPlate p;
    int ymin = 0, ymax = clip.h, xmin = 0, xmax = clip.w;
    for (const auto& o : off) {
        ymin = std::min(ymin, -o[0]);
        ymax = std::max(ymax, clip.h - o[0]);
        xmin = std::min(xmin, -o[1]);
        xmax = std::max(xmax, clip.w - o[1]);
    }
    p.y0 = ymin;
    p.x0 = xmin;
    p.ph = ymax - ymin;
    p.pw = xmax - xmin;
    p.data.assign(size_t(p.ph) * p.pw * 3, 0.0f);
    p.seen.assign(size_t(p.ph) * p.pw, 0);

    std::vector<float> obs;
    for (int qy = ymin; qy < ymax; ++qy)
        for (int qx = xmin; qx < xmax; ++qx) {
            for (int c = 0; c < 3; ++c) {
                obs.clear();
                for (int f = 0; f < clip.t; ++f) {
                    int py = qy + off[f][0], px = qx + off[f][1];
                    if (py < 0 || py >= clip.h || px < 0 || px >= clip.w) continue;
                    if (mask && mask->at(f, py, px)) continue;
                    obs.push_back(clip.at(f, py, px, c));
                }
                if (!obs.empty()) {
                    p.data[(size_t(qy - p.y0) * p.pw + (qx - p.x0)) * 3 + c] = median_of(obs);
                    if (c == 0) p.seen[size_t(qy - p.y0) * p.pw + (qx - p.x0)] = 1;
                }
            }
        }
    return p;
}

}  // namespace

MaskVideo mask_morph_close(const MaskVideo& m, int r) {
    if (r <= 0) return m;
    MaskVideo dil(m.t, m.h, m.w), out(m.t, m.h, m.w);
    for (int f = 0; f < m.t; ++f)
        for (int y = 0; y < m.h; ++y)
            for (int x = 0; x < m.w; ++x) {
                uint8_t v = 0;
                for (int dy = -r; dy <= r && !v; ++dy)
                    for (int dx = -r; dx <= r && !v; ++dx) {
                        int yy = y + dy, xx = x + dx;
                        if (yy >= 0 && yy < m.h && xx >= 0 && xx < m.w && m.at(f, yy, xx)) v = 1;
                    }
                dil.at(f, y, x) = v;
            }
    for (int f = 0; f < m.t; ++f)
        for (int y = 0; y < m.h; ++y)
            for (int x = 0; x < m.w; ++x) {
                uint8_t v = 1;
                for (int dy = -r; dy <= r && v; ++dy)
                    for (int dx = -r; dx <= r && v; ++dx) {
                        int yy = y + dy, xx = x + dx;
                        if (yy < 0 || yy >= m.h || xx < 0 || xx >= m.w || !dil.at(f, yy, xx)) v = 0;
                    }
                out.at(f, y, x) = v;
            }
    return out;
}

void mask_keep_largest_component(MaskVideo& m) {

    std::vector<int> labels(size_t(m.h) * m.w);
    std::vector<int> stack;
    for (int f = 0; f < m.t; ++f) {
        std::fill(labels.begin(), labels.end(), -1);
        int best_label = -1, best_size = 0, next = 0;
        for (int y = 0; y < m.h; ++y)
            for (int x = 0; x < m.w; ++x) {
                if (!m.at(f, y, x) || labels[size_t(y) * m.w + x] >= 0) continue;
                int label = next++, size = 0;
                stack.assign(1, y * m.w + x);
                labels[size_t(y) * m.w + x] = label;
                while (!stack.empty()) {
                    int cur = stack.back();
                    stack.pop_back();
                    ++size;
                    int cy = cur / m.w, cx = cur % m.w;
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx) {
                            int yy = cy + dy, xx = cx + dx;
                            if (yy < 0 || yy >= m.h || xx < 0 || xx >= m.w) continue;
                            if (!m.at(f, yy, xx) || labels[size_t(yy) * m.w + xx] >= 0) continue;
                            labels[size_t(yy) * m.w + xx] = label;
                            stack.push_back(yy * m.w + xx);
                        }
                }
                if (size > best_size) {
                    best_size = size;
                    best_label = label;
                }
            }
        if (best_label >= 0)
            for (int y = 0; y < m.h; ++y)
                for (int x = 0; x < m.w; ++x)
                    m.at(f, y, x) = (labels[size_t(y) * m.w + x] == best_label) ? 1 : 0;
    }
}

SegmentationResult segment_motion(const VideoClip& clip, const DecomposerConfig& cfg) {
    cfg.validate();
    require(clip.t >= 2, "segment_motion: need at least 2 frames");
    SegmentationResult res;
    res.camera = estimate_camera_track(clip);

    // Pass 1 thresholds against an all-observation median plate; pass 2
    // rebuilds the plate excluding pass-1 detections, which recovers
    // subject interiors that linger on a pixel for much of the clip.
    auto threshold_pass = [&](const MedianPlate& plate, const MedianPlate* fallback,
                              const MaskVideo* fallback_mask) {
        MaskVideo mask(clip.t, clip.h, clip.w);
        size_t count = 0;
        for (int f = 0; f < clip.t; ++f)
            for (int y = 0; y < clip.h; ++y)
                for (int x = 0; x < clip.w; ++x) {
                    int qy = y - res.camera[f][0], qx = x - res.camera[f][1];
                    const MedianPlate* ref = nullptr;
                    if (plate.inside(qy, qx) && plate.observed(qy, qx))
                        ref = &plate;
                    else if (fallback && fallback->inside(qy, qx) && fallback->observed(qy, qx))
                        ref = fallback;
                    if (!ref) {
                        // no background evidence at all: keep pass-1 call
                        if (fallback_mask && fallback_mask->at(f, y, x)) {
                            mask.at(f, y, x) = 1;
                            ++count;
                        }
                        continue;
                    }
                    float d = 0;
                    for (int c = 0; c < 3; ++c)
                        d = std::max(d, std::fabs(clip.at(f, y, x, c) - ref->at(qy, qx, c)));
                    if (d > float(cfg.diff_threshold)) {
                        mask.at(f, y, x) = 1;
                        ++count;
                    }
                }
        return std::pair<MaskVideo, size_t>(std::move(mask), count);
    };

    MedianPlate plate1 = build_plate(clip, res.camera, nullptr);
    auto [mask1, count1] = threshold_pass(plate1, nullptr, nullptr);
    if (count1 == 0) {
        res.no_subject = true;
        res.mask = MaskVideo(clip.t, clip.h, clip.w);
        return res;
    }
    MedianPlate plate2 = build_plate(clip, res.camera, &mask1);
    auto [mask2, count2] = threshold_pass(plate2, &plate1, &mask1);
    res.mask = count2 > 0 ? std::move(mask2) : std::move(mask1);

    res.mask = mask_morph_close(res.mask, cfg.morphology_radius);
    mask_keep_largest_component(res.mask);
    return res;
}

VideoClip extract_foreground(const VideoClip& clip, const MaskVideo& mask) {
    require(mask.same_shape(clip), "extract_foreground: shape mismatch");
    VideoClip out(clip.t, clip.h, clip.w, clip.fps);
    for (size_t i = 0; i < mask.data.size(); ++i)
        if (mask.data[i]) {
            out.data[i * 3] = clip.data[i * 3];
            out.data[i * 3 + 1] = clip.data[i * 3 + 1];
            out.data[i * 3 + 2] = clip.data[i * 3 + 2];
        }
    return out;
}

VideoClip inpaint_background(const VideoClip& clip, const MaskVideo& mask,
                             const DecomposerConfig& cfg) {
    cfg.validate();
    require(mask.same_shape(clip), "inpaint_background: shape mismatch");
    VideoClip out = clip;
    if (mask.count() == 0) return out;

    std::vector<std::array<int, 2>> off =
        clip.t >= 2 ? estimate_camera_track(clip)
                    : std::vector<std::array<int, 2>>(clip.t, {0, 0});
    MedianPlate plate = build_plate(clip, off, &mask);

    // temporal fill, then per-frame spatial relaxation over what remains
    for (int f = 0; f < clip.t; ++f) {
        std::vector<uint8_t> unknown(size_t(clip.h) * clip.w, 0);
        size_t n_unknown = 0;
        for (int y = 0; y < clip.h; ++y)
            for (int x = 0; x < clip.w; ++x) {
                if (!mask.at(f, y, x)) continue;
                int qy = y - off[f][0], qx = x - off[f][1];
                if (plate.inside(qy, qx) && plate.observed(qy, qx)) {
                    for (int c = 0; c < 3; ++c) out.at(f, y, x, c) = plate.at(qy, qx, c);
                } else {
                    unknown[size_t(y) * clip.w + x] = 1;
                    ++n_unknown;
                    for (int c = 0; c < 3; ++c) out.at(f, y, x, c) = 0.5f;
                }
            }
        if (n_unknown == 0 || cfg.inpaint == DecomposerConfig::InpaintMode::temporal_median)
            continue;

        // Jacobi averaging of the 4-neighborhood until max-change < 1e-4
        std::vector<float> cur(size_t(clip.h) * clip.w * 3), next;
        for (int y = 0; y < clip.h; ++y)
            for (int x = 0; x < clip.w; ++x)
                for (int c = 0; c < 3; ++c)
                    cur[(size_t(y) * clip.w + x) * 3 + c] = out.at(f, y, x, c);
        next = cur;
        const int max_iters = 4 * (clip.h + clip.w) * 10;
        for (int iter = 0; iter < max_iters; ++iter) {
            float max_change = 0;
            for (int y = 0; y < clip.h; ++y)
                for (int x = 0; x < clip.w; ++x) {
                    if (!unknown[size_t(y) * clip.w + x]) continue;
                    for (int c = 0; c < 3; ++c) {
                        float acc = 0;
                        int cnt = 0;
                        const int dy[4] = {-1, 1, 0, 0}, dx[4] = {0, 0, -1, 1};
                        for (int k = 0; k < 4; ++k) {
                            int yy = y + dy[k], xx = x + dx[k];
                            if (yy < 0 || yy >= clip.h || xx < 0 || xx >= clip.w) continue;
                            acc += cur[(size_t(yy) * clip.w + xx) * 3 + c];
                            ++cnt;
                        }
                        float v = cnt ? acc / cnt : cur[(size_t(y) * clip.w + x) * 3 + c];
                        max_change = std::max(
                            max_change, std::fabs(v - cur[(size_t(y) * clip.w + x) * 3 + c]));
                        next[(size_t(y) * clip.w + x) * 3 + c] = v;
                    }
                }
            std::swap(cur, next);
            if (max_change < 1e-4f) break;
        }
        for (int y = 0; y < clip.h; ++y)
            for (int x = 0; x < clip.w; ++x)
                if (unknown[size_t(y) * clip.w + x])
                    for (int c = 0; c < 3; ++c)
                        out.at(f, y, x, c) = cur[(size_t(y) * clip.w + x) * 3 + c];
    }
    return out;
}

std::vector<TrackPoint> centroid_track(const MaskVideo& mask) {
    std::vector<TrackPoint> track(mask.t);
    for (int f = 0; f < mask.t; ++f) {
        double sy = 0, sx = 0;
        long n = 0;
        for (int y = 0; y < mask.h; ++y)
            for (int x = 0; x < mask.w; ++x)
                if (mask.at(f, y, x)) {
                    sy += y;
                    sx += x;
                    ++n;
                }
        if (n > 0) track[f] = {sx / n, sy / n, true};
    }
    return track;
}

namespace {

struct LinFit {
    double a = 0, b = 0, resid = 0;  // v ~= a + b*t
};

LinFit linear_fit(const std::vector<double>& ts, const std::vector<double>& vs) {
    const size_t n = ts.size();
    double st = 0, sv = 0, stt = 0, stv = 0;
    for (size_t i = 0; i < n; ++i) {
        st += ts[i];
        sv += vs[i];
        stt += ts[i] * ts[i];
        stv += ts[i] * vs[i];
    }
    LinFit f;
    double det = n * stt - st * st;
    f.b = det != 0 ? (n * stv - st * sv) / det : 0.0;
    f.a = (sv - f.b * st) / double(n);
    for (size_t i = 0; i < n; ++i) {
        double r = vs[i] - f.a - f.b * ts[i];
        f.resid += r * r;
    }
    return f;
}

double linear_fit_resid_clamped(const std::vector<double>& ts, const std::vector<double>& vs,
                                double min_slope, double max_slope) {
    LinFit f = linear_fit(ts, vs);
    double b = std::clamp(f.b, min_slope, max_slope);
    if (b == f.b) return f.resid;
    double sv = 0;
    for (size_t i = 0; i < ts.size(); ++i) sv += vs[i] - b * ts[i];
    double a = sv / double(ts.size());
    double resid = 0;
    for (size_t i = 0; i < ts.size(); ++i) {
        double r = vs[i] - a - b * ts[i];
        resid += r * r;
    }
    return resid;
}

double const_fit_resid(const std::vector<double>& vs) {
    double mean = 0;
    for (double v : vs) mean += v;
    mean /= double(vs.size());
    double resid = 0;
    for (double v : vs) resid += (v - mean) * (v - mean);
    return resid;
}

// y ~= c + A sin(2 pi t / P) + B cos(2 pi t / P), amplitude floored so a
// flat track cannot tie with genuinely oscillating classes.
double sine_fit_resid(const std::vector<double>& ts, const std::vector<double>& ys,
                      double min_amp) {
    const size_t n = ts.size();
    double best = 1e30;
    for (double period : {5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0, 24.0}) {
        double m[3][3] = {};
        double rhs[3] = {};
        for (size_t i = 0; i < n; ++i) {
            double s = std::sin(2 * M_PI * ts[i] / period);
            double co = std::cos(2 * M_PI * ts[i] / period);
            double base[3] = {1.0, s, co};
            for (int r = 0; r < 3; ++r) {
                for (int c = 0; c < 3; ++c) m[r][c] += base[r] * base[c];
                rhs[r] += base[r] * ys[i];
            }
        }
        // 3x3 solve by Cramer
        auto det3 = [](double a[3][3]) {
            return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                   a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                   a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
        };
        double d = det3(m);
        if (std::fabs(d) < 1e-9) continue;
        double sol[3];
        for (int k = 0; k < 3; ++k) {
            double tmp[3][3];
            std::memcpy(tmp, m, sizeof(tmp));
            for (int r = 0; r < 3; ++r) tmp[r][k] = rhs[r];
            sol[k] = det3(tmp) / d;
        }
        double amp = std::sqrt(sol[1] * sol[1] + sol[2] * sol[2]);
        if (amp < min_amp && amp > 1e-12) {
            double scale = min_amp / amp;
            sol[1] *= scale;
            sol[2] *= scale;
        } else if (amp <= 1e-12) {
            sol[1] = min_amp;
        }
        double resid = 0;
        for (size_t i = 0; i < n; ++i) {
            double s = std::sin(2 * M_PI * ts[i] / period);
            double co = std::cos(2 * M_PI * ts[i] / period);
            double r = ys[i] - sol[0] - sol[1] * s - sol[2] * co;
            resid += r * r;
        }
        best = std::min(best, resid);
    }
    return best;
}

double triangle_wave(double u) {  // period 1, range [-1, 1]
    double fu = u - std::floor(u);
    return 4.0 * std::fabs(fu - 0.5) - 1.0;
}

double bounce_fit_resid(const std::vector<double>& ts, const std::vector<double>& ys,
                        double min_amp) {
    const size_t n = ts.size();
    double best = 1e30;
    // bounce periods are continuous; the grid must be fine or the sine
    // family wins on residual just by being smoother
    for (double period = 3.0; period <= 28.0; period += 0.25) {
        for (double phase = 0.0; phase < period; phase += 0.25) {
            double sw = 0, sy = 0, sww = 0, swy = 0;
            for (size_t i = 0; i < n; ++i) {
                double wv = triangle_wave((ts[i] + phase) / period);
                sw += wv;
                sy += ys[i];
                sww += wv * wv;
                swy += wv * ys[i];
            }
            double det = double(n) * sww - sw * sw;
            if (std::fabs(det) < 1e-9) continue;
            double A = (double(n) * swy - sw * sy) / det;
            if (std::fabs(A) < min_amp) A = A < 0 ? -min_amp : min_amp;
            double c = (sy - A * sw) / double(n);
            double resid = 0;
            for (size_t i = 0; i < n; ++i) {
                double r = ys[i] - c - A * triangle_wave((ts[i] + phase) / period);
                resid += r * r;
            }
            best = std::min(best, resid);
        }
    }
    return best;
}

}  // namespace

std::array<double, 5> trajectory_fit_residuals(const std::vector<TrackPoint>& track) {
    std::vector<double> ts, xs, ys;
    for (size_t f = 0; f < track.size(); ++f)
        if (track[f].valid) {
            ts.push_back(double(f));
            xs.push_back(track[f].x);
            ys.push_back(track[f].y);
        }
    require(ts.size() >= 4, "trajectory fit: need >= 4 valid frames");
    const double n = double(ts.size());
    const double kMinSpeed = 0.25, kMinAmp = 0.8;

    // {linear-left, linear-right, sinusoidal, bounce, static}
    std::array<double, 5> resid{};
    resid[0] = (linear_fit_resid_clamped(ts, xs, -1e9, -kMinSpeed) + const_fit_resid(ys)) / n;
    resid[1] = (linear_fit_resid_clamped(ts, xs, kMinSpeed, 1e9) + const_fit_resid(ys)) / n;
    double x_moving = std::min(linear_fit_resid_clamped(ts, xs, -1e9, -kMinSpeed),
                               linear_fit_resid_clamped(ts, xs, kMinSpeed, 1e9));
    resid[2] = (x_moving + sine_fit_resid(ts, ys, kMinAmp)) / n;
    resid[3] = (x_moving + bounce_fit_resid(ts, ys, kMinAmp)) / n;
    resid[4] = (const_fit_resid(xs) + const_fit_resid(ys)) / n;
    return resid;
}

world::Trajectory classify_trajectory(const std::vector<TrackPoint>& track) {
    auto r = trajectory_fit_residuals(track);
    static const world::Trajectory order[5] = {
        world::Trajectory::linear_left, world::Trajectory::linear_right,
        world::Trajectory::sinusoidal, world::Trajectory::bounce, world::Trajectory::fixed};
    int best = 0;
    for (int k = 1; k < 5; ++k)
        if (r[k] < r[best]) best = k;
    return order[best];
}

int classify_color(const VideoClip& clip, const MaskVideo& mask) {
    double sr = 0, sg = 0, sb = 0;
    long n = 0;
    for (size_t i = 0; i < mask.data.size(); ++i)
        if (mask.data[i]) {
            sr += clip.data[i * 3];
            sg += clip.data[i * 3 + 1];
            sb += clip.data[i * 3 + 2];
            ++n;
        }
    require(n > 0, "classify_color: empty mask");
    auto hsv = rgb_to_hsv(float(sr / n), float(sg / n), float(sb / n));
    const auto& palette = world::sprite_palette();
    // low saturation -> the achromatic palette entry
    if (hsv[1] < 0.22f) {
        for (size_t i = 0; i < palette.size(); ++i) {
            auto ph = rgb_to_hsv(palette[i].rgb[0], palette[i].rgb[1], palette[i].rgb[2]);
            if (ph[1] < 0.22f) return int(i);
        }
    }
    int best = 0;
    float best_d = 1e9f;
    for (size_t i = 0; i < palette.size(); ++i) {
        auto ph = rgb_to_hsv(palette[i].rgb[0], palette[i].rgb[1], palette[i].rgb[2]);
        if (ph[1] < 0.22f) continue;
        float dh = std::fabs(hsv[0] - ph[0]);
        dh = std::min(dh, 1.0f - dh);
        if (dh < best_d) {
            best_d = dh;
            best = int(i);
        }
    }
    return best;
}

world::Shape classify_shape(const MaskVideo& mask) {
    double fill_sum = 0;
    int frames = 0;
    for (int f = 0; f < mask.t; ++f) {
        int ymin = mask.h, ymax = -1, xmin = mask.w, xmax = -1;
        long area = 0;
        for (int y = 0; y < mask.h; ++y)
            for (int x = 0; x < mask.w; ++x)
                if (mask.at(f, y, x)) {
                    ++area;
                    ymin = std::min(ymin, y);
                    ymax = std::max(ymax, y);
                    xmin = std::min(xmin, x);
                    xmax = std::max(xmax, x);
                }
        if (area == 0) continue;
        double bbox = double(ymax - ymin + 1) * double(xmax - xmin + 1);
        fill_sum += double(area) / bbox;
        ++frames;
    }
    require(frames > 0, "classify_shape: empty mask");
    double fill = fill_sum / frames;
    if (fill >= 0.90) return world::Shape::square;
    if (fill >= 0.645) return world::Shape::circle;
    return world::Shape::triangle;
}

world::SceneClass classify_scene(const VideoClip& background) {
    long blue = 0, green = 0, total = 0;
    for (int f = 0; f < background.t; ++f)
        for (int y = 0; y < background.h; y += 2)
            for (int x = 0; x < background.w; x += 2) {
                auto hsv = rgb_to_hsv(background.at(f, y, x, 0), background.at(f, y, x, 1),
                                      background.at(f, y, x, 2));
                ++total;
                if (hsv[0] >= 0.50f && hsv[0] <= 0.75f && hsv[1] >= 0.45f && hsv[2] <= 0.85f)
                    ++blue;
                else if (hsv[0] >= 0.07f && hsv[0] <= 0.45f && hsv[1] >= 0.35f)
                    ++green;
            }
    double fb = double(blue) / total, fg = double(green) / total;
    if (fb >= 0.25 && fb >= fg) return world::SceneClass::water;
    if (fg >= 0.25) return world::SceneClass::ground;
    return world::SceneClass::sky;
}

std::string caption_clip(const CaptionInput& in) {
    require(in.background != nullptr, "caption_clip: background layer required");
    world::SceneClass scene = classify_scene(*in.background);
    if (in.no_subject || !in.mask || in.mask->count() == 0)
        return world::scene_only_caption(world::to_string(scene));
    require(in.clip != nullptr, "caption_clip: clip required");
    int color = classify_color(*in.clip, *in.mask);
    world::Shape shape = classify_shape(*in.mask);
    auto track = centroid_track(*in.mask);
    int valid = 0;
    for (const auto& p : track) valid += p.valid;
    // a subject visible in too few frames has no fittable trajectory
    world::Trajectory traj =
        valid >= 4 ? classify_trajectory(track) : world::Trajectory::fixed;
    return world::make_caption(world::sprite_palette()[color].name, world::to_string(shape),
                               world::to_string(traj), world::to_string(scene));
}

world::LayerSet decompose(const VideoClip& clip, const DecomposerConfig& cfg) {
    world::LayerSet out;
    SegmentationResult seg = segment_motion(clip, cfg);
    out.original = clip;
    out.mask = seg.mask;
    out.foreground = extract_foreground(clip, seg.mask);
    out.background = inpaint_background(clip, seg.mask, cfg);
    CaptionInput ci{&clip, &out.mask, &out.background, seg.no_subject};
    out.caption = caption_clip(ci);
    out.meta.oracle = false;
    return out;
}

}  // namespace lc::decompose
