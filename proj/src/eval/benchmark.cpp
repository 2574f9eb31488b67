#include "lc/eval/benchmark.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>
#include <omp.h>

#include "lc/decompose/decomposer.hpp"

namespace lc::eval {

Method method_from_string(const std::string& s) {
    if (s == "model") return Method::model;
    if (s == "copy-paste") return Method::copy_paste;
    if (s == "oracle-original") return Method::oracle_original;
    throw config_error("unknown evaluation method: " + s);
}

const char* to_string(Method m) {
    switch (m) {
        case Method::model: return "model";
        case Method::copy_paste: return "copy-paste";
        default: return "oracle-original";
    }
}

VideoClip copy_paste_baseline(const world::TripletInputs& in) {
    VideoClip out(in.bg.t, in.bg.h, in.bg.w, in.bg.fps);
    for (int f = 0; f < out.t; ++f)
        for (int y = 0; y < out.h; ++y)
            for (int x = 0; x < out.w; ++x)
                for (int c = 0; c < 3; ++c)
                    out.at(f, y, x, c) = in.mask.at(f, y, x) ? in.fg.at(f, y, x, c)
                                                             : in.bg.at(0, y, x, c);
    return out;
}

MetricReport aggregate_rows(const std::string& method, std::vector<TripletRow> rows) {
    MetricReport rep;
    rep.method = method;
    rep.rows = std::move(rows);
    int n = 0, n_m2 = 0;
    for (const auto& r : rep.rows) {
        if (r.failed) {
            ++rep.n_failed;
            continue;
        }
        ++n;
        rep.m1_fg += r.m1_fg;
        rep.m1_bg += r.m1_bg;
        rep.m3 += r.m3;
        rep.m4 += r.m4;
        rep.afford_rate += r.afford_rate;
        if (!r.m2_undefined) {
            rep.m2 += r.m2;
            ++n_m2;
        } else {
            ++rep.n_m2_excluded;
        }
    }
    rep.n_rows = int(rep.rows.size());
    if (n > 0) {
        rep.m1_fg /= n;
        rep.m1_bg /= n;
        rep.m3 /= n;
        rep.m4 /= n;
        rep.afford_rate /= n;
    }
    if (n_m2 > 0) rep.m2 /= n_m2;
    return rep;
}

MetricReport evaluate_benchmark(const model::InferenceEngine* engine,
                                const world::DatasetManifest& data,
                                const BenchmarkOptions& opts) {
    require(!data.triplets.empty(), "evaluate: manifest has no test triplets");
    if (opts.method == Method::model)
        require(engine != nullptr, "evaluate: model method needs a checkpoint engine");

    int n = int(data.triplets.size());
    if (opts.max_triplets > 0) n = std::min(n, opts.max_triplets);
    std::vector<TripletRow> rows(n);

#pragma omp parallel for num_threads(2) schedule(dynamic, 1)
    for (int i = 0; i < n; ++i) {
        TripletRow& row = rows[i];
        row.id = i;
        const world::TestTriplet& trip = data.triplets[i];
        row.fg_clip = trip.fg_clip;
        row.bg_clip = trip.bg_clip;
        try {
            world::TripletInputs in = world::load_triplet(data, trip);

            VideoClip output;
            switch (opts.method) {
                case Method::model:
                    output = engine->compose(in.fg, in.bg, in.prompt, opts.steps,
                                             Rng::mix({opts.seed, uint64_t(i)}));
                    break;
                case Method::copy_paste: output = copy_paste_baseline(in); break;
                case Method::oracle_original:
                    output = world::load_clip_layer(data.clip_dir(trip.fg_clip), "original");
                    break;
            }

            world::LayerSet out_layers =
                decompose::decompose(output, decompose::DecomposerConfig{});

            row.m1_fg = cosine_similarity(descriptor(in.fg, &in.mask),
                                          descriptor(out_layers.foreground, &out_layers.mask));
            row.m1_bg = cosine_similarity(descriptor(in.bg, nullptr),
                                          descriptor(out_layers.background, nullptr));

            bool und_in = false, und_out = false;
            auto p_in = action_distribution(in.fg, in.mask, &und_in);
            auto p_out = action_distribution(out_layers.foreground, out_layers.mask, &und_out);
            row.m2_undefined = und_in || und_out;
            if (!row.m2_undefined) row.m2 = kl_divergence(p_in, p_out);

            row.m3 = flow_mse(in.bg, out_layers.background);
            row.m4 = textual_alignment_layers(out_layers, in.prompt);

            // affordance band hit rate via the background-difference locator
            MaskVideo loc = locate_subject(output, in.bg, opts.locate_threshold);
            const auto& band = in.bg_meta.background;
            double lo = band.band_lo * output.h, hi = band.band_hi * output.h;
            int hits = 0;
            double cy_sum = 0;
            int cy_frames = 0;
            for (int f = 0; f < loc.t; ++f) {
                double sy = 0;
                long cnt = 0;
                for (int y = 0; y < loc.h; ++y)
                    for (int x = 0; x < loc.w; ++x)
                        if (loc.at(f, y, x)) {
                            sy += y;
                            ++cnt;
                        }
                if (cnt == 0) continue;
                double cy = sy / cnt;
                cy_sum += cy;
                ++cy_frames;
                if (cy >= lo && cy <= hi) ++hits;
            }
            row.afford_rate = double(hits) / double(loc.t);
            row.out_cy = cy_frames ? cy_sum / cy_frames : -1.0;
            row.band_cy = 0.5 * (band.band_lo + band.band_hi) * output.h;
            auto cond_track = decompose::centroid_track(in.mask);
            double ty = 0;
            int tn = 0;
            for (const auto& p : cond_track)
                if (p.valid) {
                    ty += p.y;
                    ++tn;
                }
            row.cond_cy = tn ? ty / tn : -1.0;
        } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
        }
    }
    return aggregate_rows(to_string(opts.method), std::move(rows));
}

void write_report_csv(const MetricReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open for write: " + path);
    out << "method,triplet,fg,bg,m1_fg,m1_bg,m2,m3,m4,afford_rate,out_cy,cond_cy,band_cy,"
           "m2_excluded,failed\n";
    char line[512];
    for (const auto& r : report.rows) {
        std::snprintf(line, sizeof(line),
                      "%s,%d,%s,%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.3f,%.3f,%.3f,%d,%d\n",
                      report.method.c_str(), r.id, r.fg_clip.c_str(), r.bg_clip.c_str(), r.m1_fg,
                      r.m1_bg, r.m2, r.m3, r.m4, r.afford_rate, r.out_cy, r.cond_cy, r.band_cy,
                      int(r.m2_undefined), int(r.failed));
        out << line;
    }
    if (!out) throw io_error("short write: " + path);
}

void write_report_json(const MetricReport& report, const std::string& path) {
    nlohmann::json j{{"method", report.method},
                     {"m1_fg", report.m1_fg},
                     {"m1_bg", report.m1_bg},
                     {"m2", report.m2},
                     {"m3", report.m3},
                     {"m4", report.m4},
                     {"affordance_rate", report.afford_rate},
                     {"rows", report.n_rows},
                     {"failed", report.n_failed},
                     {"m2_excluded", report.n_m2_excluded}};
    std::ofstream out(path);
    if (!out) throw io_error("cannot open for write: " + path);
    out << j.dump(2) << "\n";
}

}  // namespace lc::eval
