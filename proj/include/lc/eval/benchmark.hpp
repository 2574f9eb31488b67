#pragma once

#include <string>
#include <vector>

#include "lc/eval/metrics.hpp"
#include "lc/model/infer.hpp"
#include "lc/world/dataset.hpp"

namespace lc::eval {

enum class Method { model, copy_paste, oracle_original };
Method method_from_string(const std::string& s);
const char* to_string(Method m);

struct BenchmarkOptions {
    Method method = Method::model;
    int steps = 50;
    uint64_t seed = 0;
    int max_triplets = 0;  // 0: all
    double locate_threshold = 0.12;
};

struct TripletRow {
    int id = 0;
    std::string fg_clip, bg_clip;
    double m1_fg = 0, m1_bg = 0, m2 = 0, m3 = 0, m4 = 0;
    double afford_rate = 0;
    // per-triplet geometry for the shortcut-learning analysis
    double out_cy = 0, cond_cy = 0, band_cy = 0;
    bool m2_undefined = false;
    bool failed = false;
    std::string error;
};

struct MetricReport {
    std::string method;
    std::vector<TripletRow> rows;
    double m1_fg = 0, m1_bg = 0, m2 = 0, m3 = 0, m4 = 0, afford_rate = 0;
    int n_rows = 0, n_failed = 0, n_m2_excluded = 0;
};

// Per triplet: generate -> decompose the output -> metrics against the
// input layers; the affordance hit rate is the fraction of frames whose
// located subject center falls inside the background's band.
MetricReport evaluate_benchmark(const model::InferenceEngine* engine,
                                const world::DatasetManifest& data, const BenchmarkOptions& opts);

// The built-in baseline: paste the conditioning foreground, frame by frame,
// onto the first background frame (static scene, preserved subject).
VideoClip copy_paste_baseline(const world::TripletInputs& in);

void write_report_csv(const MetricReport& report, const std::string& path);
void write_report_json(const MetricReport& report, const std::string& path);
MetricReport aggregate_rows(const std::string& method, std::vector<TripletRow> rows);

}  // namespace lc::eval
