#pragma once

#include <string>
#include <vector>

namespace lc::cli {

// Entry point behind the binary: parses argv (excluding the program name),
// runs one of {gen-data, decompose, train, compose, evaluate, judge,
// report}, and writes a RunManifest next to the outputs. Exit codes:
// 0 success, 1 usage error, 2 runtime failure.
int dispatch(const std::vector<std::string>& argv);

// ---- report internals, exposed for the direction-bolding oracle tests ----

struct MethodSummary {
    std::string method;
    double m1_fg = 0, m1_bg = 0, m2 = 0, m3 = 0, m4 = 0, afford = 0;
    int rows = 0;
};

// Aggregates a per-triplet metrics CSV written by `evaluate`.
MethodSummary summarize_metrics_csv(const std::string& path);

// Markdown table in the benchmark column layout (identity FG/BG, action,
// motion, textual alignment, affordance), best value per column bolded with
// the column's direction (up or down) respected.
std::string render_markdown_table(const std::vector<MethodSummary>& methods);

// Per-column optimization direction: true = higher is better, matching the
// table layout above.
std::vector<bool> table_directions();

// Simple SVG line plot of loss curves (step vs loss_total).
std::string render_loss_svg(const std::vector<std::pair<std::string, std::string>>& csvs);

}  // namespace lc::cli
