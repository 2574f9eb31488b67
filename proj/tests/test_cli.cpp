#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "lc/cli/commands.hpp"
#include "lc/core/y4m.hpp"
#include "lc/world/dataset.hpp"

using namespace lc;
namespace fs = std::filesystem;

namespace {
std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(bool(in));
    return std::string(std::istreambuf_iterator<char>(in), {});
}
void write_file(const std::string& path, const std::string& content) {
    std::ofstream(path) << content;
}
}  // namespace

TEST_CASE("dispatch: usage errors exit 1 without writing outputs") {
    CHECK(cli::dispatch({"frobnicate"}) == 1);
    CHECK(cli::dispatch({"gen-data", "--does-not-exist", "x"}) == 1);
    CHECK(cli::dispatch({}) == 1);
    CHECK_FALSE(fs::exists("x"));
}

TEST_CASE("dispatch: runtime failures exit 2") {
    CHECK(cli::dispatch({"train", "--data", "/tmp/no_such_dataset_dir", "--out", "/tmp/lc_t"}) ==
          2);
}

TEST_CASE("gen-data: writes clips, manifest, and exactly one run manifest") {
    std::string dir = "/tmp/lc_cli_gen";
    fs::remove_all(dir);
    int rc = cli::dispatch({"gen-data", "--n", "12", "--out", dir, "--seed", "4", "--ratios",
                            "0.5,0.25,0.25", "--benchmark-triplets", "5"});
    CHECK(rc == 0);
    CHECK(fs::exists(dir + "/manifest.json"));
    CHECK(fs::exists(dir + "/run_manifest.json"));
    auto m = world::load_manifest(dir);
    CHECK(m.clip_ids.size() == 12);
    CHECK(m.triplets.size() == 5);
    CHECK(fs::exists(m.clip_dir(m.clip_ids[0]) + "/original.npy"));
    auto rm = nlohmann::json::parse(slurp(dir + "/run_manifest.json"));
    CHECK(rm.at("command") == "gen-data");
    CHECK(rm.contains("config_hash"));
    CHECK(rm.contains("argv"));
    fs::remove_all(dir);
}

TEST_CASE("decompose: oracle and algorithmic paths via the CLI") {
    std::string dir = "/tmp/lc_cli_dec_data";
    fs::remove_all(dir);
    REQUIRE(cli::dispatch({"gen-data", "--n", "10", "--out", dir, "--seed", "6"}) == 0);
    auto m = world::load_manifest(dir);

    std::string out_o = "/tmp/lc_cli_dec_oracle";
    fs::remove_all(out_o);
    std::string clip0 = m.clip_dir(m.clip_ids[0]);
    REQUIRE(cli::dispatch({"decompose", clip0, out_o, "--path", "oracle"}) == 0);
    auto orig = world::load_clip_dir(clip0);
    auto dec = world::load_clip_dir(out_o + "/clip");
    CHECK(dec.mask.data == orig.mask.data);  // oracle path is a passthrough
    CHECK(dec.caption == orig.caption);

    std::string out_a = "/tmp/lc_cli_dec_algo";
    fs::remove_all(out_a);
    REQUIRE(cli::dispatch({"decompose", clip0, out_a, "--path", "algorithmic"}) == 0);
    auto alg = world::load_clip_dir(out_a + "/clip");
    CHECK(alg.original.data == orig.original.data);
    CHECK(alg.mask.count() > 0);
    fs::remove_all(dir);
    fs::remove_all(out_o);
    fs::remove_all(out_a);
}

TEST_CASE("report: table rows, bolding oracle, parse errors") {
    std::string dir = "/tmp/lc_cli_report";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto csv_for = [&](const std::string& name, double m1fg, double m3) {
        std::string path = dir + "/" + name + ".csv";
        std::ofstream f(path);
        f << "method,triplet,fg,bg,m1_fg,m1_bg,m2,m3,m4,afford_rate,out_cy,cond_cy,band_cy,"
             "m2_excluded,failed\n";
        f << name << ",0,a,b," << m1fg << ",0.9,0.1," << m3 << ",0.8,0.7,1,1,1,0,0\n";
        f << name << ",1,a,b," << m1fg << ",0.9,0.1," << m3 << ",0.8,0.7,1,1,1,0,0\n";
        return path;
    };
    std::string a = csv_for("alpha", 0.95, 2.0);
    std::string b = csv_for("beta", 0.90, 0.5);

    int rc = cli::dispatch({"report", "--metrics", a, b, "--out", dir + "/out"});
    CHECK(rc == 0);
    std::string md = slurp(dir + "/out/report.md");
    CHECK(md.find("| alpha |") != std::string::npos);
    CHECK(md.find("| beta |") != std::string::npos);
    // direction-aware bolding: m1_fg up -> alpha; m3 down -> beta
    CHECK(md.find("**0.9500**") != std::string::npos);
    CHECK(md.find("**0.5000**") != std::string::npos);
    CHECK(md.find("**2.0000**") == std::string::npos);

    // malformed CSV names the row
    std::string bad = dir + "/bad.csv";
    write_file(bad, "method,triplet\nonly,two,columns\n");
    CHECK(cli::dispatch({"report", "--metrics", bad, "--out", dir + "/out2"}) == 2);
    // empty CSV -> parse error
    std::string empty = dir + "/empty.csv";
    write_file(empty, "");
    CHECK(cli::dispatch({"report", "--metrics", empty, "--out", dir + "/out3"}) == 2);
    fs::remove_all(dir);
}

TEST_CASE("report: bolding matches an argmin/argmax oracle under random tables") {
    Rng rng(9);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<cli::MethodSummary> ms(3);
        for (int i = 0; i < 3; ++i) {
            ms[i].method = "m" + std::to_string(i);
            ms[i].m1_fg = rng.unit();
            ms[i].m1_bg = rng.unit();
            ms[i].m2 = rng.unit();
            ms[i].m3 = rng.unit() * 5;
            ms[i].m4 = rng.unit();
            ms[i].afford = rng.unit();
            ms[i].rows = 1;
        }
        std::string md = cli::render_markdown_table(ms);
        auto dirs = cli::table_directions();
        auto val = [&](int i, int col) {
            switch (col) {
                case 0: return ms[i].m1_fg;
                case 1: return ms[i].m1_bg;
                case 2: return ms[i].m2;
                case 3: return ms[i].m3;
                case 4: return ms[i].m4;
                default: return ms[i].afford;
            }
        };
        for (int col = 0; col < 6; ++col) {
            int best = 0;
            for (int i = 1; i < 3; ++i)
                if (dirs[col] ? val(i, col) > val(best, col) : val(i, col) < val(best, col))
                    best = i;
            char buf[32];
            std::snprintf(buf, sizeof(buf), "**%.4f**", val(best, col));
            CHECK(md.find(buf) != std::string::npos);
        }
    }
}

TEST_CASE("y4m: save/load round trip geometry") {
    VideoClip clip(3, 16, 16, 8.0f);
    Rng rng(2);
    for (auto& v : clip.data) v = float(rng.unit());
    save_y4m("/tmp/lc_test.y4m", clip);
    VideoClip back = load_y4m("/tmp/lc_test.y4m");
    CHECK(back.t == 3);
    CHECK(back.h == 16);
    CHECK(back.w == 16);
    CHECK(back.fps == doctest::Approx(8.0f));
    // YUV444 8-bit round trip is close but not exact
    double max_err = 0;
    for (size_t i = 0; i < clip.data.size(); ++i)
        max_err = std::max(max_err, std::fabs(double(clip.data[i]) - back.data[i]));
    CHECK(max_err < 0.02);
    fs::remove("/tmp/lc_test.y4m");
}

TEST_CASE("judge CLI: stub transport end to end") {
    std::string dir = "/tmp/lc_cli_judge";
    fs::remove_all(dir);
    for (const char* sub : {"/ours", "/base", "/fgref"}) {
        fs::create_directories(dir + sub);
        for (int i = 0; i < 3; ++i)
            write_file(dir + sub + "/v" + std::to_string(i) + ".y4m", "bytes");
    }
    int rc = cli::dispatch({"judge", "--metric", "fg_identity", "--ours", dir + "/ours",
                            "--baseline", dir + "/base", "--fg-ref", dir + "/fgref", "--transport",
                            "stub", "--stub-script", "A", "--out", dir + "/out"});
    CHECK(rc == 0);
    auto j = nlohmann::json::parse(slurp(dir + "/out/verdicts.json"));
    CHECK(j.at("verdicts").size() == 3);
    CHECK(fs::exists(dir + "/out/run_manifest.json"));
    fs::remove_all(dir);
}
