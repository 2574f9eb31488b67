#include "lc/world/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "lc/core/error.hpp"
#include "lc/core/image_ops.hpp"
#include "lc/core/npy.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace lc::world {

namespace {

json sprite_to_json(const SpriteSpec& s) {
    return json{{"shape", to_string(s.shape)},
                {"color", {s.color[0], s.color[1], s.color[2]}},
                {"color_id", s.color_id},
                {"size", s.size},
                {"trajectory", to_string(s.trajectory)},
                {"x0", s.x0},
                {"y0", s.y0},
                {"vx", s.vx},
                {"amp", s.amp},
                {"period", s.period},
                {"phase", s.phase},
                {"vy", s.vy},
                {"y_min", s.y_min},
                {"y_max", s.y_max}};
}

SpriteSpec sprite_from_json(const json& j) {
    SpriteSpec s;
    s.shape = shape_from_string(j.at("shape").get<std::string>());
    auto c = j.at("color");
    s.color = {c[0].get<float>(), c[1].get<float>(), c[2].get<float>()};
    s.color_id = j.at("color_id").get<int>();
    s.size = j.at("size").get<int>();
    s.trajectory = trajectory_from_string(j.at("trajectory").get<std::string>());
    s.x0 = j.at("x0").get<float>();
    s.y0 = j.at("y0").get<float>();
    s.vx = j.at("vx").get<float>();
    s.amp = j.at("amp").get<float>();
    s.period = j.at("period").get<float>();
    s.phase = j.at("phase").get<float>();
    s.vy = j.at("vy").get<float>();
    s.y_min = j.at("y_min").get<float>();
    s.y_max = j.at("y_max").get<float>();
    return s;
}

json background_to_json(const BackgroundSpec& b) {
    return json{{"texture", to_string(b.texture)},
                {"camera_motion", {b.camera_motion[0], b.camera_motion[1]}},
                {"scene", to_string(b.scene)},
                {"band_lo", b.band_lo},
                {"band_hi", b.band_hi},
                {"horizon", b.horizon},
                {"texture_seed", b.texture_seed}};
}

BackgroundSpec background_from_json(const json& j) {
    BackgroundSpec b;
    b.texture = texture_from_string(j.at("texture").get<std::string>());
    auto cm = j.at("camera_motion");
    b.camera_motion = {cm[0].get<float>(), cm[1].get<float>()};
    b.scene = scene_from_string(j.at("scene").get<std::string>());
    b.band_lo = j.at("band_lo").get<float>();
    b.band_hi = j.at("band_hi").get<float>();
    b.horizon = j.at("horizon").get<float>();
    b.texture_seed = j.at("texture_seed").get<uint64_t>();
    return b;
}

json world_to_json(const WorldConfig& c) {
    return json{{"t", c.t},
                {"h", c.h},
                {"w", c.w},
                {"fps", c.fps},
                {"sprite_size_min", c.sprite_size_min},
                {"sprite_size_max", c.sprite_size_max},
                {"trajectories", c.trajectories},
                {"scenes", c.scenes},
                {"textures", c.textures},
                {"camera_speeds", c.camera_speeds},
                {"camera_vy", c.camera_vy}};
}

WorldConfig world_from_json(const json& j) {
    WorldConfig c;
    c.t = j.value("t", c.t);
    c.h = j.value("h", c.h);
    c.w = j.value("w", c.w);
    c.fps = j.value("fps", c.fps);
    c.sprite_size_min = j.value("sprite_size_min", c.sprite_size_min);
    c.sprite_size_max = j.value("sprite_size_max", c.sprite_size_max);
    if (j.contains("trajectories")) c.trajectories = j.at("trajectories").get<std::vector<std::string>>();
    if (j.contains("scenes")) c.scenes = j.at("scenes").get<std::vector<std::string>>();
    if (j.contains("textures")) c.textures = j.at("textures").get<std::vector<std::string>>();
    if (j.contains("camera_speeds")) c.camera_speeds = j.at("camera_speeds").get<std::vector<int>>();
    c.camera_vy = j.value("camera_vy", c.camera_vy);
    return c;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw io_error("bad JSON in " + path + ": " + e.what());
    }
    return j;
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open for write: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw io_error("short write: " + path);
}

}  // namespace

void save_clip_dir(const std::string& dir, const LayerSet& layers) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw io_error("cannot create directory: " + dir);
    save_clip_npy(dir + "/original.npy", layers.original);
    save_clip_npy(dir + "/fg.npy", layers.foreground);
    save_clip_npy(dir + "/bg.npy", layers.background);
    save_mask_packed(dir + "/mask.lcbm", layers.mask);
    json meta{{"caption", layers.caption},
              {"fps", layers.original.fps},
              {"oracle", layers.meta.oracle},
              {"seed", layers.meta.seed}};
    if (layers.meta.oracle) {
        meta["sprite"] = sprite_to_json(layers.meta.sprite);
        meta["background"] = background_to_json(layers.meta.background);
    }
    write_json_file(dir + "/meta.json", meta);
}

LayerSet load_clip_dir(const std::string& dir) {
    LayerSet out;
    std::string caption;
    out.meta = load_clip_meta(dir, &caption);
    out.caption = caption;
    float fps = 8.0f;
    {
        json j = load_json_file(dir + "/meta.json");
        fps = j.value("fps", 8.0f);
    }
    out.original = load_clip_npy(dir + "/original.npy", fps);
    out.foreground = load_clip_npy(dir + "/fg.npy", fps);
    out.background = load_clip_npy(dir + "/bg.npy", fps);
    out.mask = load_mask_packed(dir + "/mask.lcbm");
    return out;
}

VideoClip load_clip_layer(const std::string& dir, const std::string& layer) {
    return load_clip_npy(dir + "/" + layer + ".npy");
}

MaskVideo load_clip_mask(const std::string& dir) { return load_mask_packed(dir + "/mask.lcbm"); }

ClipMeta load_clip_meta(const std::string& dir, std::string* caption) {
    json j = load_json_file(dir + "/meta.json");
    ClipMeta m;
    m.oracle = j.value("oracle", false);
    m.seed = j.value("seed", uint64_t(0));
    if (caption) *caption = j.value("caption", "");
    if (m.oracle) {
        m.sprite = sprite_from_json(j.at("sprite"));
        m.background = background_from_json(j.at("background"));
    }
    return m;
}

std::string DatasetManifest::clip_dir(const std::string& id) const {
    return root + "/clips/" + id;
}

std::optional<int> out_of_band_shift(const ClipMeta& fg_meta, const BackgroundSpec& bg, int frames,
                                     int frame_h, int margin_px, Rng& rng) {
    float ymin = 1e9f, ymax = -1e9f;
    for (int f = 0; f < frames; ++f) {
        auto c = sprite_center(fg_meta.sprite, f);
        ymin = std::min(ymin, c[1]);
        ymax = std::max(ymax, c[1]);
    }
    float r = fg_meta.sprite.size * 0.5f;
    float band_lo = bg.band_lo * frame_h, band_hi = bg.band_hi * frame_h;
    // above the band
    int above_lo = (int)std::ceil(r + 0.5f - ymin);
    int above_hi = (int)std::floor(band_lo - margin_px - ymax);
    // below the band
    int below_lo = (int)std::ceil(band_hi + margin_px - ymin);
    int below_hi = (int)std::floor(frame_h - 1 - r - 0.5f - ymax);
    std::vector<std::pair<int, int>> zones;
    if (above_lo <= above_hi) zones.push_back({above_lo, above_hi});
    if (below_lo <= below_hi) zones.push_back({below_lo, below_hi});
    if (zones.empty()) return std::nullopt;
    auto [lo, hi] = zones[rng.uniform_int(0, int(zones.size()) - 1)];
    return int(rng.uniform_int(lo, hi));
}

DatasetManifest build_dataset(int n, const WorldConfig& cfg, const BuildOptions& opts,
                              const std::string& out_dir) {
    cfg.validate();
    if (n < 10) throw contract_error("build_dataset: n must be >= 10");
    double rsum = opts.split_ratios[0] + opts.split_ratios[1] + opts.split_ratios[2];
    if (std::fabs(rsum - 1.0) > 1e-9) throw contract_error("build_dataset: split ratios must sum to 1");

    std::error_code ec;
    fs::create_directories(out_dir + "/clips", ec);
    if (ec) throw io_error("cannot create output directory: " + out_dir);

    DatasetManifest m;
    m.world = cfg;
    m.seed = opts.seed;
    m.root = out_dir;

    std::vector<ClipMeta> metas;
    metas.reserve(n);
    for (int i = 0; i < n; ++i) {
        uint64_t clip_seed = Rng::mix({opts.seed, uint64_t(i)});
        LayerSet ls = generate_clip(clip_seed, cfg);
        char name[32];
        std::snprintf(name, sizeof(name), "clip_%06d", i);
        m.clip_ids.push_back(name);
        save_clip_dir(m.clip_dir(name), ls);
        metas.push_back(ls.meta);
    }

    // Largest-remainder split sizes, then a seeded shuffle for membership.
    int counts[3];
    {
        double exact[3];
        int base[3], total = 0;
        for (int k = 0; k < 3; ++k) {
            exact[k] = opts.split_ratios[k] * n;
            base[k] = (int)std::floor(exact[k]);
            total += base[k];
        }
        int rem = n - total;
        std::array<int, 3> order = {0, 1, 2};
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            double fa = exact[a] - std::floor(exact[a]);
            double fb = exact[b] - std::floor(exact[b]);
            if (fa != fb) return fa > fb;
            return a < b;
        });
        for (int k = 0; k < 3; ++k) counts[k] = base[k];
        for (int k = 0; k < rem; ++k) counts[order[k % 3]]++;
    }

    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    Rng shuffle_rng(Rng::mix({opts.seed, 0x5117ull}));
    for (int i = n - 1; i > 0; --i)
        std::swap(perm[i], perm[shuffle_rng.uniform_int(0, i)]);

    for (int i = 0; i < n; ++i) {
        const std::string& id = m.clip_ids[perm[i]];
        if (i < counts[0])
            m.train.push_back(id);
        else if (i < counts[0] + counts[1])
            m.val.push_back(id);
        else
            m.test.push_back(id);
    }

    // Cross-paired test triplets: foreground and background from different clips.
    int n_triplets = opts.benchmark_triplets > 0 ? opts.benchmark_triplets : int(m.test.size());
    if (opts.benchmark_triplets == 0 && m.test.size() < 2) n_triplets = 0;
    if (n_triplets > 0 && m.test.size() < 2)
        throw contract_error("build_dataset: need >= 2 test clips for cross-paired triplets");
    Rng trip_rng(Rng::mix({opts.seed, 0x7219ull}));
    auto index_of = [&](const std::string& id) {
        for (int i = 0; i < n; ++i)
            if (m.clip_ids[i] == id) return i;
        return -1;
    };
    int mtest = int(m.test.size());
    for (int k = 0; k < n_triplets; ++k) {
        TestTriplet t;
        int fi = k % mtest;
        int bi = (fi + 1 + (k / mtest)) % mtest;
        if (bi == fi) bi = (bi + 1) % mtest;
        t.fg_clip = m.test[fi];
        t.bg_clip = m.test[bi];
        const ClipMeta& fg_meta = metas[index_of(t.fg_clip)];
        const ClipMeta& bg_meta = metas[index_of(t.bg_clip)];
        const auto& pal = sprite_palette();
        t.prompt = make_caption(pal[fg_meta.sprite.color_id].name,
                                to_string(fg_meta.sprite.shape),
                                to_string(fg_meta.sprite.trajectory),
                                to_string(bg_meta.background.scene));
        if (opts.displace_out_of_band) {
            auto dy = out_of_band_shift(fg_meta, bg_meta.background, cfg.t, cfg.h,
                                        opts.displace_margin_px, trip_rng);
            if (dy) {
                t.shift_dy = *dy;
                t.displaced = true;
            }
        }
        m.triplets.push_back(t);
    }

    save_manifest(m, out_dir);
    return m;
}

void save_manifest(const DatasetManifest& m, const std::string& dir) {
    json j;
    j["world"] = world_to_json(m.world);
    j["seed"] = m.seed;
    j["clips"] = m.clip_ids;
    j["splits"] = json{{"train", m.train}, {"val", m.val}, {"test", m.test}};
    json trips = json::array();
    for (const auto& t : m.triplets)
        trips.push_back(json{{"fg", t.fg_clip},
                             {"bg", t.bg_clip},
                             {"prompt", t.prompt},
                             {"shift_dy", t.shift_dy},
                             {"shift_dx", t.shift_dx},
                             {"displaced", t.displaced}});
    j["test_triplets"] = trips;
    write_json_file(dir + "/manifest.json", j);
}

DatasetManifest load_manifest(const std::string& dir) {
    json j = load_json_file(dir + "/manifest.json");
    DatasetManifest m;
    m.root = dir;
    m.world = world_from_json(j.at("world"));
    m.seed = j.value("seed", uint64_t(0));
    m.clip_ids = j.at("clips").get<std::vector<std::string>>();
    m.train = j.at("splits").at("train").get<std::vector<std::string>>();
    m.val = j.at("splits").at("val").get<std::vector<std::string>>();
    m.test = j.at("splits").at("test").get<std::vector<std::string>>();
    for (const auto& t : j.at("test_triplets")) {
        TestTriplet tt;
        tt.fg_clip = t.at("fg").get<std::string>();
        tt.bg_clip = t.at("bg").get<std::string>();
        tt.prompt = t.at("prompt").get<std::string>();
        tt.shift_dy = t.value("shift_dy", 0);
        tt.shift_dx = t.value("shift_dx", 0);
        tt.displaced = t.value("displaced", false);
        m.triplets.push_back(tt);
    }
    return m;
}

TripletInputs load_triplet(const DatasetManifest& m, const TestTriplet& t) {
    TripletInputs in;
    std::string fg_dir = m.clip_dir(t.fg_clip);
    std::string bg_dir = m.clip_dir(t.bg_clip);
    in.fg = load_clip_layer(fg_dir, "fg");
    in.mask = load_clip_mask(fg_dir);
    in.bg = load_clip_layer(bg_dir, "bg");
    in.prompt = t.prompt;
    in.fg_meta = load_clip_meta(fg_dir);
    in.bg_meta = load_clip_meta(bg_dir);
    if (t.shift_dy != 0 || t.shift_dx != 0) {
        in.fg = shift(in.fg, t.shift_dy, t.shift_dx);
        in.mask = shift(in.mask, t.shift_dy, t.shift_dx);
    }
    return in;
}

}  // namespace lc::world
