#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "lc/model/checkpoint.hpp"
#include "lc/model/infer.hpp"
#include "lc/train/trainer.hpp"

using namespace lc;
using namespace lc::train;

namespace {

struct SmokeSetup {
    std::string data_dir = "/tmp/lc_train_smoke_data";
    world::DatasetManifest manifest;

    SmokeSetup() {
        if (!std::filesystem::exists(data_dir + "/manifest.json")) {
            world::WorldConfig wcfg;
            wcfg.t = 8;
            wcfg.h = 32;
            wcfg.w = 32;
            wcfg.sprite_size_min = 6;
            wcfg.sprite_size_max = 10;
            world::BuildOptions opts;
            opts.split_ratios = {0.9, 0.05, 0.05};
            world::build_dataset(64, wcfg, opts, data_dir);
        }
        manifest = world::load_manifest(data_dir);
    }
};

TrainerBundle smoke_bundle(int iterations, uint64_t seed = 1) {
    TrainerBundle b;
    b.codec.f_t = 2;
    b.codec.f_h = 8;
    b.codec.f_w = 8;  // 8x32x32 -> 4x4x4 grid, c=384
    b.model.latent_channels = 384;
    b.model.fusion_channels = 48;
    b.model.depth = 2;
    b.model.width = 48;
    b.model.heads = 2;
    b.model.text_dim = b.codec.text_dim;
    b.model.t_diff = 1000;
    b.schedule.t_diff = 1000;
    b.train.batch = 8;
    b.train.iterations = iterations;
    b.train.warmup = std::max(1, iterations / 10);
    b.train.base_lr = 3e-4;
    b.train.seed = seed;
    b.train.checkpoint_every = 1000000;
    b.train.lanes = 2;
    return b;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("train: 50-step smoke run decreases the smoothed loss") {
    SmokeSetup s;
    std::string out = "/tmp/lc_train_smoke_run";
    std::filesystem::remove_all(out);
    std::filesystem::create_directories(out);
    Trainer trainer(smoke_bundle(50), s.manifest, out);
    trainer.run();
    auto hist = trainer.history();
    REQUIRE(hist.size() == 50);
    double w_first = 0, w_last = 0;
    for (int i = 0; i < 10; ++i) {
        w_first += hist[i].loss_total / 10;
        w_last += hist[40 + i].loss_total / 10;
    }
    CHECK(w_last < w_first);
    CHECK(hist[49].loss_total < hist[0].loss_total);
    // logged loss decomposition holds at every step
    for (const auto& r : hist) {
        CHECK(std::isfinite(r.loss_total));
        CHECK(r.loss_total ==
              doctest::Approx(0.5 * r.loss_fg + 0.5 * r.loss_bg).epsilon(1e-7));
        CHECK(r.grad_norm_post <= 1.0 + 1e-6);
    }
    CHECK(std::filesystem::exists(out + "/metrics.csv"));
    CHECK(std::filesystem::exists(out + "/ckpt_final.lckp"));
}

TEST_CASE("train: fixed seed reproduces a bit-identical loss curve") {
    SmokeSetup s;
    std::string o1 = "/tmp/lc_train_det1", o2 = "/tmp/lc_train_det2";
    for (auto& o : {o1, o2}) {
        std::filesystem::remove_all(o);
        std::filesystem::create_directories(o);
    }
    Trainer t1(smoke_bundle(12, 7), s.manifest, o1);
    t1.run();
    Trainer t2(smoke_bundle(12, 7), s.manifest, o2);
    t2.run();
    auto h1 = t1.history(), h2 = t2.history();
    REQUIRE(h1.size() == h2.size());
    for (size_t i = 0; i < h1.size(); ++i) {
        CHECK(h1[i].loss_total == h2[i].loss_total);
        CHECK(h1[i].grad_norm == h2[i].grad_norm);
    }
    CHECK(slurp(o1 + "/metrics.csv") == slurp(o2 + "/metrics.csv"));
}

TEST_CASE("train: resume matches an uninterrupted run step-for-step") {
    SmokeSetup s;
    std::string oa = "/tmp/lc_train_full", ob = "/tmp/lc_train_half";
    for (auto& o : {oa, ob}) {
        std::filesystem::remove_all(o);
        std::filesystem::create_directories(o);
    }
    Trainer full(smoke_bundle(20, 3), s.manifest, oa);
    full.run();
    auto hist_full = full.history();

    Trainer half(smoke_bundle(20, 3), s.manifest, ob);
    half.run(nullptr, 10);  // interrupt mid-run
    half.save_state(ob + "/state10.lckp");

    auto cont = Trainer::resume(ob + "/state10.lckp", s.manifest, ob);
    REQUIRE(cont->step() == 10);
    cont->run();
    auto hist_cont = cont->history();
    REQUIRE(hist_cont.size() == 10);
    for (int i = 0; i < 10; ++i) {
        CHECK(hist_cont[i].loss_total == hist_full[10 + i].loss_total);
        CHECK(hist_cont[i].grad_norm == hist_full[10 + i].grad_norm);
    }

    // resume of a finished state schedules zero further steps
    auto done = Trainer::resume(oa + "/ckpt_final.lckp", s.manifest, oa);
    REQUIRE(done->step() == 20);
    done->run();
    CHECK(done->history().empty());
}

TEST_CASE("train: corrupted checkpoint fails to load without mutating state") {
    SmokeSetup s;
    std::string out = "/tmp/lc_train_corrupt";
    std::filesystem::remove_all(out);
    std::filesystem::create_directories(out);
    auto b = smoke_bundle(3, 5);
    Trainer t(b, s.manifest, out);
    t.run();
    std::string path = out + "/ckpt_final.lckp";

    // flip one payload byte -> checksum mismatch
    std::string blob = slurp(path);
    blob[blob.size() / 2] ^= 0x40;
    std::ofstream(path + ".bad", std::ios::binary) << blob;
    CHECK_THROWS_AS(Trainer::resume(path + ".bad", s.manifest, out), io_error);
    CHECK_THROWS_AS(model::load_checkpoint(path + ".bad"), io_error);

    std::ofstream(path + ".junk", std::ios::binary) << "not a checkpoint";
    CHECK_THROWS_AS(model::load_checkpoint(path + ".junk"), io_error);
}

TEST_CASE("train: ablation flags (off,off) match the plain MSE oracle per step") {
    SmokeSetup s;
    std::string out = "/tmp/lc_train_ablation";
    std::filesystem::remove_all(out);
    std::filesystem::create_directories(out);
    auto b = smoke_bundle(6, 11);
    b.train.augmentation = false;
    b.train.id_loss = false;
    Trainer t(b, s.manifest, out);
    int checked = 0;
    t.run([&](const StepRecord& rec, const std::vector<SampleObs>& obs) {
        REQUIRE(!obs.empty());
        double oracle = 0;
        for (const auto& o : obs) oracle += diffusion::plain_mse(o.pred, o.target);
        oracle /= double(obs.size());
        CHECK(rec.loss_total == doctest::Approx(oracle).epsilon(1e-9));
        ++checked;
    });
    CHECK(checked == 6);
}

TEST_CASE("train: NaN loss aborts with a diagnostic dump") {
    SmokeSetup s;
    std::string out = "/tmp/lc_train_nan";
    std::filesystem::remove_all(out);
    std::filesystem::create_directories(out);
    auto b = smoke_bundle(3, 13);
    Trainer t(b, s.manifest, out);
    // poison a weight
    const_cast<model::Composer<float>&>(t.composer()).params.items[0].w.v[0] = std::nanf("");
    CHECK_THROWS_AS(t.run(), training_error);
    CHECK(std::filesystem::exists(out + "/nan_dump.json"));
}

TEST_CASE("train: lr schedule shape") {
    TrainConfig cfg;
    cfg.base_lr = 1e-4;
    cfg.warmup = 200;
    cfg.iterations = 5000;
    CHECK(lr_at(cfg, cfg.warmup) == cfg.base_lr);  // max exactly at warmup end
    for (int s = 2; s <= cfg.warmup; ++s) CHECK(lr_at(cfg, s) > lr_at(cfg, s - 1));
    for (int s = cfg.warmup + 1; s <= cfg.iterations; s += 100)
        CHECK(lr_at(cfg, s) < lr_at(cfg, s - 1));
    CHECK(lr_at(cfg, cfg.iterations) < 1e-9);
}

TEST_CASE("train: timestep draws are uniform (chi-square)") {
    const int t_diff = 1000, bins = 50, n = 100000;
    std::vector<int> counts(bins, 0);
    for (int i = 0; i < n; ++i) {
        int t = timestep_for(99, i / 16, i % 16, t_diff);
        REQUIRE(t >= 0);
        REQUIRE(t < t_diff);
        counts[t * bins / t_diff]++;
    }
    double expect = double(n) / bins, chi2 = 0;
    for (int c : counts) chi2 += (c - expect) * (c - expect) / expect;
    // dof = 49: mean 49, sd ~9.9; 3 sigma
    CHECK(chi2 < 49 + 3 * std::sqrt(2.0 * 49));
}
