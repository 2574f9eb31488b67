#include "lc/train/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <omp.h>

#include "lc/core/error.hpp"
#include "lc/model/checkpoint.hpp"

namespace lc::train {

double lr_at(const TrainConfig& cfg, int64_t step) {
    if (step <= cfg.warmup) return cfg.base_lr * double(step) / double(cfg.warmup);
    double u = double(step - cfg.warmup) / double(cfg.iterations - cfg.warmup);
    return cfg.base_lr * 0.5 * (1.0 + std::cos(3.14159265358979323846 * u));
}

Trainer::Trainer(TrainerBundle bundle, const world::DatasetManifest& data, std::string out_dir)
    : bundle_(std::move(bundle)), data_(data), out_dir_(std::move(out_dir)) {
    bundle_.train.validate();
    bundle_.model.validate();
    require(!data_.train.empty(), "trainer: empty train split");
    composer_ = std::make_unique<model::Composer<float>>(bundle_.model);
    composer_->init_weights(Rng::mix({bundle_.train.seed, 0x1417ull}));
    vcodec_ = std::make_unique<codec::VideoCodec>(bundle_.codec);
    tcodec_ = std::make_unique<codec::TextCodec>(bundle_.codec);
    schedule_ = std::make_unique<diffusion::Schedule>(bundle_.schedule);
    require(bundle_.model.latent_channels == vcodec_->channels(),
            "trainer: model latent_channels must equal codec channels");
    require(bundle_.model.t_diff == bundle_.schedule.t_diff,
            "trainer: model and schedule t_diff disagree");
    require(bundle_.model.text_dim == bundle_.codec.text_dim,
            "trainer: model and codec text_dim disagree");
    require(bundle_.model.l_max >= bundle_.codec.l_max,
            "trainer: model l_max below the text codec cap");
    adam_m_ = composer_->params.make_buffers();
    adam_v_ = composer_->params.make_buffers();
}

struct Trainer::LaneResult {
    std::vector<nn::Mat<float>> grads;
    double loss = 0, loss_fg = 0, loss_bg = 0;
    int count = 0;
    std::vector<SampleObs> obs;
};

void Trainer::train_step(const StepObserver& observer) {
    const TrainConfig& tc = bundle_.train;
    const int64_t step = step_ + 1;  // 1-indexed

    Rng brng = batch_rng(tc.seed, step);
    std::vector<int> batch(tc.batch);
    for (int i = 0; i < tc.batch; ++i)
        batch[i] = int(brng.uniform_int(0, int64_t(data_.train.size()) - 1));

    const int lanes = std::min(tc.lanes, tc.batch);
    std::vector<LaneResult> lane(lanes);
    for (auto& l : lane) l.grads = composer_->params.make_buffers();

    std::exception_ptr lane_error;
#pragma omp parallel for num_threads(lanes) schedule(static, 1)
    for (int li = 0; li < lanes; ++li) {
        try {
            LaneResult& L = lane[li];
            for (int i = li; i < tc.batch; i += lanes) {
                world::LayerSet clip = world::load_clip_dir(data_.clip_dir(data_.train[batch[i]]));
                const int t = timestep_for(tc.seed, step, i, bundle_.schedule.t_diff);

                VideoClip fg = clip.foreground;
                MaskVideo fg_mask = clip.mask;
                if (tc.augmentation) {
                    Rng arng = aug_rng(tc.seed, step, i);
                    auto params = augment::sample_params(clip.mask, arng, tc.aug);
                    std::tie(fg, fg_mask) = augment::apply(clip.foreground, clip.mask, params);
                }

                codec::Latent z_org = vcodec_->encode(clip.original);
                codec::Latent z_fg = vcodec_->encode(fg);
                codec::Latent z_bg = vcodec_->encode(clip.background);
                // loss weighting follows the original (un-augmented) mask
                codec::FracMask lmask = vcodec_->downsample_mask(clip.mask);
                codec::TextEmbedding text = tcodec_->encode(clip.caption);

                Rng erng = eps_rng(tc.seed, step, i);
                codec::Latent eps = diffusion::gaussian_like(z_org, erng);
                codec::Latent z_noisy = diffusion::add_noise(z_org, t, eps, *schedule_);

                nn::Tape<float> tape;
                auto bound = composer_->bind(tape, &L.grads);
                auto zn = tape.constant(model::latent_to_mat<float>(z_noisy));
                auto zf = tape.constant(model::latent_to_mat<float>(z_fg));
                auto zb = tape.constant(model::latent_to_mat<float>(z_bg));
                auto vis = composer_->fuse(tape, bound, zn, zf, zb);
                auto pred = composer_->forward(tape, bound, vis, text,
                                               {z_org.t, z_org.h, z_org.w}, t);

                nn::Mat<float> target = model::latent_to_mat<float>(z_org);
                typename nn::Tape<float>::Id loss_node;
                if (tc.id_loss) {
                    loss_node = diffusion::identity_loss_node(tape, pred, target, lmask,
                                                              {tc.loss_alpha});
                } else {
                    loss_node = diffusion::plain_mse_node(tape, pred, target);
                }
                tape.backward(loss_node);

                double tape_loss = double(tape.val(loss_node)(0, 0));
                if (!std::isfinite(tape_loss)) {
                    // handled by the step-level abort-and-dump path
                    L.loss += tape_loss;
                    L.loss_fg += tape_loss;
                    L.loss_bg += tape_loss;
                    L.count += 1;
                    continue;
                }
                codec::Latent pred_lat = model::mat_to_latent<float>(
                    tape.val(pred), z_org.t, z_org.h, z_org.w, z_org.factors);
                if (tc.id_loss) {
                    auto lb = diffusion::identity_loss(pred_lat, z_org, lmask, {tc.loss_alpha});
                    L.loss += lb.total;
                    L.loss_fg += lb.fg;
                    L.loss_bg += lb.bg;
                } else {
                    double mse = diffusion::plain_mse(pred_lat, z_org);
                    L.loss += mse;
                    L.loss_fg += mse;
                    L.loss_bg += mse;
                }
                L.count += 1;
                if (observer) L.obs.push_back(SampleObs{pred_lat, z_org, lmask, t});
            }
        } catch (...) {
#pragma omp critical
            if (!lane_error) lane_error = std::current_exception();
        }
    }
    if (lane_error) std::rethrow_exception(lane_error);

    // deterministic merge in lane order, normalized to a batch mean
    auto& params = composer_->params;
    std::vector<nn::Mat<float>> grads = params.make_buffers();
    const float inv_b = 1.0f / float(tc.batch);
    for (int li = 0; li < lanes; ++li)
        for (size_t p = 0; p < grads.size(); ++p)
            for (size_t k = 0; k < grads[p].v.size(); ++k)
                grads[p].v[k] += lane[li].grads[p].v[k] * inv_b;

    StepRecord rec;
    rec.step = step;
    for (int li = 0; li < lanes; ++li) {
        rec.loss_total += lane[li].loss;
        rec.loss_fg += lane[li].loss_fg;
        rec.loss_bg += lane[li].loss_bg;
    }
    rec.loss_total /= tc.batch;
    rec.loss_fg /= tc.batch;
    rec.loss_bg /= tc.batch;

    if (!std::isfinite(rec.loss_total)) {
        // diagnostic dump of the offending batch, then abort
        nlohmann::json dump{{"step", step}, {"loss", rec.loss_total}};
        nlohmann::json items = nlohmann::json::array();
        for (int i = 0; i < tc.batch; ++i)
            items.push_back({{"clip", data_.train[batch[i]]},
                             {"timestep", timestep_for(tc.seed, step, i, bundle_.schedule.t_diff)}});
        dump["batch"] = items;
        std::ofstream out(out_dir_ + "/nan_dump.json");
        out << dump.dump(2) << "\n";
        throw training_error("non-finite loss at step " + std::to_string(step) +
                             " (diagnostics in nan_dump.json)");
    }

    double norm_sq = 0;
    for (const auto& g : grads)
        for (float v : g.v) norm_sq += double(v) * double(v);
    rec.grad_norm = std::sqrt(norm_sq);
    if (rec.grad_norm > tc.clip_norm && rec.grad_norm > 0) {
        float s = float(tc.clip_norm / rec.grad_norm);
        double post_sq = 0;
        for (auto& g : grads)
            for (float& v : g.v) {
                v *= s;
                post_sq += double(v) * double(v);
            }
        rec.grad_norm_post = std::sqrt(post_sq);
    } else {
        rec.grad_norm_post = rec.grad_norm;
    }

    rec.lr = lr_at(tc, step);
    const double bc1 = 1.0 - std::pow(tc.beta1, double(step));
    const double bc2 = 1.0 - std::pow(tc.beta2, double(step));
    for (size_t p = 0; p < params.items.size(); ++p) {
        auto& w = params.items[p].w.v;
        auto& m = adam_m_[p].v;
        auto& v = adam_v_[p].v;
        const auto& g = grads[p].v;
        for (size_t k = 0; k < w.size(); ++k) {
            m[k] = float(tc.beta1) * m[k] + float(1.0 - tc.beta1) * g[k];
            v[k] = float(tc.beta2) * v[k] + float(1.0 - tc.beta2) * g[k] * g[k];
            double mhat = double(m[k]) / bc1;
            double vhat = double(v[k]) / bc2;
            double upd = mhat / (std::sqrt(vhat) + tc.adam_eps) + tc.weight_decay * double(w[k]);
            w[k] = float(double(w[k]) - rec.lr * upd);
        }
    }

    step_ = step;
    history_.push_back(rec);
    if (observer) {
        std::vector<SampleObs> all;
        for (auto& l : lane)
            for (auto& o : l.obs) all.push_back(std::move(o));
        observer(rec, all);
    }
}

void Trainer::run(const StepObserver& observer, int64_t until_step) {
    const TrainConfig& tc = bundle_.train;
    int64_t stop = until_step < 0 ? tc.iterations : std::min<int64_t>(until_step, tc.iterations);
    std::string csv_path = out_dir_ + "/metrics.csv";
    bool fresh = step_ == 0;
    std::ofstream csv(csv_path, fresh ? std::ios::trunc : std::ios::app);
    if (!csv) throw io_error("trainer: cannot open " + csv_path);
    if (fresh) csv << "step,loss_total,loss_fg,loss_bg,lr,grad_norm\n";

    while (step_ < stop) {
        train_step(observer);
        const StepRecord& r = history_.back();
        if (r.step % tc.log_every == 0) {
            char line[256];
            std::snprintf(line, sizeof(line), "%lld,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                          (long long)r.step, r.loss_total, r.loss_fg, r.loss_bg, r.lr, r.grad_norm);
            csv << line;
            csv.flush();
        }
        if (r.step % tc.checkpoint_every == 0 || r.step == tc.iterations)
            save_state(out_dir_ + "/ckpt_step" + std::to_string(r.step) + ".lckp");
    }
    if (step_ >= tc.iterations) save_state(out_dir_ + "/ckpt_final.lckp");
}

void Trainer::save_state(const std::string& path) const {
    model::CheckpointData ck;
    ck.header["kind"] = "train-state";
    ck.header["step"] = step_;
    ck.header["model"] = bundle_.model;
    ck.header["codec"] = bundle_.codec;
    ck.header["schedule"] = bundle_.schedule;
    ck.header["train"] = bundle_.train;
    model::params_to_sections(composer_->params, "model/", ck);
    for (size_t p = 0; p < composer_->params.items.size(); ++p) {
        ck.sections.emplace_back("adam_m/" + composer_->params.items[p].name, adam_m_[p].v);
        ck.sections.emplace_back("adam_v/" + composer_->params.items[p].name, adam_v_[p].v);
    }
    model::save_checkpoint(path, ck);
}

std::unique_ptr<Trainer> Trainer::resume(const std::string& checkpoint_path,
                                         const world::DatasetManifest& data,
                                         const std::string& out_dir) {
    model::CheckpointData ck = model::load_checkpoint(checkpoint_path);
    if (ck.header.value("kind", "") != "train-state")
        throw io_error("resume: checkpoint is not a training state: " + checkpoint_path);
    TrainerBundle b;
    b.model = ck.header.at("model").get<model::ModelConfig>();
    b.codec = ck.header.at("codec").get<codec::CodecConfig>();
    b.schedule = ck.header.at("schedule").get<diffusion::ScheduleConfig>();
    b.train = ck.header.at("train").get<TrainConfig>();
    auto trainer = std::make_unique<Trainer>(b, data, out_dir);
    model::sections_to_params(ck, "model/", trainer->composer_->params);
    for (size_t p = 0; p < trainer->composer_->params.items.size(); ++p) {
        const auto& name = trainer->composer_->params.items[p].name;
        const auto* m = ck.find("adam_m/" + name);
        const auto* v = ck.find("adam_v/" + name);
        if (!m || !v || m->size() != trainer->adam_m_[p].v.size() ||
            v->size() != trainer->adam_v_[p].v.size())
            throw io_error("resume: optimizer state missing or mismatched for " + name);
        trainer->adam_m_[p].v = *m;
        trainer->adam_v_[p].v = *v;
    }
    trainer->step_ = ck.header.at("step").get<int64_t>();
    return trainer;
}

}  // namespace lc::train
