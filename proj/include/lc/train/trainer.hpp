#pragma once

#include <functional>
#include <memory>
#include <string>

#include "lc/train/configs.hpp"
#include "lc/world/dataset.hpp"

namespace lc::train {

// Stateless per-step randomness: resuming a run replays the same streams.
inline Rng batch_rng(uint64_t seed, int64_t step) {
    return Rng(Rng::mix({seed, uint64_t(step), 0xba7cull}));
}
inline int timestep_for(uint64_t seed, int64_t step, int sample, int t_diff) {
    Rng r(Rng::mix({seed, uint64_t(step), uint64_t(sample), 0x7153ull}));
    return int(r.uniform_int(0, t_diff - 1));
}
inline Rng aug_rng(uint64_t seed, int64_t step, int sample) {
    return Rng(Rng::mix({seed, uint64_t(step), uint64_t(sample), 0xa060ull}));
}
inline Rng eps_rng(uint64_t seed, int64_t step, int sample) {
    return Rng(Rng::mix({seed, uint64_t(step), uint64_t(sample), 0xe95ull}));
}

struct StepRecord {
    int64_t step = 0;
    double loss_total = 0, loss_fg = 0, loss_bg = 0;
    double lr = 0, grad_norm = 0;  // pre-clip global norm (logged)
    double grad_norm_post = 0;     // recomputed after clipping
};

// Test observer: per-sample prediction/target/mask of a step.
struct SampleObs {
    codec::Latent pred, target;
    codec::FracMask mask;
    int timestep = 0;
};
using StepObserver = std::function<void(const StepRecord&, const std::vector<SampleObs>&)>;

struct TrainerBundle {
    model::ModelConfig model;
    codec::CodecConfig codec;
    diffusion::ScheduleConfig schedule;
    TrainConfig train;
};

class Trainer {
  public:
    Trainer(TrainerBundle bundle, const world::DatasetManifest& data, std::string out_dir);

    // Restore a full training state written by save_state()/checkpoints.
    static std::unique_ptr<Trainer> resume(const std::string& checkpoint_path,
                                           const world::DatasetManifest& data,
                                           const std::string& out_dir);

    // Runs from the current step to train.iterations (or until_step when
    // non-negative). Appends to metrics.csv, checkpoints every
    // checkpoint_every steps and at the end of the full horizon.
    void run(const StepObserver& observer = nullptr, int64_t until_step = -1);

    int64_t step() const { return step_; }
    const TrainerBundle& bundle() const { return bundle_; }
    const model::Composer<float>& composer() const { return *composer_; }

    void save_state(const std::string& path) const;
    std::vector<StepRecord> history() const { return history_; }

  private:
    struct LaneResult;
    void train_step(const StepObserver& observer);

    TrainerBundle bundle_;
    const world::DatasetManifest& data_;
    std::string out_dir_;
    std::unique_ptr<model::Composer<float>> composer_;
    std::unique_ptr<codec::VideoCodec> vcodec_;
    std::unique_ptr<codec::TextCodec> tcodec_;
    std::unique_ptr<diffusion::Schedule> schedule_;
    std::vector<nn::Mat<float>> adam_m_, adam_v_;
    int64_t step_ = 0;
    std::vector<StepRecord> history_;
};

double lr_at(const TrainConfig& cfg, int64_t step);  // 1-indexed step

}  // namespace lc::train
