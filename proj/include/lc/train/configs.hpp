#pragma once

#include <json.hpp>

#include "lc/augment/augment.hpp"
#include "lc/codec/codec.hpp"
#include "lc/diffusion/diffusion.hpp"
#include "lc/model/composer.hpp"

namespace lc::train {

struct TrainConfig {
    int batch = 16;
    int iterations = 5000;
    int warmup = 200;
    // Reference-scale settings use base_lr 5e-6 / 20k iterations / batch 64
    // with a pre-trained 5B backbone; a from-scratch 2M model wants a much
    // larger learning rate, so those values live here only as comments.
    double base_lr = 1e-4;
    double beta1 = 0.9, beta2 = 0.95, adam_eps = 1e-8;
    double weight_decay = 1e-4;
    double clip_norm = 1.0;
    double loss_alpha = 0.5;
    bool augmentation = true;  // ablation switch
    bool id_loss = true;       // ablation switch (off -> plain MSE)
    uint64_t seed = 0;
    int checkpoint_every = 1000;
    int log_every = 1;
    int lanes = 2;  // parallel sample pipelines; fixed by config for determinism
    augment::AugmentConfig aug;

    void validate() const {
        if (batch < 1) throw config_error("train config: batch must be >= 1");
        if (iterations < 1) throw config_error("train config: iterations must be >= 1");
        if (warmup >= iterations) throw config_error("train config: warmup must be < iterations");
        if (lanes < 1) throw config_error("train config: lanes must be >= 1");
    }
};

// ---- JSON converters ----------------------------------------------------

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
    j = nlohmann::json{{"batch", c.batch},
                       {"iterations", c.iterations},
                       {"warmup", c.warmup},
                       {"base_lr", c.base_lr},
                       {"beta1", c.beta1},
                       {"beta2", c.beta2},
                       {"adam_eps", c.adam_eps},
                       {"weight_decay", c.weight_decay},
                       {"clip_norm", c.clip_norm},
                       {"loss_alpha", c.loss_alpha},
                       {"augmentation", c.augmentation},
                       {"id_loss", c.id_loss},
                       {"seed", c.seed},
                       {"checkpoint_every", c.checkpoint_every},
                       {"log_every", c.log_every},
                       {"lanes", c.lanes},
                       {"aug",
                        {{"p_flip", c.aug.p_flip},
                         {"p_crop", c.aug.p_crop},
                         {"p_color", c.aug.p_color},
                         {"scale_lo", c.aug.scale_lo},
                         {"scale_hi", c.aug.scale_hi},
                         {"min_retain", c.aug.min_retain},
                         {"color_max", c.aug.color_max},
                         {"max_crop_attempts", c.aug.max_crop_attempts}}}};
}

inline void from_json(const nlohmann::json& j, TrainConfig& c) {
    c.batch = j.value("batch", c.batch);
    c.iterations = j.value("iterations", c.iterations);
    c.warmup = j.value("warmup", c.warmup);
    c.base_lr = j.value("base_lr", c.base_lr);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.adam_eps = j.value("adam_eps", c.adam_eps);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.clip_norm = j.value("clip_norm", c.clip_norm);
    c.loss_alpha = j.value("loss_alpha", c.loss_alpha);
    c.augmentation = j.value("augmentation", c.augmentation);
    c.id_loss = j.value("id_loss", c.id_loss);
    c.seed = j.value("seed", c.seed);
    c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
    c.log_every = j.value("log_every", c.log_every);
    c.lanes = j.value("lanes", c.lanes);
    if (j.contains("aug")) {
        const auto& a = j.at("aug");
        c.aug.p_flip = a.value("p_flip", c.aug.p_flip);
        c.aug.p_crop = a.value("p_crop", c.aug.p_crop);
        c.aug.p_color = a.value("p_color", c.aug.p_color);
        c.aug.scale_lo = a.value("scale_lo", c.aug.scale_lo);
        c.aug.scale_hi = a.value("scale_hi", c.aug.scale_hi);
        c.aug.min_retain = a.value("min_retain", c.aug.min_retain);
        c.aug.color_max = a.value("color_max", c.aug.color_max);
        c.aug.max_crop_attempts = a.value("max_crop_attempts", c.aug.max_crop_attempts);
    }
}

}  // namespace lc::train

namespace lc::model {
inline void to_json(nlohmann::json& j, const ModelConfig& c) {
    j = nlohmann::json{{"latent_channels", c.latent_channels},
                       {"fusion_channels", c.fusion_channels},
                       {"depth", c.depth},
                       {"width", c.width},
                       {"heads", c.heads},
                       {"text_dim", c.text_dim},
                       {"l_max", c.l_max},
                       {"time_embed_dim", c.time_embed_dim},
                       {"t_diff", c.t_diff},
                       {"max_tokens", c.max_tokens}};
}
inline void from_json(const nlohmann::json& j, ModelConfig& c) {
    c.latent_channels = j.value("latent_channels", c.latent_channels);
    c.fusion_channels = j.value("fusion_channels", c.fusion_channels);
    c.depth = j.value("depth", c.depth);
    c.width = j.value("width", c.width);
    c.heads = j.value("heads", c.heads);
    c.text_dim = j.value("text_dim", c.text_dim);
    c.l_max = j.value("l_max", c.l_max);
    c.time_embed_dim = j.value("time_embed_dim", c.time_embed_dim);
    c.t_diff = j.value("t_diff", c.t_diff);
    c.max_tokens = j.value("max_tokens", c.max_tokens);
}
}  // namespace lc::model

namespace lc::codec {
inline void to_json(nlohmann::json& j, const CodecConfig& c) {
    j = nlohmann::json{{"f_t", c.f_t},         {"f_h", c.f_h},
                       {"f_w", c.f_w},         {"basis_seed", c.basis_seed},
                       {"text_dim", c.text_dim}, {"l_max", c.l_max},
                       {"text_seed", c.text_seed}, {"vocab", c.vocab}};
}
inline void from_json(const nlohmann::json& j, CodecConfig& c) {
    c.f_t = j.value("f_t", c.f_t);
    c.f_h = j.value("f_h", c.f_h);
    c.f_w = j.value("f_w", c.f_w);
    c.basis_seed = j.value("basis_seed", c.basis_seed);
    c.text_dim = j.value("text_dim", c.text_dim);
    c.l_max = j.value("l_max", c.l_max);
    c.text_seed = j.value("text_seed", c.text_seed);
    if (j.contains("vocab")) c.vocab = j.at("vocab").get<std::vector<std::string>>();
}
}  // namespace lc::codec

namespace lc::diffusion {
inline void to_json(nlohmann::json& j, const ScheduleConfig& c) {
    j = nlohmann::json{{"t_diff", c.t_diff}, {"cosine_s", c.cosine_s}};
}
inline void from_json(const nlohmann::json& j, ScheduleConfig& c) {
    c.t_diff = j.value("t_diff", c.t_diff);
    c.cosine_s = j.value("cosine_s", c.cosine_s);
}
}  // namespace lc::diffusion
