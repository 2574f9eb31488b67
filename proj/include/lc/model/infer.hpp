#pragma once

#include <memory>
#include <string>

#include "lc/diffusion/diffusion.hpp"
#include "lc/model/composer.hpp"

namespace lc::model {

// Inference-time composition: the ground-truth latent slot starts as pure
// noise, the conditioning foreground is NOT augmented, and the final clean
// prediction is decoded back to pixels.
inline VideoClip compose_video(const Composer<float>& composer, const codec::VideoCodec& vcodec,
                               const codec::TextCodec& tcodec, const diffusion::Schedule& sched,
                               const VideoClip& fg, const VideoClip& bg, const std::string& prompt,
                               int steps, uint64_t seed) {
    require(fg.same_shape(bg), "compose_video: fg/bg shape mismatch");
    codec::Latent z_fg = vcodec.encode(fg);
    codec::Latent z_bg = vcodec.encode(bg);
    codec::TextEmbedding text = tcodec.encode(prompt);
    diffusion::Denoiser denoise = [&](const codec::Latent& x, int t) {
        return composer.predict(x, z_fg, z_bg, text, t);
    };
    codec::Latent z0 = diffusion::sample_latent(denoise, z_bg, sched, steps, seed);
    return vcodec.decode(z0, bg.fps);
}

// Inference bundle loaded from a checkpoint (model weights + configs).
struct InferenceEngine {
    ModelConfig model_cfg;
    codec::CodecConfig codec_cfg;
    diffusion::ScheduleConfig sched_cfg;
    std::unique_ptr<Composer<float>> composer;
    std::unique_ptr<codec::VideoCodec> vcodec;
    std::unique_ptr<codec::TextCodec> tcodec;
    std::unique_ptr<diffusion::Schedule> schedule;

    VideoClip compose(const VideoClip& fg, const VideoClip& bg, const std::string& prompt,
                      int steps, uint64_t seed) const {
        return compose_video(*composer, *vcodec, *tcodec, *schedule, fg, bg, prompt, steps, seed);
    }
};

InferenceEngine load_engine(const std::string& checkpoint_path);

}  // namespace lc::model
