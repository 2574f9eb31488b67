#include "lc/model/infer.hpp"

#include "lc/model/checkpoint.hpp"
#include "lc/train/configs.hpp"

namespace lc::model {

InferenceEngine load_engine(const std::string& checkpoint_path) {
    CheckpointData ck = load_checkpoint(checkpoint_path);
    InferenceEngine e;
    e.model_cfg = ck.header.at("model").get<ModelConfig>();
    e.codec_cfg = ck.header.at("codec").get<codec::CodecConfig>();
    e.sched_cfg = ck.header.at("schedule").get<diffusion::ScheduleConfig>();
    e.composer = std::make_unique<Composer<float>>(e.model_cfg);
    sections_to_params(ck, "model/", e.composer->params);
    e.vcodec = std::make_unique<codec::VideoCodec>(e.codec_cfg);
    e.tcodec = std::make_unique<codec::TextCodec>(e.codec_cfg);
    e.schedule = std::make_unique<diffusion::Schedule>(e.sched_cfg);
    return e;
}

}  // namespace lc::model
