#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "lc/nn/tape.hpp"

namespace lc::model {

// Versioned binary container: JSON header + named float sections + FNV
// checksum. Writes go to a temp file renamed into place; loads validate
// everything before returning, so a corrupt file never mutates state.
struct CheckpointData {
    nlohmann::json header;
    std::vector<std::pair<std::string, std::vector<float>>> sections;

    const std::vector<float>* find(const std::string& name) const {
        for (const auto& [n, v] : sections)
            if (n == name) return &v;
        return nullptr;
    }
};

inline constexpr uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const CheckpointData& data);
CheckpointData load_checkpoint(const std::string& path);

// ParamSet <-> sections, under a name prefix such as "model/".
void params_to_sections(const nn::ParamSet<float>& params, const std::string& prefix,
                        CheckpointData& out);
void sections_to_params(const CheckpointData& data, const std::string& prefix,
                        nn::ParamSet<float>& params);

}  // namespace lc::model
