#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lc::npy {

// Minimal NPY v1.0 reader/writer for little-endian '<f4' and '|u1' arrays.

void save_f32(const std::string& path, const std::vector<size_t>& shape, const float* data);
void save_u8(const std::string& path, const std::vector<size_t>& shape, const uint8_t* data);

struct ArrayF32 {
    std::vector<size_t> shape;
    std::vector<float> data;
};
struct ArrayU8 {
    std::vector<size_t> shape;
    std::vector<uint8_t> data;
};

ArrayF32 load_f32(const std::string& path);
ArrayU8 load_u8(const std::string& path);

}  // namespace lc::npy

namespace lc {

struct VideoClip;
struct MaskVideo;

// Clips are stored as u8 NPY (lossless: the generator quantizes to /255).
void save_clip_npy(const std::string& path, const VideoClip& clip);
VideoClip load_clip_npy(const std::string& path, float fps = 8.0f);

// Masks are stored bit-packed: magic "LCBM", version, dims, LSB-first bits.
void save_mask_packed(const std::string& path, const MaskVideo& mask);
MaskVideo load_mask_packed(const std::string& path);

}  // namespace lc
