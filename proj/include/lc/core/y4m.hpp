#pragma once

#include <string>

#include "lc/core/video.hpp"

namespace lc {

// Uncompressed YUV4MPEG2 (C444) writer/reader; the one-file video format
// the compose command emits. Conversion is BT.601 full range.
void save_y4m(const std::string& path, const VideoClip& clip);
VideoClip load_y4m(const std::string& path);

}  // namespace lc
