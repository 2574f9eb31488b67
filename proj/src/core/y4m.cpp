#include "lc/core/y4m.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>

#include "lc/core/error.hpp"

namespace lc {

namespace {
uint8_t q8(float v) {
    int q = (int)std::lround(double(v) * 255.0);
    return (uint8_t)std::min(255, std::max(0, q));
}
}  // namespace

void save_y4m(const std::string& path, const VideoClip& clip) {
    FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw io_error("cannot open for write: " + path);
    int fps_num = (int)std::lround(double(clip.fps) * 1000.0);
    char header[128];
    std::snprintf(header, sizeof(header), "YUV4MPEG2 W%d H%d F%d:1000 Ip A1:1 C444\n", clip.w,
                  clip.h, fps_num);
    std::fputs(header, f);
    const size_t plane = size_t(clip.h) * clip.w;
    std::vector<uint8_t> yuv(plane * 3);
    for (int t = 0; t < clip.t; ++t) {
        std::fputs("FRAME\n", f);
        for (int y = 0; y < clip.h; ++y)
            for (int x = 0; x < clip.w; ++x) {
                float r = clip.at(t, y, x, 0), g = clip.at(t, y, x, 1), b = clip.at(t, y, x, 2);
                float yy = 0.299f * r + 0.587f * g + 0.114f * b;
                float u = -0.168736f * r - 0.331264f * g + 0.5f * b + 0.5f;
                float v = 0.5f * r - 0.418688f * g - 0.081312f * b + 0.5f;
                size_t i = size_t(y) * clip.w + x;
                yuv[i] = q8(yy);
                yuv[plane + i] = q8(u);
                yuv[2 * plane + i] = q8(v);
            }
        if (std::fwrite(yuv.data(), 1, yuv.size(), f) != yuv.size()) {
            std::fclose(f);
            throw io_error("short write: " + path);
        }
    }
    std::fclose(f);
}

VideoClip load_y4m(const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw io_error("cannot open: " + path);
    char header[256];
    if (!std::fgets(header, sizeof(header), f)) {
        std::fclose(f);
        throw io_error("empty y4m: " + path);
    }
    int w = 0, h = 0, fn = 0, fd = 1;
    {
        char* tok = std::strtok(header, " \n");
        if (!tok || std::strcmp(tok, "YUV4MPEG2") != 0) {
            std::fclose(f);
            throw io_error("not a y4m file: " + path);
        }
        while ((tok = std::strtok(nullptr, " \n"))) {
            if (tok[0] == 'W') w = std::atoi(tok + 1);
            if (tok[0] == 'H') h = std::atoi(tok + 1);
            if (tok[0] == 'F') std::sscanf(tok + 1, "%d:%d", &fn, &fd);
            if (tok[0] == 'C' && std::strcmp(tok, "C444") != 0) {
                std::fclose(f);
                throw io_error("only C444 y4m supported: " + path);
            }
        }
    }
    if (w <= 0 || h <= 0) {
        std::fclose(f);
        throw io_error("bad y4m geometry: " + path);
    }
    const size_t plane = size_t(h) * w;
    std::vector<uint8_t> yuv(plane * 3);
    std::vector<float> frames;
    char line[64];
    int t = 0;
    while (std::fgets(line, sizeof(line), f)) {
        if (std::strncmp(line, "FRAME", 5) != 0) break;
        if (std::fread(yuv.data(), 1, yuv.size(), f) != yuv.size()) {
            std::fclose(f);
            throw io_error("truncated y4m frame: " + path);
        }
        frames.resize(size_t(t + 1) * plane * 3);
        float* out = &frames[size_t(t) * plane * 3];
        for (size_t i = 0; i < plane; ++i) {
            float yy = yuv[i] / 255.0f;
            float u = yuv[plane + i] / 255.0f - 0.5f;
            float v = yuv[2 * plane + i] / 255.0f - 0.5f;
            out[i * 3 + 0] = clamp01(yy + 1.402f * v);
            out[i * 3 + 1] = clamp01(yy - 0.344136f * u - 0.714136f * v);
            out[i * 3 + 2] = clamp01(yy + 1.772f * u);
        }
        ++t;
    }
    std::fclose(f);
    VideoClip clip(t, h, w, fd > 0 ? float(fn) / float(fd) : 8.0f);
    clip.data = std::move(frames);
    return clip;
}

}  // namespace lc
