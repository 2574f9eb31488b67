#include "lc/core/npy.hpp"

#include <cstdio>
#include <cstring>

#include "lc/core/error.hpp"
#include "lc/core/video.hpp"

namespace lc::npy {
namespace {

struct File {
    FILE* f = nullptr;
    explicit File(FILE* f_) : f(f_) {}
    ~File() {
        if (f) std::fclose(f);
    }
    File(const File&) = delete;
    File& operator=(const File&) = delete;
};

std::string header_for(const char* descr, const std::vector<size_t>& shape) {
    std::string dict = "{'descr': '";
    dict += descr;
    dict += "', 'fortran_order': False, 'shape': (";
    for (size_t i = 0; i < shape.size(); ++i) {
        dict += std::to_string(shape[i]);
        if (shape.size() == 1 || i + 1 < shape.size()) dict += ",";
        if (i + 1 < shape.size()) dict += " ";
    }
    dict += "), }";
    // magic(6) + ver(2) + hlen(2) + dict + padding, total multiple of 64, '\n' terminated
    size_t base = 10 + dict.size() + 1;
    size_t pad = (64 - base % 64) % 64;
    dict.append(pad, ' ');
    dict += '\n';
    return dict;
}

void write_array(const std::string& path, const char* descr, const std::vector<size_t>& shape,
                 const void* data, size_t elem_size) {
    File fp(std::fopen(path.c_str(), "wb"));
    if (!fp.f) throw io_error("cannot open for write: " + path);
    std::string dict = header_for(descr, shape);
    unsigned char magic[10] = {0x93, 'N', 'U', 'M', 'P', 'Y', 1, 0, 0, 0};
    magic[8] = (unsigned char)(dict.size() & 0xff);
    magic[9] = (unsigned char)(dict.size() >> 8);
    size_t n = 1;
    for (size_t s : shape) n *= s;
    if (std::fwrite(magic, 1, 10, fp.f) != 10 ||
        std::fwrite(dict.data(), 1, dict.size(), fp.f) != dict.size() ||
        std::fwrite(data, elem_size, n, fp.f) != n)
        throw io_error("short write: " + path);
}

// Parses only what our own writer produces plus whitespace slack.
void read_header(FILE* f, const std::string& path, std::string& descr, std::vector<size_t>& shape) {
    unsigned char magic[10];
    if (std::fread(magic, 1, 10, f) != 10 || std::memcmp(magic, "\x93NUMPY", 6) != 0)
        throw io_error("not an NPY file: " + path);
    size_t hlen = magic[8] | (size_t(magic[9]) << 8);
    std::string dict(hlen, '\0');
    if (std::fread(dict.data(), 1, hlen, f) != hlen) throw io_error("truncated NPY header: " + path);

    auto find_field = [&](const char* key) -> size_t {
        size_t p = dict.find(key);
        if (p == std::string::npos) throw io_error("bad NPY header in " + path);
        return p;
    };
    size_t dp = find_field("'descr'");
    size_t q0 = dict.find('\'', dp + 7);
    size_t q1 = dict.find('\'', q0 + 1);
    descr = dict.substr(q0 + 1, q1 - q0 - 1);
    if (dict.find("'fortran_order': False") == std::string::npos)
        throw io_error("fortran-order NPY unsupported: " + path);
    size_t sp = find_field("'shape'");
    size_t p0 = dict.find('(', sp);
    size_t p1 = dict.find(')', p0);
    std::string dims = dict.substr(p0 + 1, p1 - p0 - 1);
    shape.clear();
    size_t pos = 0;
    while (pos < dims.size()) {
        while (pos < dims.size() && (dims[pos] == ' ' || dims[pos] == ',')) ++pos;
        if (pos >= dims.size()) break;
        size_t end = pos;
        while (end < dims.size() && dims[end] >= '0' && dims[end] <= '9') ++end;
        if (end == pos) throw io_error("bad NPY shape in " + path);
        shape.push_back(std::stoull(dims.substr(pos, end - pos)));
        pos = end;
    }
}

}  // namespace

void save_f32(const std::string& path, const std::vector<size_t>& shape, const float* data) {
    write_array(path, "<f4", shape, data, 4);
}

void save_u8(const std::string& path, const std::vector<size_t>& shape, const uint8_t* data) {
    write_array(path, "|u1", shape, data, 1);
}

ArrayF32 load_f32(const std::string& path) {
    File fp(std::fopen(path.c_str(), "rb"));
    if (!fp.f) throw io_error("cannot open: " + path);
    std::string descr;
    ArrayF32 out;
    read_header(fp.f, path, descr, out.shape);
    if (descr != "<f4") throw io_error("expected <f4 NPY, got '" + descr + "': " + path);
    size_t n = 1;
    for (size_t s : out.shape) n *= s;
    out.data.resize(n);
    if (std::fread(out.data.data(), 4, n, fp.f) != n) throw io_error("truncated NPY data: " + path);
    return out;
}

ArrayU8 load_u8(const std::string& path) {
    File fp(std::fopen(path.c_str(), "rb"));
    if (!fp.f) throw io_error("cannot open: " + path);
    std::string descr;
    ArrayU8 out;
    read_header(fp.f, path, descr, out.shape);
    if (descr != "|u1") throw io_error("expected |u1 NPY, got '" + descr + "': " + path);
    size_t n = 1;
    for (size_t s : out.shape) n *= s;
    out.data.resize(n);
    if (std::fread(out.data.data(), 1, n, fp.f) != n) throw io_error("truncated NPY data: " + path);
    return out;
}

}  // namespace lc::npy

namespace lc {

void save_clip_npy(const std::string& path, const VideoClip& clip) {
    std::vector<uint8_t> u8(clip.data.size());
    for (size_t i = 0; i < clip.data.size(); ++i)
        u8[i] = (uint8_t)(int)(clamp01(clip.data[i]) * 255.0f + 0.5f);
    npy::save_u8(path, {size_t(clip.t), size_t(clip.h), size_t(clip.w), 3}, u8.data());
}

VideoClip load_clip_npy(const std::string& path, float fps) {
    npy::ArrayU8 a = npy::load_u8(path);
    if (a.shape.size() != 4 || a.shape[3] != 3) throw io_error("clip NPY must be (T,H,W,3): " + path);
    VideoClip clip(int(a.shape[0]), int(a.shape[1]), int(a.shape[2]), fps);
    for (size_t i = 0; i < a.data.size(); ++i) clip.data[i] = float(a.data[i]) / 255.0f;
    return clip;
}

void save_mask_packed(const std::string& path, const MaskVideo& mask) {
    FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw io_error("cannot open for write: " + path);
    uint32_t head[5] = {0x4d42434cu /*"LCBM"*/, 1u, uint32_t(mask.t), uint32_t(mask.h), uint32_t(mask.w)};
    std::vector<uint8_t> packed((mask.data.size() + 7) / 8, 0);
    for (size_t i = 0; i < mask.data.size(); ++i)
        if (mask.data[i]) packed[i >> 3] |= uint8_t(1u << (i & 7));
    bool ok = std::fwrite(head, 4, 5, f) == 5 &&
              std::fwrite(packed.data(), 1, packed.size(), f) == packed.size();
    std::fclose(f);
    if (!ok) throw io_error("short write: " + path);
}

MaskVideo load_mask_packed(const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw io_error("cannot open: " + path);
    uint32_t head[5];
    if (std::fread(head, 4, 5, f) != 5 || head[0] != 0x4d42434cu || head[1] != 1u) {
        std::fclose(f);
        throw io_error("bad mask file: " + path);
    }
    MaskVideo mask{int(head[2]), int(head[3]), int(head[4])};
    std::vector<uint8_t> packed((mask.data.size() + 7) / 8);
    size_t got = std::fread(packed.data(), 1, packed.size(), f);
    std::fclose(f);
    if (got != packed.size()) throw io_error("truncated mask file: " + path);
    for (size_t i = 0; i < mask.data.size(); ++i)
        mask.data[i] = (packed[i >> 3] >> (i & 7)) & 1u;
    return mask;
}

}  // namespace lc
