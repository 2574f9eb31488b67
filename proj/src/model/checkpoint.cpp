#include "lc/model/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>

#include "lc/core/error.hpp"
#include "lc/core/hash.hpp"

namespace lc::model {

namespace {
constexpr uint32_t kMagic = 0x504b434cu;  // "LCKP"

void put_u32(std::string& buf, uint32_t v) { buf.append(reinterpret_cast<const char*>(&v), 4); }
void put_u64(std::string& buf, uint64_t v) { buf.append(reinterpret_cast<const char*>(&v), 8); }

uint32_t get_u32(const std::string& buf, size_t& off) {
    if (off + 4 > buf.size()) throw io_error("checkpoint: truncated");
    uint32_t v;
    std::memcpy(&v, buf.data() + off, 4);
    off += 4;
    return v;
}
uint64_t get_u64(const std::string& buf, size_t& off) {
    if (off + 8 > buf.size()) throw io_error("checkpoint: truncated");
    uint64_t v;
    std::memcpy(&v, buf.data() + off, 8);
    off += 8;
    return v;
}
}  // namespace

void save_checkpoint(const std::string& path, const CheckpointData& data) {
    std::string payload;
    std::string header = data.header.dump();
    put_u64(payload, header.size());
    payload += header;
    put_u32(payload, uint32_t(data.sections.size()));
    for (const auto& [name, vals] : data.sections) {
        put_u32(payload, uint32_t(name.size()));
        payload += name;
        put_u64(payload, vals.size());
        payload.append(reinterpret_cast<const char*>(vals.data()), vals.size() * 4);
    }

    std::string blob;
    put_u32(blob, kMagic);
    put_u32(blob, kCheckpointVersion);
    put_u64(blob, fnv1a64(payload.data(), payload.size()));
    blob += payload;

    std::string tmp = path + ".tmp";
    {
        FILE* f = std::fopen(tmp.c_str(), "wb");
        if (!f) throw io_error("checkpoint: cannot open for write: " + tmp);
        bool ok = std::fwrite(blob.data(), 1, blob.size(), f) == blob.size();
        ok = (std::fclose(f) == 0) && ok;
        if (!ok) throw io_error("checkpoint: short write: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw io_error("checkpoint: rename failed: " + path);
}

CheckpointData load_checkpoint(const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw io_error("checkpoint: cannot open: " + path);
    std::string blob;
    {
        std::fseek(f, 0, SEEK_END);
        long n = std::ftell(f);
        std::fseek(f, 0, SEEK_SET);
        blob.resize(size_t(std::max(0L, n)));
        size_t got = std::fread(blob.data(), 1, blob.size(), f);
        std::fclose(f);
        if (got != blob.size()) throw io_error("checkpoint: read failed: " + path);
    }
    size_t off = 0;
    if (get_u32(blob, off) != kMagic) throw io_error("checkpoint: bad magic: " + path);
    uint32_t ver = get_u32(blob, off);
    if (ver != kCheckpointVersion)
        throw io_error("checkpoint: version mismatch (file v" + std::to_string(ver) + ", expected v" +
                       std::to_string(kCheckpointVersion) + "): " + path);
    uint64_t want = get_u64(blob, off);
    uint64_t have = fnv1a64(blob.data() + off, blob.size() - off);
    if (want != have) throw io_error("checkpoint: checksum mismatch (corrupt file): " + path);

    CheckpointData out;
    uint64_t hlen = get_u64(blob, off);
    if (off + hlen > blob.size()) throw io_error("checkpoint: truncated header: " + path);
    try {
        out.header = nlohmann::json::parse(blob.substr(off, hlen));
    } catch (const std::exception& e) {
        throw io_error(std::string("checkpoint: bad header JSON: ") + e.what());
    }
    off += hlen;
    uint32_t nsec = get_u32(blob, off);
    for (uint32_t i = 0; i < nsec; ++i) {
        uint32_t nlen = get_u32(blob, off);
        if (off + nlen > blob.size()) throw io_error("checkpoint: truncated: " + path);
        std::string name = blob.substr(off, nlen);
        off += nlen;
        uint64_t count = get_u64(blob, off);
        if (off + count * 4 > blob.size()) throw io_error("checkpoint: truncated: " + path);
        std::vector<float> vals(count);
        std::memcpy(vals.data(), blob.data() + off, count * 4);
        off += count * 4;
        out.sections.emplace_back(std::move(name), std::move(vals));
    }
    return out;
}

void params_to_sections(const nn::ParamSet<float>& params, const std::string& prefix,
                        CheckpointData& out) {
    for (const auto& p : params.items) out.sections.emplace_back(prefix + p.name, p.w.v);
}

void sections_to_params(const CheckpointData& data, const std::string& prefix,
                        nn::ParamSet<float>& params) {
    for (auto& p : params.items) {
        const auto* v = data.find(prefix + p.name);
        if (!v) throw io_error("checkpoint: missing section " + prefix + p.name);
        if (v->size() != p.w.numel())
            throw io_error("checkpoint: size mismatch for " + prefix + p.name);
        p.w.v = *v;
    }
}

}  // namespace lc::model
