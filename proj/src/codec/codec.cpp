#include "lc/codec/codec.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "lc/core/error.hpp"
#include "lc/core/rng.hpp"

namespace lc::codec {

namespace {
using MatD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Seeded random rotation: Gaussian matrix orthonormalized by modified
// Gram-Schmidt (two passes for numerical hygiene). Plain sequential loops:
// reduction order must not depend on heap alignment, or two codec
// instances in one process would disagree in the last bit.
std::vector<double> make_orthonormal_basis(int n, uint64_t seed) {
    Rng rng(Rng::mix({seed, 0x0b515ull}));
    std::vector<double> q(size_t(n) * n);
    for (auto& v : q) v = rng.normal();
    auto row = [&](int i) { return q.data() + size_t(i) * n; };
    for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i < n; ++i) {
            double* ri = row(i);
            for (int j = 0; j < i; ++j) {
                const double* rj = row(j);
                double d = 0;
                for (int k = 0; k < n; ++k) d += ri[k] * rj[k];
                for (int k = 0; k < n; ++k) ri[k] -= d * rj[k];
            }
            double nrm_sq = 0;
            for (int k = 0; k < n; ++k) nrm_sq += ri[k] * ri[k];
            double nrm = std::sqrt(nrm_sq);
            if (nrm < 1e-12) throw contract_error("degenerate basis draw");
            for (int k = 0; k < n; ++k) ri[k] /= nrm;
        }
    }
    return q;
}
}  // namespace

std::vector<std::string> default_vocabulary() {
    return {"<unk>",       "a",          "moving",   "over",   "scene",  "red",
            "yellow",      "magenta",    "white",    "circle", "square", "triangle",
            "linear-left", "linear-right", "sinusoidal", "bounce", "static", "water",
            "ground",      "sky"};
}

VideoCodec::VideoCodec(CodecConfig cfg) : cfg_(std::move(cfg)) {
    require(cfg_.f_t >= 1 && cfg_.f_h >= 1 && cfg_.f_w >= 1, "codec: factors must be >= 1");
    basis_ = make_orthonormal_basis(cfg_.patch_dim(), cfg_.basis_seed);
}

Latent VideoCodec::encode(const VideoClip& clip) const {
    const int ft = cfg_.f_t, fh = cfg_.f_h, fw = cfg_.f_w;
    if (clip.t % ft || clip.h % fh || clip.w % fw) {
        std::ostringstream os;
        os << "encode: clip shape (" << clip.t << "," << clip.h << "," << clip.w
           << ") not divisible by factors (" << ft << "," << fh << "," << fw << ")";
        throw contract_error(os.str());
    }
    const int lt = clip.t / ft, lh = clip.h / fh, lw = clip.w / fw;
    const int pd = cfg_.patch_dim();
    Latent z(lt, lh, lw, pd, {ft, fh, fw});

    MatD patches(z.cells(), pd);
    size_t cell = 0;
    for (int i = 0; i < lt; ++i)
        for (int j = 0; j < lh; ++j)
            for (int k = 0; k < lw; ++k, ++cell) {
                double* row = patches.data() + cell * pd;
                int p = 0;
                for (int dt = 0; dt < ft; ++dt)
                    for (int dy = 0; dy < fh; ++dy)
                        for (int dx = 0; dx < fw; ++dx)
                            for (int c = 0; c < 3; ++c)
                                row[p++] = clip.at(i * ft + dt, j * fh + dy, k * fw + dx, c);
            }

    Eigen::Map<const MatD> q(basis_.data(), pd, pd);
    MatD out = patches * q.transpose();  // z = Q x per patch row
    for (size_t i = 0; i < z.numel(); ++i) z.data[i] = float(out.data()[i]);
    return z;
}

VideoClip VideoCodec::decode(const Latent& z, float fps) const {
    const int ft = z.factors[0], fh = z.factors[1], fw = z.factors[2];
    const int pd = cfg_.patch_dim();
    if (z.c != pd || ft != cfg_.f_t || fh != cfg_.f_h || fw != cfg_.f_w)
        throw contract_error("decode: latent channels/factors inconsistent with codec");
    VideoClip clip(z.t * ft, z.h * fh, z.w * fw, fps);

    MatD zm(z.cells(), pd);
    for (size_t i = 0; i < z.numel(); ++i) zm.data()[i] = double(z.data[i]);
    Eigen::Map<const MatD> q(basis_.data(), pd, pd);
    MatD patches = zm * q;  // x = Q^T z per patch row

    size_t cell = 0;
    for (int i = 0; i < z.t; ++i)
        for (int j = 0; j < z.h; ++j)
            for (int k = 0; k < z.w; ++k, ++cell) {
                const double* row = patches.data() + cell * pd;
                int p = 0;
                for (int dt = 0; dt < ft; ++dt)
                    for (int dy = 0; dy < fh; ++dy)
                        for (int dx = 0; dx < fw; ++dx)
                            for (int c = 0; c < 3; ++c)
                                clip.at(i * ft + dt, j * fh + dy, k * fw + dx, c) =
                                    clamp01(float(row[p++]));
            }
    return clip;
}

FracMask VideoCodec::downsample_mask(const MaskVideo& mask) const {
    const int ft = cfg_.f_t, fh = cfg_.f_h, fw = cfg_.f_w;
    if (mask.t % ft || mask.h % fh || mask.w % fw)
        throw contract_error("downsample_mask: shape not divisible by factors");
    FracMask out(mask.t / ft, mask.h / fh, mask.w / fw);
    const float denom = float(ft) * fh * fw;
    size_t cell = 0;
    for (int i = 0; i < out.t; ++i)
        for (int j = 0; j < out.h; ++j)
            for (int k = 0; k < out.w; ++k, ++cell) {
                int cnt = 0;
                for (int dt = 0; dt < ft; ++dt)
                    for (int dy = 0; dy < fh; ++dy)
                        for (int dx = 0; dx < fw; ++dx)
                            cnt += mask.at(i * ft + dt, j * fh + dy, k * fw + dx);
                out.data[cell] = float(cnt) / denom;
            }
    return out;
}

TextCodec::TextCodec(const CodecConfig& cfg) {
    vocab_ = cfg.vocab.empty() ? default_vocabulary() : cfg.vocab;
    dim_ = cfg.text_dim;
    l_max_ = cfg.l_max;
    require(dim_ >= 2 && l_max_ >= 1, "text codec: bad dims");
    Rng rng(Rng::mix({cfg.text_seed, 0x7e8ull}));
    table_.resize(vocab_.size() * dim_);
    const float scale = 1.0f / std::sqrt(float(dim_));
    for (auto& v : table_) v = float(rng.normal()) * scale;
}

std::vector<int> TextCodec::tokenize(const std::string& caption) const {
    std::vector<int> ids;
    std::istringstream ss(caption);
    std::string word;
    while (ss >> word) {
        int id = 0;  // <unk>
        for (size_t i = 0; i < vocab_.size(); ++i)
            if (vocab_[i] == word) {
                id = int(i);
                break;
            }
        ids.push_back(id);
        if (int(ids.size()) >= l_max_) break;
    }
    return ids;
}

TextEmbedding TextCodec::encode(const std::string& caption) const {
    TextEmbedding out;
    out.ids = tokenize(caption);
    out.length = int(out.ids.size());
    out.dim = dim_;
    out.table.resize(size_t(out.length) * dim_);
    out.encoded.resize(size_t(out.length) * dim_);
    for (int i = 0; i < out.length; ++i) {
        const float* src = &table_[size_t(out.ids[i]) * dim_];
        float* dst = &out.table[size_t(i) * dim_];
        std::copy_n(src, dim_, dst);
        float* enc = &out.encoded[size_t(i) * dim_];
        for (int d = 0; d < dim_; ++d) {
            double freq = std::pow(10000.0, -double(2 * (d / 2)) / dim_);
            double angle = double(i) * freq;
            enc[d] = dst[d] + float((d % 2 == 0) ? std::sin(angle) : std::cos(angle));
        }
    }
    return out;
}

}  // namespace lc::codec
