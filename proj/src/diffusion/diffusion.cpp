#include "lc/diffusion/diffusion.hpp"

#include <cmath>

#include "lc/core/error.hpp"

namespace lc::diffusion {

Schedule::Schedule(ScheduleConfig cfg) : cfg_(cfg) {
    require(cfg_.t_diff >= 2, "schedule: t_diff must be >= 2");
    abar_.resize(cfg_.t_diff);
    const double s = cfg_.cosine_s;
    auto f = [&](double u) {
        double a = std::cos((u + s) / (1.0 + s) * 1.5707963267948966);
        return a * a;
    };
    const double f0 = f(0.0);
    for (int t = 0; t < cfg_.t_diff; ++t) {
        double v = f(double(t) / double(cfg_.t_diff)) / f0;
        abar_[t] = std::min(1.0, std::max(1e-8, v));
    }
    // contract: starts clean, ends near-noise, strictly decreasing
    require(abar_.front() >= 1.0 - 1e-4, "schedule: alpha_bar[0] too small");
    require(abar_.back() <= 1e-3, "schedule: alpha_bar[last] too large");
    for (int t = 1; t < cfg_.t_diff; ++t)
        require(abar_[t] < abar_[t - 1], "schedule: alpha_bar must strictly decrease");
}

double Schedule::alpha_bar(int t) const {
    require(t >= 0 && t < cfg_.t_diff, "schedule: timestep out of range");
    return abar_[t];
}

double Schedule::snr(int t) const {
    double a = alpha_bar(t);
    return a / (1.0 - a);
}

std::vector<int> Schedule::strided_timesteps(int n) const {
    require(n >= 1 && n <= cfg_.t_diff, "schedule: bad sub-schedule length");
    std::vector<int> ts(n);
    if (n == 1) {
        ts[0] = cfg_.t_diff - 1;
        return ts;
    }
    for (int k = 0; k < n; ++k) {
        double u = double(n - 1 - k) / double(n - 1);  // descending
        ts[k] = int(std::lround(u * (cfg_.t_diff - 1)));
    }
    for (int k = 1; k < n; ++k)
        require(ts[k] < ts[k - 1], "schedule: degenerate sub-schedule");
    return ts;
}

codec::Latent add_noise(const codec::Latent& z0, int t, const codec::Latent& eps,
                        const Schedule& sched) {
    require(z0.same_shape(eps), "add_noise: eps shape mismatch");
    double ab = sched.alpha_bar(t);
    float sa = float(std::sqrt(ab)), sb = float(std::sqrt(1.0 - ab));
    codec::Latent out = z0;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = sa * z0.data[i] + sb * eps.data[i];
    return out;
}

codec::Latent gaussian_like(const codec::Latent& shape_like, Rng& rng) {
    codec::Latent out(shape_like.t, shape_like.h, shape_like.w, shape_like.c, shape_like.factors);
    for (auto& v : out.data) v = float(rng.normal());
    return out;
}

LossBreakdown identity_loss(const codec::Latent& pred, const codec::Latent& z0,
                            const codec::FracMask& mask, const LossWeights& w) {
    require(pred.same_shape(z0), "identity_loss: shape mismatch");
    require(mask.t == pred.t && mask.h == pred.h && mask.w == pred.w,
            "identity_loss: mask grid mismatch");
    require(w.alpha >= 0.0 && w.alpha <= 1.0, "identity_loss: alpha must be in [0,1]");

    long double num_fg = 0, num_bg = 0, den_fg = 0, den_bg = 0;
    const size_t cells = mask.cells();
    for (size_t i = 0; i < cells; ++i) {
        float m = mask.data[i];
        require(m >= 0.0f && m <= 1.0f, "identity_loss: mask values must be in [0,1]");
        const float* p = pred.cell(i);
        const float* z = z0.cell(i);
        long double se = 0;
        for (int c = 0; c < pred.c; ++c) {
            double d = double(z[c]) - double(p[c]);
            if (!std::isfinite(d)) throw contract_error("identity_loss: non-finite input");
            se += d * d;
        }
        num_fg += (long double)m * se;
        num_bg += (long double)(1.0f - m) * se;
        den_fg += (long double)m * pred.c;
        den_bg += (long double)(1.0f - m) * pred.c;
    }

    LossBreakdown out;
    if (den_fg > 0) out.fg = double(num_fg / den_fg);
    if (den_bg > 0) out.bg = double(num_bg / den_bg);
    if (den_fg > 0 && den_bg > 0) {
        out.total = w.alpha * out.fg + (1.0 - w.alpha) * out.bg;
    } else if (den_fg > 0) {
        out.bg_dropped = true;
        out.total = out.fg;
    } else if (den_bg > 0) {
        out.fg_dropped = true;
        out.total = out.bg;
    } else {
        throw contract_error("identity_loss: degenerate mask grid");
    }
    return out;
}

double plain_mse(const codec::Latent& pred, const codec::Latent& z0) {
    require(pred.same_shape(z0), "plain_mse: shape mismatch");
    long double acc = 0;
    for (size_t i = 0; i < pred.data.size(); ++i) {
        double d = double(z0.data[i]) - double(pred.data[i]);
        acc += d * d;
    }
    return double(acc / (long double)pred.data.size());
}

codec::Latent sample_latent(const Denoiser& denoise, const codec::Latent& shape_like,
                            const Schedule& sched, int steps, uint64_t seed) {
    require(steps >= 1, "sample: steps must be >= 1");
    require(steps <= sched.steps(), "sample: steps must be <= t_diff");
    std::vector<int> ts = sched.strided_timesteps(steps);
    Rng rng(Rng::mix({seed, 0x5a3eull}));
    codec::Latent x = gaussian_like(shape_like, rng);
    codec::Latent z0_hat;
    for (int k = 0; k < steps; ++k) {
        int t = ts[k];
        z0_hat = denoise(x, t);
        if (k + 1 == steps) break;
        int t_next = ts[k + 1];
        double ab = sched.alpha_bar(t), abn = sched.alpha_bar(t_next);
        float sa = float(std::sqrt(ab)), sb = float(std::sqrt(1.0 - ab));
        float san = float(std::sqrt(abn)), sbn = float(std::sqrt(1.0 - abn));
        for (size_t i = 0; i < x.data.size(); ++i) {
            float eps_hat = (x.data[i] - sa * z0_hat.data[i]) / sb;
            x.data[i] = san * z0_hat.data[i] + sbn * eps_hat;
        }
    }
    return z0_hat;
}

}  // namespace lc::diffusion
