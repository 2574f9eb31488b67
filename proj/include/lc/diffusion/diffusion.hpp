#pragma once

#include <functional>
#include <vector>

#include "lc/codec/codec.hpp"
#include "lc/core/rng.hpp"
#include "lc/nn/tape.hpp"

namespace lc::diffusion {

struct ScheduleConfig {
    int t_diff = 1000;
    double cosine_s = 0.008;
    // Loss weight w_t is a constant 1 by construction here; the prediction
    // target is the clean latent ("clean-target" parameterization).
    static constexpr const char* parameterization = "clean-target";
};

// Cumulative signal coefficients alpha_bar_t, strictly decreasing.
class Schedule {
  public:
    explicit Schedule(ScheduleConfig cfg);

    int steps() const { return cfg_.t_diff; }
    const ScheduleConfig& config() const { return cfg_; }
    double alpha_bar(int t) const;
    double snr(int t) const;

    // Descending timestep grid for a strided sub-schedule of n steps.
    std::vector<int> strided_timesteps(int n) const;

  private:
    ScheduleConfig cfg_;
    std::vector<double> abar_;
};

// sqrt(abar_t) * z0 + sqrt(1 - abar_t) * eps
codec::Latent add_noise(const codec::Latent& z0, int t, const codec::Latent& eps,
                        const Schedule& sched);

codec::Latent gaussian_like(const codec::Latent& shape_like, Rng& rng);

struct LossWeights {
    double alpha = 0.5;  // foreground weight
    // zero-area policy: drop-term (the surviving term keeps full weight)
};

struct LossBreakdown {
    double total = 0, fg = 0, bg = 0;
    bool fg_dropped = false, bg_dropped = false;
};

// Area-normalized masked reconstruction loss:
//   L_fg = sum((z0-pred)^2 .* m) / sum(m),  L_bg analogous with (1-m),
//   total = alpha*L_fg + (1-alpha)*L_bg, with the mask broadcast over
// channels. A zero-area side is dropped and the other side returned at
// full weight.
LossBreakdown identity_loss(const codec::Latent& pred, const codec::Latent& z0,
                            const codec::FracMask& mask, const LossWeights& w);

// Plain mean-squared reconstruction loss over all latent elements.
double plain_mse(const codec::Latent& pred, const codec::Latent& z0);

// Tape-side builders used by training (pred is a live tape node).
template <typename T>
typename nn::Tape<T>::Id identity_loss_node(nn::Tape<T>& tape, typename nn::Tape<T>::Id pred,
                                            const nn::Mat<T>& target, const codec::FracMask& mask,
                                            const LossWeights& w) {
    const nn::Mat<T>& pv = tape.val(pred);
    require(size_t(pv.rows) == mask.cells(), "identity_loss_node: mask grid mismatch");
    nn::Mat<T> mfg(pv.rows, pv.cols), mbg(pv.rows, pv.cols);
    long double sum_fg = 0, sum_bg = 0;
    for (int r = 0; r < pv.rows; ++r) {
        T m = T(mask.data[r]);
        for (int c = 0; c < pv.cols; ++c) {
            mfg(r, c) = m;
            mbg(r, c) = T(1) - m;
        }
        sum_fg += (long double)m * pv.cols;
        sum_bg += (long double)(T(1) - m) * pv.cols;
    }
    auto sq = tape.square(tape.sub_const(pred, target));
    std::vector<std::pair<T, typename nn::Tape<T>::Id>> terms;
    if (sum_fg > 0 && sum_bg > 0) {
        terms.push_back({T(w.alpha / double(sum_fg)), tape.sum_all(tape.mul_const(sq, mfg))});
        terms.push_back({T((1.0 - w.alpha) / double(sum_bg)), tape.sum_all(tape.mul_const(sq, mbg))});
    } else if (sum_fg > 0) {
        terms.push_back({T(1.0 / double(sum_fg)), tape.sum_all(tape.mul_const(sq, mfg))});
    } else {
        require(sum_bg > 0, "identity_loss_node: empty mask grid");
        terms.push_back({T(1.0 / double(sum_bg)), tape.sum_all(tape.mul_const(sq, mbg))});
    }
    return tape.scalar_combo(terms);
}

template <typename T>
typename nn::Tape<T>::Id plain_mse_node(nn::Tape<T>& tape, typename nn::Tape<T>::Id pred,
                                        const nn::Mat<T>& target) {
    auto sq = tape.square(tape.sub_const(pred, target));
    return tape.scalar_combo({{T(1.0 / double(tape.val(pred).numel())), tape.sum_all(sq)}});
}

// Denoiser abstraction for the sampler: predicts z0 from (x_t, t).
using Denoiser = std::function<codec::Latent(const codec::Latent& x_t, int t)>;

// Deterministic (eta = 0) ancestral sampling over a strided sub-schedule,
// starting from pure noise in place of the ground-truth latent.
codec::Latent sample_latent(const Denoiser& denoise, const codec::Latent& shape_like,
                            const Schedule& sched, int steps, uint64_t seed);

}  // namespace lc::diffusion
