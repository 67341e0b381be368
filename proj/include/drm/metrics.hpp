#pragma once

#include <utility>
#include <vector>

#include "drm/image.hpp"

namespace drm {

inline constexpr double kPsnrCap = 100.0;
inline constexpr double kCharbonnierXi = 1e-3;

/// 10 log10(1 / MSE) over all channels, capped at 100 dB.
double psnr(const Image& x, const Image& y);

/// Mean SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
/// dynamic range 1, valid windows only, averaged over channels.
/// Requires min(H, W) >= 11.
double ssim(const Image& x, const Image& y);

/// (1 - ssim) + mean sqrt((yhat - y)^2 + xi^2).
double l_sup(const Image& yhat, const Image& y, double xi = kCharbonnierXi);

enum class WeightSchedule { Log, Linear, Exp };

struct LossWeights {
    WeightSchedule schedule = WeightSchedule::Exp;
    int steps = 0;
    std::vector<double> weights;  // w_1 .. w_S, sums to 1
};

/// Exp: 2^k / sum 2^i; Linear: k / sum i; Log: log2(k+1) / sum log2(i+1).
LossWeights step_weights(WeightSchedule schedule, int steps);

/// sum_k w_k l_sup(B_k, B_gt) over the S restoration outputs.
double l_res(const std::vector<Image>& trace_B, const Image& B_gt, const LossWeights& w, double xi = kCharbonnierXi);

/// sum_{k < S} w'_k l_sup(apply_model(B_ref, T_hat_k, D_hat_k), O_ref), where
/// w' renormalizes w_1 .. w_{S-1}. Zero when S = 1.
double l_deg(const std::vector<std::pair<Image, Image>>& trace_TD, const Image& O_ref, const Image& B_ref,
             const LossWeights& w, double xi = kCharbonnierXi);

double l_total(const std::vector<Image>& trace_B, const Image& B_gt,
               const std::vector<std::pair<Image, Image>>& trace_TD, const Image& O_ref, const Image& B_ref,
               const LossWeights& w, double xi = kCharbonnierXi);

}  // namespace drm
