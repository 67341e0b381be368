#include "drm/metrics.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "drm/degrade.hpp"

namespace drm {

double psnr(const Image& x, const Image& y) {
    require_same_shape("psnr", x, y);
    if (x.empty()) throw Error(ErrorCode::ZeroDimension, "psnr of empty images");
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        sse += d * d;
    }
    const double mse = sse / static_cast<double>(x.size());
    if (mse == 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

std::vector<double> gaussian_window() {
    std::vector<double> w(kWindow * kWindow);
    const int r = kWindow / 2;
    double sum = 0.0;
    for (int y = -r; y <= r; ++y)
        for (int x = -r; x <= r; ++x)
            sum += w[(y + r) * kWindow + (x + r)] = std::exp(-(x * x + y * y) / (2.0 * kSigma * kSigma));
    for (double& v : w) v /= sum;
    return w;
}

}  // namespace

double ssim(const Image& x, const Image& y) {
    require_same_shape("ssim", x, y);
    if (std::min(x.height(), x.width()) < kWindow) {
        throw Error(ErrorCode::InvalidArgument, "ssim: image smaller than the 11x11 window");
    }
    static const std::vector<double> window = gaussian_window();
    constexpr double C1 = 0.01 * 0.01, C2 = 0.03 * 0.03;
    const int rows = x.height() - kWindow + 1, cols = x.width() - kWindow + 1;
    double total = 0.0;
    for (int c = 0; c < kChannels; ++c) {
        double channel_sum = 0.0;
        for (int y0 = 0; y0 < rows; ++y0) {
            for (int x0 = 0; x0 < cols; ++x0) {
                double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
                for (int dy = 0; dy < kWindow; ++dy) {
                    for (int dx = 0; dx < kWindow; ++dx) {
                        const double w = window[dy * kWindow + dx];
                        const double a = x.at(y0 + dy, x0 + dx, c), b = y.at(y0 + dy, x0 + dx, c);
                        mx += w * a;
                        my += w * b;
                        sxx += w * a * a;
                        syy += w * b * b;
                        sxy += w * a * b;
                    }
                }
                const double vx = sxx - mx * mx, vy = syy - my * my, cov = sxy - mx * my;
                channel_sum += ((2 * mx * my + C1) * (2 * cov + C2)) / ((mx * mx + my * my + C1) * (vx + vy + C2));
            }
        }
        total += channel_sum / (static_cast<double>(rows) * cols);
    }
    return total / kChannels;
}

double l_sup(const Image& yhat, const Image& y, double xi) {
    require_same_shape("l_sup", yhat, y);
    if (!(xi > 0.0)) throw Error(ErrorCode::InvalidArgument, "l_sup: xi must be > 0");
    double charbonnier = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = yhat[i] - y[i];
        charbonnier += std::sqrt(d * d + xi * xi);
    }
    return (1.0 - ssim(yhat, y)) + charbonnier / static_cast<double>(y.size());
}

LossWeights step_weights(WeightSchedule schedule, int steps) {
    if (steps < 1) throw Error(ErrorCode::InvalidArgument, "step_weights: steps must be >= 1");
    LossWeights w{schedule, steps, std::vector<double>(steps)};
    for (int k = 1; k <= steps; ++k) {
        switch (schedule) {
            case WeightSchedule::Exp: w.weights[k - 1] = std::ldexp(1.0, k); break;
            case WeightSchedule::Linear: w.weights[k - 1] = k; break;
            case WeightSchedule::Log: w.weights[k - 1] = std::log2(k + 1.0); break;
        }
    }
    const double sum = std::accumulate(w.weights.begin(), w.weights.end(), 0.0);
    for (double& v : w.weights) v /= sum;
    return w;
}

double l_res(const std::vector<Image>& trace_B, const Image& B_gt, const LossWeights& w, double xi) {
    if (trace_B.size() != w.weights.size()) {
        throw Error(ErrorCode::InvalidArgument, "l_res: trace length " + std::to_string(trace_B.size()) +
                                                    " does not match " + std::to_string(w.weights.size()) + " weights");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < trace_B.size(); ++k) total += w.weights[k] * l_sup(trace_B[k], B_gt, xi);
    return total;
}

double l_deg(const std::vector<std::pair<Image, Image>>& trace_TD, const Image& O_ref, const Image& B_ref,
             const LossWeights& w, double xi) {
    if (trace_TD.size() + 1 != w.weights.size()) {
        throw Error(ErrorCode::InvalidArgument, "l_deg: expected " + std::to_string(w.weights.size() - 1) +
                                                    " matrix pairs, got " + std::to_string(trace_TD.size()));
    }
    if (trace_TD.empty()) return 0.0;
    const double norm = std::accumulate(w.weights.begin(), w.weights.end() - 1, 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < trace_TD.size(); ++k) {
        const Image composed = apply_model(B_ref, {trace_TD[k].first, trace_TD[k].second});
        total += (w.weights[k] / norm) * l_sup(composed, O_ref, xi);
    }
    return total;
}

double l_total(const std::vector<Image>& trace_B, const Image& B_gt,
               const std::vector<std::pair<Image, Image>>& trace_TD, const Image& O_ref, const Image& B_ref,
               const LossWeights& w, double xi) {
    return l_res(trace_B, B_gt, w, xi) + l_deg(trace_TD, O_ref, B_ref, w, xi);
}

}  // namespace drm
