#include "drm/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "drm/filters.hpp"

namespace drm {

void SolverState::validate() const {
    for (const Image* a : {&Z, &T, &D, &P, &Q}) require_same_shape("solver state", B, *a);
    for (const Image* a : {&B, &Z, &T, &D, &P, &Q}) {
        if (!a->all_finite()) throw Error(ErrorCode::InvalidArgument, "solver state holds non-finite values");
    }
    for (double t : T.values()) {
        if (t < kTransmissionFloor || t > 1.0) {
            throw Error(ErrorCode::InvalidArgument, "solver state transmission outside [1e-3, 1]");
        }
    }
}

ImageStatistics image_statistics(const Image& O, const ClassifierConfig& cfg) {
    ImageStatistics s;
    const auto lum = filters::luminance(O);
    s.mean_luminance = std::accumulate(lum.data.begin(), lum.data.end(), 0.0) / lum.data.size();

    // Gradient energy of the high-pass luminance residual at 0, 45, 90 and
    // 135 degrees. The residual suppresses smooth ramps, which would otherwise
    // look directional. Diagonal taps are sqrt(2) apart.
    auto detail = lum;
    const auto base = filters::gaussian_blur(lum, cfg.highpass_sigma);
    for (std::size_t i = 0; i < detail.data.size(); ++i) detail.data[i] -= base.data[i];

    constexpr int kOffsets[4][2] = {{0, 1}, {1, 1}, {1, 0}, {1, -1}};
    double energy[4] = {0, 0, 0, 0};
    double count[4] = {0, 0, 0, 0};
    for (int o = 0; o < 4; ++o) {
        const int dy = kOffsets[o][0], dx = kOffsets[o][1];
        const double scale = (dy != 0 && dx != 0) ? 0.5 : 1.0;
        for (int y = 0; y + dy < detail.height; ++y) {
            for (int x = std::max(0, -dx); x < detail.width && x + dx < detail.width; ++x) {
                const double d = detail.at(y + dy, x + dx) - detail.at(y, x);
                energy[o] += scale * d * d;
                count[o] += 1;
            }
        }
    }
    double mean = 0.0, peak = 0.0;
    int used = 0;
    for (int i = 0; i < 4; ++i) {
        if (count[i] == 0) continue;
        const double e = energy[i] / count[i];
        mean += e;
        peak = std::max(peak, e);
        ++used;
    }
    mean = used > 0 ? mean / used : 0.0;
    s.direction_ratio = mean > 1e-15 ? peak / mean : 1.0;

    const auto dark = filters::dark_channel(O, cfg.dark_channel_patch);
    s.dark_channel_mean = std::accumulate(dark.data.begin(), dark.data.end(), 0.0) / dark.data.size();
    return s;
}

DegradationKind classify(const Image& O, const ClassifierConfig& cfg) {
    const auto s = image_statistics(O, cfg);
    if (s.mean_luminance < cfg.lowlight_luminance) return DegradationKind::LowLight;
    if (s.direction_ratio > cfg.rain_direction_ratio) return DegradationKind::Rain;
    if (s.dark_channel_mean > cfg.haze_dark_channel) return DegradationKind::Haze;
    return DegradationKind::Haze;
}

std::array<double, 3> estimate_airlight(const Image& O, const EstimatorConfig& cfg) {
    const auto dark = filters::dark_channel(O, cfg.dark_channel_patch);
    std::vector<std::size_t> order(dark.data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t n = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.airlight_fraction * order.size())));
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          return dark.data[a] != dark.data[b] ? dark.data[a] > dark.data[b] : a < b;
                      });
    std::array<double, 3> A{0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        const int y = static_cast<int>(order[i] / O.width()), x = static_cast<int>(order[i] % O.width());
        for (int c = 0; c < kChannels; ++c) A[c] += O.at(y, x, c);
    }
    for (double& a : A) a /= static_cast<double>(n);
    return A;
}

namespace {

DegradationMatrices estimate_rain(const Image& O, const EstimatorConfig& cfg) {
    DegradationMatrices M = identity_matrices(O.height(), O.width());
    const Image smooth = filters::median_filter(O, cfg.median_size);
    for (std::size_t i = 0; i < O.size(); ++i) M.D[i] = std::clamp(O[i] - smooth[i], 0.0, 1.0);
    return M;
}

DegradationMatrices estimate_haze(const Image& O, const EstimatorConfig& cfg) {
    const auto A = estimate_airlight(O, cfg);
    Image normalized(O.height(), O.width());
    for (int y = 0; y < O.height(); ++y)
        for (int x = 0; x < O.width(); ++x)
            for (int c = 0; c < kChannels; ++c) normalized.at(y, x, c) = O.at(y, x, c) / std::max(A[c], 1e-6);
    const auto dark = filters::dark_channel(normalized, cfg.dark_channel_patch);
    DegradationMatrices M = identity_matrices(O.height(), O.width());
    for (int y = 0; y < O.height(); ++y) {
        for (int x = 0; x < O.width(); ++x) {
            const double t = std::clamp(1.0 - cfg.haze_omega * dark.at(y, x), kTransmissionFloor, 1.0);
            for (int c = 0; c < kChannels; ++c) {
                M.T.at(y, x, c) = t;
                M.D.at(y, x, c) = std::clamp((1.0 - t) * A[c], -1.0, 1.0);
            }
        }
    }
    return M;
}

DegradationMatrices estimate_lowlight(const Image& O, const EstimatorConfig& cfg) {
    auto illum = filters::gaussian_blur(filters::max_rgb(O), O.height() * cfg.illumination_sigma_fraction);
    for (double& v : illum.data) v = std::clamp(v, kTransmissionFloor, 1.0);
    return {filters::broadcast(illum), Image(O.height(), O.width(), 0.0)};
}

}  // namespace

DegradationMatrices estimate_initial(const Image& O, DegradationKind kind, const EstimatorConfig& cfg) {
    if (O.empty()) throw Error(ErrorCode::ZeroDimension, "estimate_initial: empty image");
    switch (kind) {
        case DegradationKind::Rain: return estimate_rain(O, cfg);
        case DegradationKind::Haze: return estimate_haze(O, cfg);
        case DegradationKind::LowLight: return estimate_lowlight(O, cfg);
    }
    throw Error(ErrorCode::InvalidArgument, "estimate_initial: unknown kind");
}

SolverState init_state(const Image& O, const DegradationMatrices& M0) {
    M0.validate(O);
    SolverState s{O, O, M0.T, M0.D, M0.T, M0.D, 0};
    s.validate();
    return s;
}

}  // namespace drm
