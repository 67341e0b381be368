#pragma once

#include <array>

#include "drm/degrade.hpp"
#include "drm/kind.hpp"
#include "drm/state.hpp"

namespace drm {

/// Thresholds of the heuristic degradation-type classifier.
struct ClassifierConfig {
    double lowlight_luminance = 0.18;
    double rain_direction_ratio = 1.5;
    double haze_dark_channel = 0.4;
    int dark_channel_patch = 15;
    double highpass_sigma = 1.5;
};

struct ImageStatistics {
    double mean_luminance = 0.0;
    /// max / mean of high-pass luminance gradient energy over 0, 45, 90 and
    /// 135 degrees.
    double direction_ratio = 1.0;
    double dark_channel_mean = 0.0;
};

ImageStatistics image_statistics(const Image& O, const ClassifierConfig& cfg = {});

/// LowLight if dim, else Rain if strongly directional, else Haze.
DegradationKind classify(const Image& O, const ClassifierConfig& cfg = {});

struct EstimatorConfig {
    int median_size = 5;
    int dark_channel_patch = 15;
    double haze_omega = 0.95;
    double airlight_fraction = 0.001;
    double illumination_sigma_fraction = 1.0 / 16.0;  // sigma = H * fraction
};

/// Closed-form initial (T0, D0) per kind:
///   Rain:     T0 = 1, D0 = clamp(O - median(O), 0, 1)
///   Haze:     dark-channel transmission and airlight, D0 = (1 - T0) * A
///   LowLight: T0 = blurred max-RGB illumination, D0 = 0
DegradationMatrices estimate_initial(const Image& O, DegradationKind kind, const EstimatorConfig& cfg = {});

/// Per-channel airlight used by the haze estimator.
std::array<double, 3> estimate_airlight(const Image& O, const EstimatorConfig& cfg = {});

/// B0 = Z0 = O, (T0, D0) = M0, P0 = T0, Q0 = D0, k = 0.
SolverState init_state(const Image& O, const DegradationMatrices& M0);

}  // namespace drm
