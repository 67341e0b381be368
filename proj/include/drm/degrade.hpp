#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>

#include "drm/image.hpp"
#include "drm/kind.hpp"

namespace drm {

/// Lower bound on transmission values.
inline constexpr double kTransmissionFloor = 1e-3;
/// Division guard for invert_model.
inline constexpr double kInvertEps = 1e-5;

/// Transmission map T and additive degradation map D of O = T*B + D.
struct DegradationMatrices {
    Image T;
    Image D;

    /// Checks shapes, T in [kTransmissionFloor, 1], D in [-1, 1] and finiteness.
    void validate(const Image& associated) const;
    bool valid_for(const Image& associated) const noexcept;
};

/// T = 1, D = 0.
DegradationMatrices identity_matrices(int height, int width);

/// O = clamp(T*B + D, 0, 1), elementwise.
Image apply_model(const Image& B, const DegradationMatrices& M);

/// I = clamp((O - D) / (T + eps), 0, 1), elementwise.
Image invert_model(const Image& O, const DegradationMatrices& M, double eps = kInvertEps);

struct RainParams {
    int streak_count = 0;      // 0 selects height*width/360
    double angle_deg = 10.0;   // streak direction from vertical, [-60, 60]
    double length_px = 12.0;   // [1, 256]
    double intensity = 0.6;    // (0, 1]
};

struct HazeParams {
    double atmospheric_light = 0.9;  // [0.7, 1]
    double depth_scale = 1.5;        // (0, 10]
};

struct LowLightParams {
    double gamma_exponent = 3.0;     // [2, 5]
    double spatial_smoothness = 1.0; // [0.25, 4]; larger means smoother illumination
};

struct SimParams {
    DegradationKind kind = DegradationKind::Rain;
    std::uint64_t seed = 0;
    RainParams rain;
    HazeParams haze;
    LowLightParams lowlight;

    /// Throws InvalidArgument if any field is out of range.
    void validate() const;
};

struct Simulation {
    Image degraded;
    DegradationMatrices matrices;
};

/// Synthesizes (O, T, D) for a clean image. Deterministic in (B, p).
///   rain:     T = 1, D = sparse oriented streaks
///   haze:     T = exp(-depth_scale * depth), D = (1 - T) * A
///   lowlight: T = smooth illumination in [0.05, 0.5], D = 0
Simulation simulate(const Image& B, const SimParams& p);

/// Sidecar layout: "DRMTD1", uint32 LE height, uint32 LE width, then T and D
/// as H*W*3 little-endian float64 each, in Image storage order.
void write_matrices(const DegradationMatrices& M, const std::filesystem::path& path);
DegradationMatrices read_matrices(const std::filesystem::path& path);

}  // namespace drm
