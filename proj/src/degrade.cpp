#include "drm/degrade.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>
#include <string>

#include "drm/synth.hpp"

namespace drm {

std::string_view to_string(DegradationKind kind) {
    switch (kind) {
        case DegradationKind::Rain: return "rain";
        case DegradationKind::Haze: return "haze";
        case DegradationKind::LowLight: return "lowlight";
    }
    return "unknown";
}

std::optional<DegradationKind> parse_kind(std::string_view name) {
    for (auto k : kAllKinds)
        if (to_string(k) == name) return k;
    return std::nullopt;
}

void DegradationMatrices::validate(const Image& associated) const {
    require_same_shape("degradation T vs image", T, associated);
    require_same_shape("degradation D vs image", D, associated);
    for (std::size_t i = 0; i < T.size(); ++i) {
        if (!std::isfinite(T[i]) || T[i] < kTransmissionFloor || T[i] > 1.0) {
            throw Error(ErrorCode::InvalidArgument, "transmission outside [1e-3, 1]: " + std::to_string(T[i]));
        }
        if (!std::isfinite(D[i]) || D[i] < -1.0 || D[i] > 1.0) {
            throw Error(ErrorCode::InvalidArgument, "degradation map outside [-1, 1]: " + std::to_string(D[i]));
        }
    }
}

bool DegradationMatrices::valid_for(const Image& associated) const noexcept {
    try {
        validate(associated);
        return true;
    } catch (const Error&) {
        return false;
    }
}

DegradationMatrices identity_matrices(int height, int width) {
    return {Image(height, width, 1.0), Image(height, width, 0.0)};
}

Image apply_model(const Image& B, const DegradationMatrices& M) {
    require_same_shape("apply_model T", M.T, B);
    require_same_shape("apply_model D", M.D, B);
    Image O(B.height(), B.width());
    for (std::size_t i = 0; i < B.size(); ++i) O[i] = std::clamp(M.T[i] * B[i] + M.D[i], 0.0, 1.0);
    return O;
}

Image invert_model(const Image& O, const DegradationMatrices& M, double eps) {
    require_same_shape("invert_model T", M.T, O);
    require_same_shape("invert_model D", M.D, O);
    if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "invert_model: eps must be > 0");
    Image I(O.height(), O.width());
    for (std::size_t i = 0; i < O.size(); ++i) {
        I[i] = std::clamp((O[i] - M.D[i]) / (M.T[i] + eps), 0.0, 1.0);
    }
    return I;
}

void SimParams::validate() const {
    auto check = [](bool ok, const char* what) {
        if (!ok) throw Error(ErrorCode::InvalidArgument, std::string("invalid simulation parameter: ") + what);
    };
    check(rain.streak_count >= 0, "rain.streak_count must be >= 0");
    check(rain.angle_deg >= -60.0 && rain.angle_deg <= 60.0, "rain.angle_deg must be in [-60, 60]");
    check(rain.length_px >= 1.0 && rain.length_px <= 256.0, "rain.length_px must be in [1, 256]");
    check(rain.intensity > 0.0 && rain.intensity <= 1.0, "rain.intensity must be in (0, 1]");
    check(haze.atmospheric_light >= 0.7 && haze.atmospheric_light <= 1.0,
          "haze.atmospheric_light must be in [0.7, 1]");
    check(haze.depth_scale > 0.0 && haze.depth_scale <= 10.0, "haze.depth_scale must be in (0, 10]");
    check(lowlight.gamma_exponent >= 2.0 && lowlight.gamma_exponent <= 5.0,
          "lowlight.gamma_exponent must be in [2, 5]");
    check(lowlight.spatial_smoothness >= 0.25 && lowlight.spatial_smoothness <= 4.0,
          "lowlight.spatial_smoothness must be in [0.25, 4]");
}

namespace {

constexpr double kStreakSigma = 0.6;
constexpr double kStreakCutoff = 1.2;  // px; beyond this the streak contributes exactly 0

DegradationMatrices rain_matrices(const Image& B, const RainParams& p, std::mt19937_64& rng) {
    const int h = B.height(), w = B.width();
    DegradationMatrices M = identity_matrices(h, w);
    const int count = p.streak_count > 0 ? p.streak_count : std::max(1, h * w / 360);
    std::vector<double> streak(static_cast<std::size_t>(h) * w, 0.0);
    for (int s = 0; s < count; ++s) {
        const double angle = (p.angle_deg + uniform(rng, -3.0, 3.0)) * std::numbers::pi / 180.0;
        const double len = p.length_px * uniform(rng, 0.7, 1.3);
        const double amp = p.intensity * uniform(rng, 0.7, 1.0);
        const double cy = uniform(rng, 0.0, h), cx = uniform(rng, 0.0, w);
        // Direction measured from vertical: dy = cos, dx = sin.
        const double dy = std::cos(angle), dx = std::sin(angle);
        const double y0 = cy - 0.5 * len * dy, x0 = cx - 0.5 * len * dx;
        const double y1 = cy + 0.5 * len * dy, x1 = cx + 0.5 * len * dx;
        const int ylo = std::max(0, static_cast<int>(std::floor(std::min(y0, y1) - kStreakCutoff)));
        const int yhi = std::min(h - 1, static_cast<int>(std::ceil(std::max(y0, y1) + kStreakCutoff)));
        const int xlo = std::max(0, static_cast<int>(std::floor(std::min(x0, x1) - kStreakCutoff)));
        const int xhi = std::min(w - 1, static_cast<int>(std::ceil(std::max(x0, x1) + kStreakCutoff)));
        for (int y = ylo; y <= yhi; ++y) {
            for (int x = xlo; x <= xhi; ++x) {
                const double py = y + 0.5 - y0, px = x + 0.5 - x0;
                const double t = std::clamp((py * dy + px * dx) / len, 0.0, 1.0);
                const double ey = py - t * len * dy, ex = px - t * len * dx;
                const double d = std::hypot(ey, ex);
                if (d > kStreakCutoff) continue;
                const double v = amp * std::exp(-d * d / (2.0 * kStreakSigma * kStreakSigma));
                auto& cell = streak[static_cast<std::size_t>(y) * w + x];
                cell = std::max(cell, v);
            }
        }
    }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < kChannels; ++c) M.D.at(y, x, c) = std::min(1.0, streak[static_cast<std::size_t>(y) * w + x]);
    return M;
}

DegradationMatrices haze_matrices(const Image& B, const HazeParams& p, std::mt19937_64& rng) {
    const int h = B.height(), w = B.width();
    const auto depth = low_frequency_field(h, w, rng, 3, 1.0);
    DegradationMatrices M = identity_matrices(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double t = std::clamp(std::exp(-p.depth_scale * depth[static_cast<std::size_t>(y) * w + x]),
                                        kTransmissionFloor, 1.0);
            for (int c = 0; c < kChannels; ++c) {
                M.T.at(y, x, c) = t;
                M.D.at(y, x, c) = (1.0 - t) * p.atmospheric_light;
            }
        }
    }
    return M;
}

DegradationMatrices lowlight_matrices(const Image& B, const LowLightParams& p, std::mt19937_64& rng) {
    const int h = B.height(), w = B.width();
    const auto field = low_frequency_field(h, w, rng, 3, 1.5 / p.spatial_smoothness);
    DegradationMatrices M = identity_matrices(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double base = 0.35 + 0.65 * field[static_cast<std::size_t>(y) * w + x];
            const double t = std::clamp(0.5 * std::pow(base, p.gamma_exponent), 0.05, 0.5);
            for (int c = 0; c < kChannels; ++c) M.T.at(y, x, c) = t;
        }
    }
    return M;
}

}  // namespace

Simulation simulate(const Image& B, const SimParams& p) {
    p.validate();
    if (B.empty()) throw Error(ErrorCode::ZeroDimension, "simulate: empty image");
    std::mt19937_64 rng(p.seed ^ (0xD1B54A32D192ED03ULL * (static_cast<std::uint64_t>(p.kind) + 1)));
    DegradationMatrices M;
    switch (p.kind) {
        case DegradationKind::Rain: M = rain_matrices(B, p.rain, rng); break;
        case DegradationKind::Haze: M = haze_matrices(B, p.haze, rng); break;
        case DegradationKind::LowLight: M = lowlight_matrices(B, p.lowlight, rng); break;
    }
    Image O = apply_model(B, M);
    return {std::move(O), std::move(M)};
}

namespace {

constexpr char kSidecarMagic[6] = {'D', 'R', 'M', 'T', 'D', '1'};

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint32_t get_u32(const unsigned char* p) {
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
           (std::uint32_t(p[3]) << 24);
}

void put_f64(std::vector<unsigned char>& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

double get_f64(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t(p[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

}  // namespace

void write_matrices(const DegradationMatrices& M, const std::filesystem::path& path) {
    require_same_shape("write_matrices", M.T, M.D);
    std::vector<unsigned char> bytes(kSidecarMagic, kSidecarMagic + 6);
    bytes.reserve(14 + 16 * M.T.size());
    put_u32(bytes, static_cast<std::uint32_t>(M.T.height()));
    put_u32(bytes, static_cast<std::uint32_t>(M.T.width()));
    for (double v : M.T.values()) put_f64(bytes, v);
    for (double v : M.D.values()) put_f64(bytes, v);
    write_file_atomic(path, bytes);
}

DegradationMatrices read_matrices(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Unreadable, "cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 14 || !std::equal(kSidecarMagic, kSidecarMagic + 6, bytes.begin())) {
        throw Error(ErrorCode::UnsupportedFormat, "unsupported format: not a DRMTD1 sidecar: " + path.string());
    }
    const auto h = get_u32(bytes.data() + 6), w = get_u32(bytes.data() + 10);
    if (h == 0 || w == 0) throw Error(ErrorCode::ZeroDimension, "zero-dimension sidecar: " + path.string());
    const std::size_t n = std::size_t(h) * w * kChannels;
    if (bytes.size() != 14 + 16 * n) {
        throw Error(ErrorCode::UnsupportedFormat, "unsupported format: truncated sidecar: " + path.string());
    }
    DegradationMatrices M{Image(int(h), int(w)), Image(int(h), int(w))};
    const unsigned char* p = bytes.data() + 14;
    for (std::size_t i = 0; i < n; ++i, p += 8) M.T[i] = get_f64(p);
    for (std::size_t i = 0; i < n; ++i, p += 8) M.D[i] = get_f64(p);
    return M;
}

}  // namespace drm
