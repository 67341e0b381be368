#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "drm/error.hpp"

namespace drm {

inline constexpr int kChannels = 3;

/// H x W x 3 array of 64-bit reals, channel-interleaved, row-major.
///
/// The same container holds clean/degraded images (values in [0,1]) and the
/// degradation fields T, D and their auxiliaries P, Q, whose ranges are
/// enforced by the code that produces them. Copies are deep.
class Image {
public:
    Image() = default;
    Image(int height, int width, double fill = 0.0);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t pixels() const noexcept { return static_cast<std::size_t>(height_) * width_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& at(int y, int x, int c) noexcept {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * kChannels + c];
    }
    double at(int y, int x, int c) const noexcept {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * kChannels + c];
    }

    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    bool same_shape(const Image& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_;
    }

    bool all_finite() const noexcept;
    double min() const;
    double max() const;
    double mean() const;

    friend bool operator==(const Image&, const Image&) = default;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<double> data_;
};

/// Throws ShapeMismatch naming `what` unless every image matches the first.
void require_same_shape(const char* what, const Image& a, const Image& b);

Image clamped(Image img, double lo, double hi);

/// Patch-averaged features on a ceil(H/patch) x ceil(W/patch) grid.
struct FeatureGrid {
    int rows = 0;
    int cols = 0;
    int dim = 0;
    std::vector<double> data;  // rows * cols * dim

    double at(int r, int c, int d) const noexcept {
        return data[(static_cast<std::size_t>(r) * cols + c) * dim + d];
    }
    double& at(int r, int c, int d) noexcept {
        return data[(static_cast<std::size_t>(r) * cols + c) * dim + d];
    }
    std::size_t cells() const noexcept { return static_cast<std::size_t>(rows) * cols; }
};

/// Per-channel patch means. Edge patches average over their true pixel count.
FeatureGrid downsample_avg(const Image& img, int patch);

/// Loads 8-bit RGB PNG or binary PPM (P6, maxval 255); values are byte / 255.
Image load_image(const std::filesystem::path& path);

/// Writes PNG or PPM by extension (.png / .ppm). Each value is quantized as
/// floor(v * 255 + 0.5) clamped to [0, 255]. The file is written to a
/// temporary sibling and renamed into place.
void save_image(const Image& img, const std::filesystem::path& path);

/// Quantization rule used by save_image.
unsigned char quantize_u8(double v) noexcept;

/// Writes `bytes` to `path` via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::span<const unsigned char> bytes);

}  // namespace drm
