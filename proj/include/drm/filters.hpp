#pragma once

#include <vector>

#include "drm/image.hpp"

// Small separable/local filters on single planes and 3-channel images.
// All filters use edge-reflecting (or edge-clamping for min) boundaries.
namespace drm::filters {

struct Plane {
    int height = 0;
    int width = 0;
    std::vector<double> data;

    double at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
    double& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
};

Plane channel(const Image& img, int c);
Plane luminance(const Image& img);  // 0.299 R + 0.587 G + 0.114 B
Plane max_rgb(const Image& img);
Plane min_rgb(const Image& img);
Image broadcast(const Plane& plane);

/// Mirror index into [0, n) without repeating the edge sample.
int reflect(int i, int n);

/// Square window minimum of side `patch` (odd), window clipped at the border.
Plane min_filter(const Plane& in, int patch);
/// Square window median of side `size` (odd), per channel.
Image median_filter(const Image& img, int size);
/// Separable Gaussian blur, radius ceil(3 sigma).
Plane gaussian_blur(const Plane& in, double sigma);

/// min over channels, then min_filter(patch).
Plane dark_channel(const Image& img, int patch);

}  // namespace drm::filters
