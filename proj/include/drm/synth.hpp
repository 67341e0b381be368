#pragma once

#include <cstdint>
#include <random>

#include "drm/image.hpp"

namespace drm {

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit engine.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

/// Sum of `components` random planar cosine waves with at most `max_cycles`
/// periods across the image, min-max normalized to [0, 1].
std::vector<double> low_frequency_field(int height, int width, std::mt19937_64& rng,
                                        int components, double max_cycles);

/// Smooth, saturated synthetic scene: blended color blobs plus a few
/// anti-aliased discs. Values stay inside [0.02, 0.98].
Image synthesize_clean(int height, int width, std::uint64_t seed);

}  // namespace drm
