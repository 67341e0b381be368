#include "drm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace drm {

std::vector<double> low_frequency_field(int height, int width, std::mt19937_64& rng,
                                        int components, double max_cycles) {
    struct Wave {
        double fy, fx, phase, amp;
    };
    std::vector<Wave> waves;
    for (int i = 0; i < components; ++i) {
        const double angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        const double cycles = uniform(rng, 0.25, max_cycles);
        waves.push_back({cycles * std::sin(angle), cycles * std::cos(angle),
                         uniform(rng, 0.0, 2.0 * std::numbers::pi), uniform(rng, 0.5, 1.0)});
    }
    std::vector<double> field(static_cast<std::size_t>(height) * width, 0.0);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double v = 0.0;
            for (const auto& w : waves) {
                v += w.amp * std::cos(2.0 * std::numbers::pi *
                                          (w.fy * (y + 0.5) / height + w.fx * (x + 0.5) / width) +
                                      w.phase);
            }
            field[static_cast<std::size_t>(y) * width + x] = v;
        }
    }
    const auto [lo, hi] = std::minmax_element(field.begin(), field.end());
    const double lo_v = *lo, span = *hi - *lo;
    for (double& v : field) v = span > 0.0 ? (v - lo_v) / span : 0.5;
    return field;
}

namespace {

struct Rgb {
    double r, g, b;
};

Rgb hsv_to_rgb(double h, double s, double v) {
    const double c = v * s;
    const double hp = h * 6.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    Rgb out{0, 0, 0};
    switch (static_cast<int>(hp) % 6) {
        case 0: out = {c, x, 0}; break;
        case 1: out = {x, c, 0}; break;
        case 2: out = {0, c, x}; break;
        case 3: out = {0, x, c}; break;
        case 4: out = {x, 0, c}; break;
        default: out = {c, 0, x}; break;
    }
    const double m = v - c;
    return {out.r + m, out.g + m, out.b + m};
}

Rgb random_saturated(std::mt19937_64& rng) {
    return hsv_to_rgb(uniform01(rng), uniform(rng, 0.65, 0.95), uniform(rng, 0.7, 0.97));
}

}  // namespace

Image synthesize_clean(int height, int width, std::uint64_t seed) {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 0x5EED);
    Image img(height, width);
    const double scale = std::min(height, width);

    struct Blob {
        double cy, cx, sigma;
        Rgb color;
    };
    std::vector<Blob> blobs(5);
    for (auto& b : blobs) {
        b = {uniform(rng, 0.0, height), uniform(rng, 0.0, width), uniform(rng, 0.2, 0.45) * scale,
             random_saturated(rng)};
    }
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double wsum = 0.0;
            Rgb acc{0, 0, 0};
            for (const auto& b : blobs) {
                const double d2 = (y - b.cy) * (y - b.cy) + (x - b.cx) * (x - b.cx);
                // Floor keeps the weights well defined far from every blob.
                const double w = std::exp(-d2 / (2.0 * b.sigma * b.sigma)) + 1e-6;
                wsum += w;
                acc.r += w * b.color.r;
                acc.g += w * b.color.g;
                acc.b += w * b.color.b;
            }
            img.at(y, x, 0) = acc.r / wsum;
            img.at(y, x, 1) = acc.g / wsum;
            img.at(y, x, 2) = acc.b / wsum;
        }
    }

    const int discs = 3;
    for (int i = 0; i < discs; ++i) {
        const double cy = uniform(rng, 0.0, height), cx = uniform(rng, 0.0, width);
        const double radius = uniform(rng, 0.08, 0.2) * scale;
        const Rgb color = random_saturated(rng);
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                const double d = std::hypot(y + 0.5 - cy, x + 0.5 - cx);
                const double cover = std::clamp(radius - d + 0.5, 0.0, 1.0);
                if (cover <= 0.0) continue;
                img.at(y, x, 0) = (1 - cover) * img.at(y, x, 0) + cover * color.r;
                img.at(y, x, 1) = (1 - cover) * img.at(y, x, 1) + cover * color.g;
                img.at(y, x, 2) = (1 - cover) * img.at(y, x, 2) + cover * color.b;
            }
        }
    }
    return clamped(std::move(img), 0.02, 0.98);
}

}  // namespace drm
