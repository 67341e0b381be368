#include "drm/filters.hpp"

#include <algorithm>
#include <cmath>

namespace drm::filters {

namespace {

Plane make_plane(const Image& img) {
    return {img.height(), img.width(), std::vector<double>(img.pixels(), 0.0)};
}

}  // namespace

Plane channel(const Image& img, int c) {
    Plane p = make_plane(img);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) p.at(y, x) = img.at(y, x, c);
    return p;
}

Plane luminance(const Image& img) {
    Plane p = make_plane(img);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            p.at(y, x) = 0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) + 0.114 * img.at(y, x, 2);
    return p;
}

Plane max_rgb(const Image& img) {
    Plane p = make_plane(img);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            p.at(y, x) = std::max({img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2)});
    return p;
}

Plane min_rgb(const Image& img) {
    Plane p = make_plane(img);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            p.at(y, x) = std::min({img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2)});
    return p;
}

Image broadcast(const Plane& plane) {
    Image img(plane.height, plane.width);
    for (int y = 0; y < plane.height; ++y)
        for (int x = 0; x < plane.width; ++x)
            for (int c = 0; c < kChannels; ++c) img.at(y, x, c) = plane.at(y, x);
    return img;
}

int reflect(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

Plane min_filter(const Plane& in, int patch) {
    const int r = patch / 2;
    // Separable: rows then columns.
    Plane tmp = in, out = in;
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            double m = in.at(y, x);
            for (int dx = std::max(0, x - r); dx <= std::min(in.width - 1, x + r); ++dx) m = std::min(m, in.at(y, dx));
            tmp.at(y, x) = m;
        }
    }
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            double m = tmp.at(y, x);
            for (int dy = std::max(0, y - r); dy <= std::min(in.height - 1, y + r); ++dy) m = std::min(m, tmp.at(dy, x));
            out.at(y, x) = m;
        }
    }
    return out;
}

Image median_filter(const Image& img, int size) {
    const int r = size / 2;
    Image out(img.height(), img.width());
    std::vector<double> window(static_cast<std::size_t>(size) * size);
    for (int c = 0; c < kChannels; ++c) {
        for (int y = 0; y < img.height(); ++y) {
            for (int x = 0; x < img.width(); ++x) {
                std::size_t n = 0;
                for (int dy = -r; dy <= r; ++dy)
                    for (int dx = -r; dx <= r; ++dx)
                        window[n++] = img.at(reflect(y + dy, img.height()), reflect(x + dx, img.width()), c);
                auto mid = window.begin() + static_cast<std::ptrdiff_t>(n / 2);
                std::nth_element(window.begin(), mid, window.begin() + static_cast<std::ptrdiff_t>(n));
                out.at(y, x, c) = *mid;
            }
        }
    }
    return out;
}

Plane gaussian_blur(const Plane& in, double sigma) {
    if (!(sigma > 0.0)) return in;
    const int r = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * r + 1);
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) sum += kernel[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
    for (double& k : kernel) k /= sum;

    Plane tmp = in, out = in;
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) acc += kernel[i + r] * in.at(y, reflect(x + i, in.width));
            tmp.at(y, x) = acc;
        }
    }
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) acc += kernel[i + r] * tmp.at(reflect(y + i, in.height), x);
            out.at(y, x) = acc;
        }
    }
    return out;
}

Plane dark_channel(const Image& img, int patch) { return min_filter(min_rgb(img), patch); }

}  // namespace drm::filters
