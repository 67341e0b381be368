#include "drm/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <string>

#include <png.h>

namespace drm {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::Unreadable: return "unreadable file";
        case ErrorCode::UnsupportedFormat: return "unsupported format";
        case ErrorCode::ZeroDimension: return "zero-dimension image";
        case ErrorCode::Io: return "i/o failure";
        case ErrorCode::InvalidArgument: return "invalid argument";
        case ErrorCode::ShapeMismatch: return "shape mismatch";
        case ErrorCode::NotConverged: return "not converged";
    }
    return "unknown error";
}

Image::Image(int height, int width, double fill) : height_(height), width_(width) {
    if (height < 0 || width < 0) {
        throw Error(ErrorCode::InvalidArgument, "negative image dimension");
    }
    data_.assign(static_cast<std::size_t>(height) * width * kChannels, fill);
}

bool Image::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double Image::min() const {
    if (data_.empty()) throw Error(ErrorCode::ZeroDimension, "min of empty image");
    return *std::min_element(data_.begin(), data_.end());
}

double Image::max() const {
    if (data_.empty()) throw Error(ErrorCode::ZeroDimension, "max of empty image");
    return *std::max_element(data_.begin(), data_.end());
}

double Image::mean() const {
    if (data_.empty()) throw Error(ErrorCode::ZeroDimension, "mean of empty image");
    return std::accumulate(data_.begin(), data_.end(), 0.0) / static_cast<double>(data_.size());
}

void require_same_shape(const char* what, const Image& a, const Image& b) {
    if (!a.same_shape(b)) {
        throw Error(ErrorCode::ShapeMismatch,
                    std::string(what) + ": " + std::to_string(a.height()) + "x" +
                        std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                        std::to_string(b.width()));
    }
}

Image clamped(Image img, double lo, double hi) {
    for (double& v : img.values()) v = std::clamp(v, lo, hi);
    return img;
}

FeatureGrid downsample_avg(const Image& img, int patch) {
    if (patch < 1) throw Error(ErrorCode::InvalidArgument, "downsample_avg: patch must be >= 1");
    FeatureGrid grid;
    grid.rows = (img.height() + patch - 1) / patch;
    grid.cols = (img.width() + patch - 1) / patch;
    grid.dim = kChannels;
    grid.data.assign(grid.cells() * kChannels, 0.0);
    for (int r = 0; r < grid.rows; ++r) {
        const int y0 = r * patch;
        const int y1 = std::min(y0 + patch, img.height());
        for (int c = 0; c < grid.cols; ++c) {
            const int x0 = c * patch;
            const int x1 = std::min(x0 + patch, img.width());
            const double count = static_cast<double>((y1 - y0) * (x1 - x0));
            for (int ch = 0; ch < kChannels; ++ch) {
                double sum = 0.0;
                for (int y = y0; y < y1; ++y)
                    for (int x = x0; x < x1; ++x) sum += img.at(y, x, ch);
                grid.at(r, c, ch) = sum / count;
            }
        }
    }
    return grid;
}

unsigned char quantize_u8(double v) noexcept {
    if (!(v == v)) return 0;
    const double q = std::floor(v * 255.0 + 0.5);
    return static_cast<unsigned char>(std::clamp(q, 0.0, 255.0));
}

namespace {

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Unreadable, "cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (in.bad()) throw Error(ErrorCode::Unreadable, "read failed: " + path.string());
    return bytes;
}

Image from_rgb8(const unsigned char* rgb, int height, int width) {
    Image img(height, width);
    for (std::size_t i = 0; i < img.size(); ++i) img[i] = rgb[i] / 255.0;
    return img;
}

// Parses a P6 header token-by-token; comments start with '#'.
class PpmHeader {
public:
    explicit PpmHeader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

    bool next_int(long& out) {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) return false;
        long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_] - '0');
            if (v > (1L << 30)) return false;
            ++pos_;
        }
        out = v;
        return true;
    }

    // Exactly one whitespace byte separates maxval from the raster.
    bool consume_single_space() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) return false;
        ++pos_;
        return true;
    }

    std::size_t pos() const { return pos_; }
    void seek(std::size_t p) { pos_ = p; }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<unsigned char>& bytes_;
    std::size_t pos_ = 0;
};

Image decode_ppm(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
    PpmHeader header(bytes);
    header.seek(2);
    long width = 0, height = 0, maxval = 0;
    if (!header.next_int(width) || !header.next_int(height) || !header.next_int(maxval) ||
        !header.consume_single_space()) {
        throw Error(ErrorCode::UnsupportedFormat, "unsupported format: malformed PPM header in " + path.string());
    }
    if (maxval != 255) {
        throw Error(ErrorCode::UnsupportedFormat, "unsupported format: PPM maxval must be 255 in " + path.string());
    }
    if (width == 0 || height == 0) {
        throw Error(ErrorCode::ZeroDimension, "zero-dimension image: " + path.string());
    }
    const std::size_t need = static_cast<std::size_t>(width) * height * kChannels;
    if (bytes.size() - header.pos() < need) {
        throw Error(ErrorCode::UnsupportedFormat, "unsupported format: truncated PPM raster in " + path.string());
    }
    return from_rgb8(bytes.data() + header.pos(), static_cast<int>(height), static_cast<int>(width));
}

Image decode_png(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
        throw Error(ErrorCode::UnsupportedFormat,
                    "unsupported format: " + path.string() + ": " + png.message);
    }
    if (png.width == 0 || png.height == 0) {
        png_image_free(&png);
        throw Error(ErrorCode::ZeroDimension, "zero-dimension image: " + path.string());
    }
    png.format = PNG_FORMAT_RGB;
    std::vector<unsigned char> rgb(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, rgb.data(), 0, nullptr)) {
        std::string msg = png.message;
        png_image_free(&png);
        throw Error(ErrorCode::UnsupportedFormat, "unsupported format: " + path.string() + ": " + msg);
    }
    return from_rgb8(rgb.data(), static_cast<int>(png.height), static_cast<int>(png.width));
}

std::vector<unsigned char> to_rgb8(const Image& img) {
    std::vector<unsigned char> rgb(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) rgb[i] = quantize_u8(img[i]);
    return rgb;
}

std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return ext;
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
    const auto bytes = read_all(path);
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return decode_ppm(bytes, path);
    static constexpr unsigned char kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (bytes.size() >= 8 && std::equal(kPngMagic, kPngMagic + 8, bytes.begin())) {
        return decode_png(bytes, path);
    }
    throw Error(ErrorCode::UnsupportedFormat, "unsupported format: " + path.string());
}

void write_file_atomic(const std::filesystem::path& path, std::span<const unsigned char> bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorCode::Io, "cannot rename into " + path.string());
    }
}

void save_image(const Image& img, const std::filesystem::path& path) {
    if (img.empty()) throw Error(ErrorCode::ZeroDimension, "cannot save empty image to " + path.string());
    const auto rgb = to_rgb8(img);
    const std::string ext = lower_extension(path);
    std::vector<unsigned char> bytes;
    if (ext == ".ppm") {
        const std::string header =
            "P6\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
        bytes.assign(header.begin(), header.end());
        bytes.insert(bytes.end(), rgb.begin(), rgb.end());
    } else if (ext == ".png") {
        png_image png;
        std::memset(&png, 0, sizeof(png));
        png.version = PNG_IMAGE_VERSION;
        png.width = static_cast<png_uint_32>(img.width());
        png.height = static_cast<png_uint_32>(img.height());
        png.format = PNG_FORMAT_RGB;
        png_alloc_size_t size = 0;
        if (!png_image_write_to_memory(&png, nullptr, &size, 0, rgb.data(), 0, nullptr)) {
            throw Error(ErrorCode::Io, "png encode failed for " + path.string() + ": " + png.message);
        }
        bytes.resize(size);
        if (!png_image_write_to_memory(&png, bytes.data(), &size, 0, rgb.data(), 0, nullptr)) {
            throw Error(ErrorCode::Io, "png encode failed for " + path.string() + ": " + png.message);
        }
        bytes.resize(size);
    } else {
        throw Error(ErrorCode::UnsupportedFormat, "unsupported format: cannot save " + path.string());
    }
    write_file_atomic(path, bytes);
}

}  // namespace drm
