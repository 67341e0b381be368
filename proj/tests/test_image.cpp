#include <doctest.h>

#include <fstream>
#include <iterator>

#include "drm/image.hpp"
#include "helpers.hpp"

using namespace drm;
using testing::TempDir;

namespace {

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    out << bytes;
}

std::string read_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

ErrorCode load_error(const std::filesystem::path& p) {
    try {
        (void)load_image(p);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("load_image did not throw");
    return ErrorCode::Io;
}

}  // namespace

TEST_CASE("1x1 red PPM loads as (1, 0, 0)") {
    TempDir dir("img");
    write_bytes(dir / "red.ppm", std::string("P6\n1 1\n255\n") + '\xff' + '\0' + '\0');
    const Image img = load_image(dir / "red.ppm");
    REQUIRE(img.height() == 1);
    REQUIRE(img.width() == 1);
    CHECK(img.at(0, 0, 0) == 1.0);
    CHECK(img.at(0, 0, 1) == 0.0);
    CHECK(img.at(0, 0, 2) == 0.0);
}

TEST_CASE("PPM header comments are skipped") {
    TempDir dir("img");
    write_bytes(dir / "c.ppm", std::string("P6 # a comment\n2 # width\n1\n255\n") + std::string(6, '\x80'));
    const Image img = load_image(dir / "c.ppm");
    CHECK(img.width() == 2);
    CHECK(img.at(0, 1, 2) == doctest::Approx(128.0 / 255.0));
}

TEST_CASE("malformed inputs map to distinct errors") {
    TempDir dir("img");
    write_bytes(dir / "trunc.ppm", "P6\n4 4");
    CHECK(load_error(dir / "trunc.ppm") == ErrorCode::UnsupportedFormat);
    write_bytes(dir / "short.ppm", std::string("P6\n2 2\n255\n") + "abc");
    CHECK(load_error(dir / "short.ppm") == ErrorCode::UnsupportedFormat);
    write_bytes(dir / "zero.ppm", "P6\n0 3\n255\n");
    CHECK(load_error(dir / "zero.ppm") == ErrorCode::ZeroDimension);
    write_bytes(dir / "deep.ppm", "P6\n1 1\n65535\n\0\0\0\0\0\0");
    CHECK(load_error(dir / "deep.ppm") == ErrorCode::UnsupportedFormat);
    write_bytes(dir / "junk.png", "definitely not a png");
    CHECK(load_error(dir / "junk.png") == ErrorCode::UnsupportedFormat);
    CHECK(load_error(dir / "missing.png") == ErrorCode::Unreadable);
}

TEST_CASE("constant 0.5 saves as byte 128") {
    TempDir dir("img");
    save_image(Image(3, 2, 0.5), dir / "half.ppm");
    const std::string bytes = read_bytes(dir / "half.ppm");
    const std::string header = "P6\n2 3\n255\n";
    REQUIRE(bytes.size() == header.size() + 18);
    for (std::size_t i = header.size(); i < bytes.size(); ++i) CHECK(static_cast<unsigned char>(bytes[i]) == 128);
}

TEST_CASE("quantization rounds half up and clamps") {
    CHECK(quantize_u8(0.5) == 128);
    CHECK(quantize_u8(-0.3) == 0);
    CHECK(quantize_u8(1.7) == 255);
    CHECK(quantize_u8(1.0 / 255.0) == 1);
}

TEST_CASE("save/load round trip is within one quantization step") {
    TempDir dir("img");
    const Image x = testing::random_image(13, 17, 5);
    for (const char* name : {"x.png", "x.ppm"}) {
        save_image(x, dir / name);
        const Image y = load_image(dir / name);
        REQUIRE(y.same_shape(x));
        CHECK(testing::max_abs_diff(x, y) <= 1.0 / 255.0);
        for (double v : y.values()) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("re-saving a loaded P6 file is byte identical") {
    TempDir dir("img");
    save_image(testing::random_image(9, 4, 11), dir / "a.ppm");
    save_image(load_image(dir / "a.ppm"), dir / "b.ppm");
    CHECK(read_bytes(dir / "a.ppm") == read_bytes(dir / "b.ppm"));
}

TEST_CASE("PNG and PPM encode the same pixels") {
    TempDir dir("img");
    const Image x = testing::random_image(6, 7, 3);
    save_image(x, dir / "x.png");
    save_image(x, dir / "x.ppm");
    CHECK(load_image(dir / "x.png") == load_image(dir / "x.ppm"));
}

TEST_CASE("saving into a missing directory is an I/O error") {
    TempDir dir("img");
    try {
        save_image(Image(2, 2, 0.1), dir / "nope" / "x.png");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Io);
    }
    CHECK_THROWS_AS(save_image(Image(2, 2), dir / "x.bmp"), Error);
}

TEST_CASE("downsample_avg") {
    SUBCASE("constant image gives its value") {
        const FeatureGrid g = downsample_avg(Image(16, 16, 0.3), 16);
        REQUIRE(g.rows == 1);
        REQUIRE(g.cols == 1);
        for (int c = 0; c < 3; ++c) CHECK(g.at(0, 0, c) == doctest::Approx(0.3).epsilon(1e-12));
    }
    SUBCASE("2x2 mean") {
        Image img(2, 2);
        img.at(1, 0, 0) = 1.0;
        img.at(1, 1, 0) = 1.0;
        CHECK(downsample_avg(img, 2).at(0, 0, 0) == 0.5);
    }
    SUBCASE("ceil rule with truncated edge patches") {
        Image img(17, 17, 0.2);
        for (int c = 0; c < 3; ++c) img.at(16, 16, c) = 0.9;
        const FeatureGrid g = downsample_avg(img, 16);
        CHECK(g.rows == 2);
        CHECK(g.cols == 2);
        CHECK(g.at(1, 1, 0) == doctest::Approx(0.9));
        CHECK(g.at(0, 1, 0) == doctest::Approx(0.2));
    }
    SUBCASE("patch must be positive") {
        CHECK_THROWS_AS(downsample_avg(Image(4, 4), 0), Error);
    }
}

TEST_CASE("shape checks and clamping") {
    CHECK_THROWS_AS(require_same_shape("t", Image(2, 3), Image(3, 2)), Error);
    CHECK_NOTHROW(require_same_shape("t", Image(2, 3), Image(2, 3)));
    Image img(1, 1);
    img[0] = -1;
    img[1] = 0.5;
    img[2] = 4;
    const Image c = clamped(img, 0, 1);
    CHECK(c[0] == 0.0);
    CHECK(c[1] == 0.5);
    CHECK(c[2] == 1.0);
    img[1] = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(img.all_finite());
}
