#include "glossmap/error.hpp"
#include "glossmap/imstats.hpp"
#include "glossmap/png_io.hpp"

#include "support.hpp"

#include <doctest.h>

#include <png.h>

#include <cstdio>

using namespace glossmap;
using namespace glossmap::imstats;

TEST_CASE("half-bright object covers exactly half") {
    std::vector<std::uint8_t> px(100, 0), mask(100, 1);
    for (int i = 0; i < 50; ++i) px[i] = 200;
    const CoverageResult c = specular_coverage(px, mask);
    CHECK(c.coverage == 0.5);
    CHECK(c.object_pixels == 100);
    CHECK(c.above_pixels == 50);
}

TEST_CASE("threshold is strict and background is ignored") {
    const std::vector<std::uint8_t> px = {50, 51, 255, 0, 255, 255};
    const std::vector<std::uint8_t> mask = {1, 1, 1, 1, 0, 0};
    CHECK(specular_coverage(px, mask, 50).coverage == 0.5);
    CHECK(specular_coverage(px, mask, 49).coverage == 0.75);
    CHECK(specular_coverage(std::vector<std::uint8_t>(4, 254), std::vector<std::uint8_t>(4, 1)).coverage == 1.0);
}

TEST_CASE("coverage is non-increasing in the threshold") {
    std::vector<std::uint8_t> px(256), mask(256, 1);
    for (int i = 0; i < 256; ++i) px[i] = static_cast<std::uint8_t>((i * 37) % 256);
    double prev = 2.0;
    for (int t = 0; t <= 255; ++t) {
        const double c = specular_coverage(px, mask, t).coverage;
        CHECK(c <= prev);
        prev = c;
    }
    CHECK(prev == 0.0);
}

TEST_CASE("mean intensity over the object") {
    const std::vector<std::uint8_t> px = {10, 20, 30, 100};
    const std::vector<std::uint8_t> mask = {1, 1, 1, 0};
    CHECK(mean_intensity(px, mask) == doctest::Approx(20.0));
}

TEST_CASE("empty masks and size mismatches are rejected") {
    const std::vector<std::uint8_t> px(4, 0);
    CHECK_THROWS_AS(specular_coverage(px, std::vector<std::uint8_t>(4, 0)), DomainError);
    CHECK_THROWS_AS(specular_coverage(px, std::vector<std::uint8_t>(3, 1)), DomainError);
    CHECK_THROWS_AS(mean_intensity(px, std::vector<std::uint8_t>(4, 0)), DomainError);
}

TEST_CASE("background heuristic") {
    const std::vector<std::uint8_t> px = {100, 101, 0, 100};
    CHECK(mask_from_background(px) == std::vector<std::uint8_t>{0, 1, 1, 0});
}

TEST_CASE("PNG stimulus and mask round trip") {
    testing::TempDir dir("png");
    specrender::Image8 img{5, 3, {}};
    std::vector<std::uint8_t> mask;
    for (int i = 0; i < 15; ++i) {
        img.pixels.push_back(static_cast<std::uint8_t>(i * 17));
        mask.push_back(static_cast<std::uint8_t>(i % 3 != 0));
    }
    png::write_gray8(dir / "img.png", img);
    png::write_mask(dir / "mask.png", mask, 5, 3);
    const auto back = png::read_gray8(dir / "img.png");
    CHECK(back.width == 5);
    CHECK(back.height == 3);
    CHECK(back.pixels == img.pixels);
    int w = 0, h = 0;
    CHECK(png::read_mask(dir / "mask.png", w, h) == mask);
    CHECK(w == 5);
}

TEST_CASE("RGB PNGs are reduced to gray") {
    testing::TempDir dir("png_rgb");
    const auto path = dir / "rgb.png";
    // Written with libpng directly: one pure-white and one pure-green pixel.
    FILE* fp = std::fopen(path.c_str(), "wb");
    REQUIRE(fp);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    png_init_io(png, fp);
    png_set_IHDR(png, info, 2, 1, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_byte row[6] = {255, 255, 255, 0, 255, 0};
    png_write_row(png, row);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);

    const auto gray = png::read_gray8(path);
    CHECK(gray.pixels[0] == 255);
    CHECK(std::abs(static_cast<int>(gray.pixels[1]) - 182) <= 1);  // 0.7152 * 255
}

TEST_CASE("unreadable PNGs raise IoError") {
    testing::TempDir dir("png_bad");
    CHECK_THROWS_AS(png::read_gray8(dir / "missing.png"), IoError);
    std::FILE* f = std::fopen((dir / "junk.png").c_str(), "wb");
    std::fputs("not a png", f);
    std::fclose(f);
    CHECK_THROWS_AS(png::read_gray8(dir / "junk.png"), IoError);
}
