#include "glossmap/png_io.hpp"

#include "glossmap/error.hpp"

#include <png.h>

#include <cstdio>
#include <memory>

namespace glossmap::png {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw IoError(IoErrorCode::open_failed, "cannot open " + path.string());
    return f;
}

void write_png(const std::filesystem::path& path, int width, int height, int bit_depth,
               const std::vector<std::vector<png_byte>>& rows) {
    FilePtr file = open(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError(IoErrorCode::write_failed, "libpng write init failed");
    png_infop info = png_create_info_struct(png);
    if (!info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError(IoErrorCode::write_failed, "PNG encoding failed for " + path.string());
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (const auto& row : rows) png_write_row(png, row.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

void write_gray8(const std::filesystem::path& path, const specrender::Image8& image) {
    if (image.pixels.size() != static_cast<std::size_t>(image.width) * image.height || image.width <= 0)
        throw DomainError("image buffer does not match its dimensions");
    std::vector<std::vector<png_byte>> rows(static_cast<std::size_t>(image.height));
    for (int y = 0; y < image.height; ++y)
        rows[y].assign(image.pixels.begin() + static_cast<std::ptrdiff_t>(y) * image.width,
                       image.pixels.begin() + static_cast<std::ptrdiff_t>(y + 1) * image.width);
    write_png(path, image.width, image.height, 8, rows);
}

void write_mask(const std::filesystem::path& path, const std::vector<std::uint8_t>& mask, int width, int height) {
    if (mask.size() != static_cast<std::size_t>(width) * height || width <= 0)
        throw DomainError("mask buffer does not match its dimensions");
    std::vector<std::vector<png_byte>> rows(static_cast<std::size_t>(height),
                                            std::vector<png_byte>(static_cast<std::size_t>((width + 7) / 8), 0));
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            if (mask[static_cast<std::size_t>(y) * width + x]) rows[y][x / 8] |= static_cast<png_byte>(0x80 >> (x % 8));
    write_png(path, width, height, 1, rows);
}

specrender::Image8 read_gray8(const std::filesystem::path& path) {
    FilePtr file = open(path, "rb");
    png_byte sig[8] = {};
    if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw IoError(IoErrorCode::unknown_container, path.string() + " is not a PNG file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError(IoErrorCode::corrupt_header, "libpng read init failed");
    png_infop info = png_create_info_struct(png);
    specrender::Image8 image;
    std::vector<png_bytep> rows;
    if (!info || setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError(IoErrorCode::corrupt_data, "PNG decoding failed for " + path.string());
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const png_byte color = png_get_color_type(png, info);
    const png_byte depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (depth == 16) png_set_strip_16(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA || color == PNG_COLOR_TYPE_PALETTE)
        png_set_rgb_to_gray_fixed(png, 1, 21260, 71520);
    png_read_update_info(png, info);

    image.width = static_cast<int>(png_get_image_width(png, info));
    image.height = static_cast<int>(png_get_image_height(png, info));
    image.pixels.resize(static_cast<std::size_t>(image.width) * image.height);
    rows.resize(static_cast<std::size_t>(image.height));
    for (int y = 0; y < image.height; ++y) rows[y] = image.pixels.data() + static_cast<std::size_t>(y) * image.width;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return image;
}

std::vector<std::uint8_t> read_mask(const std::filesystem::path& path, int& width, int& height) {
    specrender::Image8 image = read_gray8(path);
    width = image.width;
    height = image.height;
    for (auto& v : image.pixels) v = v != 0 ? 1 : 0;
    return std::move(image.pixels);
}

}  // namespace glossmap::png
