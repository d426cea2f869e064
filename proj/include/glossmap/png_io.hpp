#pragma once

#include "glossmap/specrender.hpp"

#include <filesystem>

namespace glossmap::png {

/// 8-bit grayscale PNG.
void write_gray8(const std::filesystem::path& path, const specrender::Image8& image);

/// 1-bit grayscale PNG; nonzero mask entries are written white.
void write_mask(const std::filesystem::path& path, const std::vector<std::uint8_t>& mask, int width, int height);

/// Reads any PNG as 8-bit grayscale. Color images are reduced with Rec.709
/// luma, alpha is dropped and low bit depths are expanded to 0..255.
specrender::Image8 read_gray8(const std::filesystem::path& path);

/// Reads a mask PNG: nonzero pixels are object pixels (1), zero is background.
std::vector<std::uint8_t> read_mask(const std::filesystem::path& path, int& width, int& height);

}  // namespace glossmap::png
