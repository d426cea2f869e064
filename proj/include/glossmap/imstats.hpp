#pragma once

#include "glossmap/specrender.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace glossmap::imstats {

inline constexpr int kDefaultThreshold = 50;

struct CoverageResult {
    double coverage = 0.0;
    int threshold = kDefaultThreshold;
    std::size_t object_pixels = 0;
    std::size_t above_pixels = 0;
};

/// Fraction of object pixels strictly brighter than `threshold` (8-bit).
/// Throws DomainError for an empty mask or mismatched sizes.
CoverageResult specular_coverage(std::span<const std::uint8_t> pixels, std::span<const std::uint8_t> mask,
                                 int threshold = kDefaultThreshold);
CoverageResult specular_coverage(const specrender::Stimulus& stimulus, int threshold = kDefaultThreshold);

/// Mean 8-bit intensity over object pixels.
double mean_intensity(std::span<const std::uint8_t> pixels, std::span<const std::uint8_t> mask);
double mean_intensity(const specrender::Stimulus& stimulus);

/// Fallback for images without a mask: every pixel not equal to the
/// background gray is treated as object.
std::vector<std::uint8_t> mask_from_background(std::span<const std::uint8_t> pixels,
                                               std::uint8_t background = specrender::kBackgroundGray);

}  // namespace glossmap::imstats
