#include "glossmap/imstats.hpp"

#include "glossmap/error.hpp"

namespace glossmap::imstats {

namespace {

void check(std::span<const std::uint8_t> pixels, std::span<const std::uint8_t> mask) {
    if (pixels.size() != mask.size()) throw DomainError("image and mask sizes differ");
}

}  // namespace

CoverageResult specular_coverage(std::span<const std::uint8_t> pixels, std::span<const std::uint8_t> mask,
                                 int threshold) {
    check(pixels, mask);
    if (threshold < 0 || threshold > 255) throw DomainError("threshold must lie in [0, 255]");
    CoverageResult out;
    out.threshold = threshold;
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        if (!mask[i]) continue;
        ++out.object_pixels;
        if (pixels[i] > threshold) ++out.above_pixels;
    }
    if (out.object_pixels == 0) throw DomainError("coverage needs at least one object pixel");
    out.coverage = static_cast<double>(out.above_pixels) / static_cast<double>(out.object_pixels);
    return out;
}

CoverageResult specular_coverage(const specrender::Stimulus& stimulus, int threshold) {
    return specular_coverage(stimulus.image.pixels, stimulus.mask, threshold);
}

double mean_intensity(std::span<const std::uint8_t> pixels, std::span<const std::uint8_t> mask) {
    check(pixels, mask);
    std::size_t count = 0;
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < pixels.size(); ++i)
        if (mask[i]) {
            ++count;
            sum += pixels[i];
        }
    if (count == 0) throw DomainError("mean intensity needs at least one object pixel");
    return static_cast<double>(sum) / static_cast<double>(count);
}

double mean_intensity(const specrender::Stimulus& stimulus) {
    return mean_intensity(stimulus.image.pixels, stimulus.mask);
}

std::vector<std::uint8_t> mask_from_background(std::span<const std::uint8_t> pixels, std::uint8_t background) {
    std::vector<std::uint8_t> mask(pixels.size());
    for (std::size_t i = 0; i < pixels.size(); ++i) mask[i] = pixels[i] != background ? 1 : 0;
    return mask;
}

}  // namespace glossmap::imstats
