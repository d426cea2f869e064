#include "glossmap/envmap.hpp"

#include "glossmap/error.hpp"
#include "glossmap/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace glossmap::envmap {

namespace {

constexpr double kPi = std::numbers::pi;

int wrap(int i, int n) {
    const int r = i % n;
    return r < 0 ? r + n : r;
}

}  // namespace

void check_aspect(int width, int height) {
    if (height < 1 || width != 2 * height)
        throw DomainError("equirectangular map must be 2:1, got " + std::to_string(width) + "x" +
                          std::to_string(height));
}

EquirectMap::EquirectMap(int width, int height) : width_(width), height_(height) {
    check_aspect(width, height);
    pixels_.assign(static_cast<std::size_t>(width) * height * 3, 0.0);
}

EquirectMap::EquirectMap(int width, int height, std::vector<double> rgb)
    : width_(width), height_(height), pixels_(std::move(rgb)) {
    check_aspect(width, height);
    if (pixels_.size() != static_cast<std::size_t>(width) * height * 3)
        throw DomainError("pixel buffer size does not match map dimensions");
    for (double v : pixels_)
        if (!std::isfinite(v)) throw DomainError("map values must be finite");
}

EquirectMap EquirectMap::constant(int width, int height, double value) {
    if (!std::isfinite(value)) throw DomainError("map values must be finite");
    return EquirectMap(width, height, std::vector<double>(static_cast<std::size_t>(width) * height * 3, value));
}

Rgb EquirectMap::rgb(int row, int col) const {
    const std::size_t i = index(row, col);
    return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
}

void EquirectMap::set(int row, int col, const Rgb& value) {
    const std::size_t i = index(row, col);
    pixels_[i] = value[0];
    pixels_[i + 1] = value[1];
    pixels_[i + 2] = value[2];
}

double EquirectMap::luminance_at(int row, int col) const {
    const std::size_t i = index(row, col);
    return luminance(pixels_[i], pixels_[i + 1], pixels_[i + 2]);
}

double EquirectMap::theta(int row) const { return kPi * (row + 0.5) / height_; }
double EquirectMap::phi(int col) const { return 2.0 * kPi * (col + 0.5) / width_; }

Vec3 EquirectMap::direction(int row, int col) const { return direction_of(theta(row), phi(col)); }

bool EquirectMap::has_negative() const {
    return std::any_of(pixels_.begin(), pixels_.end(), [](double v) { return v < 0.0; });
}

bool operator==(const EquirectMap& a, const EquirectMap& b) {
    return a.width() == b.width() && a.height() == b.height() &&
           std::equal(a.data().begin(), a.data().end(), b.data().begin(), b.data().end());
}

std::array<double, 2> spherical_of(const Vec3& dir) {
    const double len = std::sqrt(dir.x * dir.x + dir.y * dir.y + dir.z * dir.z);
    const double z = std::clamp(dir.z / len, -1.0, 1.0);
    double phi = std::atan2(dir.y, dir.x);
    if (phi < 0.0) phi += 2.0 * kPi;
    if (phi >= 2.0 * kPi) phi = 0.0;
    return {std::acos(z), phi};
}

Vec3 direction_of(double theta, double phi) {
    const double s = std::sin(theta);
    return {s * std::cos(phi), s * std::sin(phi), std::cos(theta)};
}

Rgb sample_bilinear(const EquirectMap& map, const Vec3& dir) {
    const auto [theta, phi] = spherical_of(dir);
    const double fy = theta / kPi * map.height() - 0.5;
    const double fx = phi / (2.0 * kPi) * map.width() - 0.5;
    const int y0 = static_cast<int>(std::floor(fy));
    const int x0 = static_cast<int>(std::floor(fx));
    const double ty = fy - y0;
    const double tx = fx - x0;

    const int ya = std::clamp(y0, 0, map.height() - 1);
    const int yb = std::clamp(y0 + 1, 0, map.height() - 1);
    const int xa = wrap(x0, map.width());
    const int xb = wrap(x0 + 1, map.width());

    Rgb out{};
    for (int c = 0; c < 3; ++c) {
        const double top = (1.0 - tx) * map.at(ya, xa, c) + tx * map.at(ya, xb, c);
        const double bottom = (1.0 - tx) * map.at(yb, xa, c) + tx * map.at(yb, xb, c);
        out[c] = (1.0 - ty) * top + ty * bottom;
    }
    return out;
}

Rgb sample_nearest(const EquirectMap& map, const Vec3& dir) {
    const auto [theta, phi] = spherical_of(dir);
    const int row = std::clamp(static_cast<int>(theta / kPi * map.height()), 0, map.height() - 1);
    const int col = wrap(static_cast<int>(phi / (2.0 * kPi) * map.width()), map.width());
    return map.rgb(row, col);
}

EquirectMap scale_intensity(const EquirectMap& map, double factor) {
    if (!(factor > 0.0) || !std::isfinite(factor)) throw DomainError("intensity factor must be > 0");
    EquirectMap out = map;
    for (double& v : out.data()) v *= factor;
    return out;
}

EquirectMap desaturate(const EquirectMap& map) {
    EquirectMap out = map;
    auto px = out.data();
    for (std::size_t i = 0; i < px.size(); i += 3) {
        const double y = luminance(px[i], px[i + 1], px[i + 2]);
        px[i] = px[i + 1] = px[i + 2] = y;
    }
    return out;
}

EquirectMap rotate_azimuth(const EquirectMap& map, int columns) {
    EquirectMap out(map.width(), map.height());
    for (int r = 0; r < map.height(); ++r)
        for (int c = 0; c < map.width(); ++c) out.set(r, wrap(c + columns, map.width()), map.rgb(r, c));
    return out;
}

EquirectMap downsample(const EquirectMap& map, int factor) {
    if (factor < 1 || map.height() % factor != 0)
        throw DomainError("downsample factor must divide the map height");
    EquirectMap out(map.width() / factor, map.height() / factor);
    const double norm = 1.0 / (static_cast<double>(factor) * factor);
    for (int r = 0; r < out.height(); ++r)
        for (int c = 0; c < out.width(); ++c)
            for (int ch = 0; ch < 3; ++ch) {
                double sum = 0.0;
                for (int dy = 0; dy < factor; ++dy)
                    for (int dx = 0; dx < factor; ++dx) sum += map.at(r * factor + dy, c * factor + dx, ch);
                out.at(r, c, ch) = sum * norm;
            }
    return out;
}

EquirectMap clamp_negative(const EquirectMap& map) {
    EquirectMap out = map;
    for (double& v : out.data()) v = std::max(v, 0.0);
    return out;
}

double rescale_width(double width_at_reference, int map_width, int reference_width) {
    if (!(width_at_reference > 0.0) || map_width <= 0 || reference_width <= 0)
        throw DomainError("filter width and resolutions must be positive");
    return width_at_reference * static_cast<double>(map_width) / reference_width;
}

std::vector<double> gaussian_kernel(double width_px, const BlurOptions& options) {
    if (!(width_px > 0.0) || !std::isfinite(width_px)) throw DomainError("blur width must be > 0");
    if (!(options.sigma_per_width > 0.0)) throw DomainError("sigma_per_width must be > 0");
    const double sigma = width_px * options.sigma_per_width;
    const int radius = static_cast<int>(std::floor(3.0 * sigma));
    std::vector<double> taps(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double w = std::exp(-0.5 * (i * i) / (sigma * sigma));
        taps[i + radius] = w;
        sum += w;
    }
    for (double& w : taps) w /= sum;
    return taps;
}

EquirectMap gaussian_blur(const EquirectMap& map, double width_px, const BlurOptions& options) {
    const std::vector<double> taps = gaussian_kernel(width_px, options);
    const int radius = static_cast<int>(taps.size() / 2);
    const int w = map.width();
    const int h = map.height();

    EquirectMap horizontal(w, h);
    parallel_for(static_cast<std::size_t>(h), [&](std::size_t row_index) {
        const int r = static_cast<int>(row_index);
        for (int c = 0; c < w; ++c)
            for (int ch = 0; ch < 3; ++ch) {
                double sum = 0.0;
                for (int k = -radius; k <= radius; ++k) sum += taps[k + radius] * map.at(r, wrap(c + k, w), ch);
                horizontal.at(r, c, ch) = sum;
            }
    });

    EquirectMap out(w, h);
    parallel_for(static_cast<std::size_t>(h), [&](std::size_t row_index) {
        const int r = static_cast<int>(row_index);
        for (int c = 0; c < w; ++c)
            for (int ch = 0; ch < 3; ++ch) {
                double sum = 0.0;
                for (int k = -radius; k <= radius; ++k)
                    sum += taps[k + radius] * horizontal.at(std::clamp(r + k, 0, h - 1), c, ch);
                out.at(r, c, ch) = sum;
            }
    });
    return out;
}

EquirectMap low_pass(const EquirectMap& map, double width_px, const BlurOptions& options) {
    return gaussian_blur(map, width_px, options);
}

EquirectMap high_pass(const EquirectMap& map, double width_px, const BlurOptions& options) {
    const EquirectMap blurred = gaussian_blur(map, width_px, options);
    EquirectMap out = map;
    auto dst = out.data();
    auto src = blurred.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= src[i];
    return out;
}

}  // namespace glossmap::envmap
