#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

namespace glossmap::envmap {

using Rgb = std::array<double, 3>;

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

/// Rec.709 luma.
inline double luminance(double r, double g, double b) { return 0.2126 * r + 0.7152 * g + 0.0722 * b; }

/// Linear-radiance equirectangular panorama, width = 2 * height.
///
/// Row 0 is the zenith (theta = 0) and column 0 sits at azimuth phi = 0. Pixel
/// centers are at theta = pi (i + 0.5) / height, phi = 2 pi (j + 0.5) / width.
/// Direction convention: (sin t cos p, sin t sin p, cos t), +z up.
///
/// Values must be finite. Loaded and user-built maps are non-negative; a
/// high-pass result is the one place signed values are kept.
class EquirectMap {
public:
    EquirectMap() = default;
    /// Black map.
    EquirectMap(int width, int height);
    /// Takes interleaved RGB rows. Throws DomainError on bad aspect, size or non-finite data.
    EquirectMap(int width, int height, std::vector<double> rgb);

    static EquirectMap constant(int width, int height, double value);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return pixels_.empty(); }

    std::span<const double> data() const noexcept { return pixels_; }
    std::span<double> data() noexcept { return pixels_; }

    double& at(int row, int col, int channel) { return pixels_[index(row, col) + channel]; }
    double at(int row, int col, int channel) const { return pixels_[index(row, col) + channel]; }
    Rgb rgb(int row, int col) const;
    void set(int row, int col, const Rgb& value);
    double luminance_at(int row, int col) const;

    double theta(int row) const;
    double phi(int col) const;
    Vec3 direction(int row, int col) const;

    bool has_negative() const;

private:
    std::size_t index(int row, int col) const {
        return (static_cast<std::size_t>(row) * width_ + col) * 3;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> pixels_;
};

bool operator==(const EquirectMap& a, const EquirectMap& b);

/// Throws DomainError unless width == 2 * height and height >= 1.
void check_aspect(int width, int height);

/// Unit direction -> continuous (theta, phi) with phi in [0, 2 pi).
std::array<double, 2> spherical_of(const Vec3& dir);
Vec3 direction_of(double theta, double phi);

/// Bilinear lookup with azimuthal wrap and polar clamp.
Rgb sample_bilinear(const EquirectMap& map, const Vec3& dir);
Rgb sample_nearest(const EquirectMap& map, const Vec3& dir);

// -- Point operations -------------------------------------------------------

EquirectMap scale_intensity(const EquirectMap& map, double factor);
/// Replaces every pixel by its Rec.709 luma on all three channels.
EquirectMap desaturate(const EquirectMap& map);
/// Shifts the map by whole columns along azimuth (rotation about the polar axis).
EquirectMap rotate_azimuth(const EquirectMap& map, int columns);
/// Box-filter downsampling by an integer factor that divides both dimensions.
EquirectMap downsample(const EquirectMap& map, int factor);
/// Copy with negatives clamped to 0.
EquirectMap clamp_negative(const EquirectMap& map);

// -- Gaussian filtering -----------------------------------------------------

/// Reference resolution the named filter widths were quoted at.
inline constexpr int kReferenceWidth = 4800;

struct BlurOptions {
    /// sigma = width * sigma_per_width; the default makes +-3 sigma span the width.
    double sigma_per_width = 1.0 / 6.0;
};

/// Rescales a width quoted at reference_width pixels to a map that is map_width wide.
double rescale_width(double width_at_reference, int map_width, int reference_width = kReferenceWidth);

/// Normalized 1-D Gaussian taps for offsets -radius..radius.
std::vector<double> gaussian_kernel(double width_px, const BlurOptions& options = {});

/// Separable planar Gaussian on the equirect grid: wraps horizontally, clamps at the poles.
EquirectMap gaussian_blur(const EquirectMap& map, double width_px, const BlurOptions& options = {});
EquirectMap low_pass(const EquirectMap& map, double width_px, const BlurOptions& options = {});
/// map - gaussian_blur(map); keeps signed values.
EquirectMap high_pass(const EquirectMap& map, double width_px, const BlurOptions& options = {});

// -- Container I/O ----------------------------------------------------------

enum class Container { rgbe, pfm };

/// Picks the container from the file magic. Throws IoError.
EquirectMap load(const std::filesystem::path& path);
/// Picks the container from the extension (.hdr/.pic/.rgbe or .pfm).
/// Negative values are written as 0.
void save(const EquirectMap& map, const std::filesystem::path& path);
void save(const EquirectMap& map, const std::filesystem::path& path, Container container);

}  // namespace glossmap::envmap
