#include "glossmap/synthetic.hpp"

#include "glossmap/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace glossmap::synthetic {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

void check_width(int width) {
    if (width < 4 || width % 2 != 0) throw DomainError("synthetic map width must be even and >= 4");
}

double dot(const envmap::Vec3& a, const envmap::Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

}  // namespace

envmap::EquirectMap sparse(int width, const std::vector<Source>& sources, double ambient) {
    check_width(width);
    envmap::EquirectMap map = envmap::EquirectMap::constant(width, width / 2, ambient);
    for (const Source& s : sources) {
        const envmap::Vec3 center = envmap::direction_of(s.theta_deg * kDeg, s.phi_deg * kDeg);
        const double cos_radius = std::cos(s.radius_deg * kDeg);
        // Half-degree linear edge so the disk is resolvable at any resolution.
        const double cos_outer = std::cos((s.radius_deg + 0.5) * kDeg);
        for (int r = 0; r < map.height(); ++r)
            for (int c = 0; c < map.width(); ++c) {
                const double cosang = dot(map.direction(r, c), center);
                if (cosang <= cos_outer) continue;
                const double t = cosang >= cos_radius ? 1.0 : (cosang - cos_outer) / (cos_radius - cos_outer);
                for (int ch = 0; ch < 3; ++ch) map.at(r, c, ch) += t * s.radiance;
            }
    }
    return map;
}

envmap::EquirectMap sparse(int width) {
    static const std::vector<Source> defaults = {
        {40.0, 15.0, 4.0, 40.0},
        {60.0, 140.0, 3.0, 30.0},
        {30.0, 230.0, 5.0, 25.0},
        {75.0, 300.0, 3.0, 35.0},
    };
    return sparse(width, defaults, 0.01);
}

envmap::EquirectMap broad(int width) {
    check_width(width);
    envmap::EquirectMap map(width, width / 2);
    for (int r = 0; r < map.height(); ++r) {
        const double elevation = std::cos(map.theta(r));  // +1 zenith, -1 nadir
        // Smoothstep from ground (0.35) to sky (1.0) across +-15 degrees of the horizon.
        const double t = std::clamp((elevation + 0.26) / 0.52, 0.0, 1.0);
        const double blend = t * t * (3.0 - 2.0 * t);
        const double sky = 0.8 + 0.2 * std::max(elevation, 0.0);
        const double value = 0.35 + blend * (sky - 0.35);
        for (int c = 0; c < map.width(); ++c) map.set(r, c, {value, value, value});
    }
    return map;
}

envmap::EquirectMap single_texel(int width, int row, int col, double radiance) {
    check_width(width);
    envmap::EquirectMap map(width, width / 2);
    if (row < 0 || row >= map.height() || col < 0 || col >= map.width())
        throw DomainError("texel lies outside the map");
    map.set(row, col, {radiance, radiance, radiance});
    return map;
}

envmap::EquirectMap noise(int width, unsigned seed, double lo, double hi) {
    check_width(width);
    if (!(hi > lo)) throw DomainError("noise range must be non-empty");
    std::mt19937_64 rng(seed);
    std::vector<double> rgb(static_cast<std::size_t>(width) * (width / 2) * 3);
    // Map raw 53-bit draws directly so results do not depend on the library's distributions.
    for (double& v : rgb) v = lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return envmap::EquirectMap(width, width / 2, std::move(rgb));
}

envmap::EquirectMap by_name(const std::string& kind, int width, unsigned seed) {
    if (kind == "sparse") return sparse(width);
    if (kind == "broad") return broad(width);
    if (kind == "constant") return envmap::EquirectMap::constant(width, width / 2, 1.0);
    if (kind == "noise") return noise(width, seed);
    throw DomainError("unknown synthetic map kind '" + kind + "'");
}

}  // namespace glossmap::synthetic
