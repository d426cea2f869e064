#pragma once

#include "glossmap/envmap.hpp"

#include <vector>

namespace glossmap::sphharm {

/// Flat index of (l, m) in an ShSpectrum: l^2 + l + m.
constexpr int sh_index(int l, int m) { return l * l + l + m; }
constexpr int coefficient_count(int max_order) { return (max_order + 1) * (max_order + 1); }

/// Real orthonormal spherical harmonic Y_lm (Condon-Shortley phase included).
/// m > 0 uses cos(m phi), m < 0 uses sin(|m| phi).
double real_sh(int l, int m, double theta, double phi);

/// Evaluates every Y_lm for l <= max_order at one direction, indexed by sh_index.
void real_sh_all(int max_order, double theta, double phi, std::vector<double>& out);

/// Real SH coefficients of the map luminance, c_lm, l = 0..max_order.
class ShSpectrum {
public:
    ShSpectrum() = default;
    explicit ShSpectrum(int max_order);
    ShSpectrum(int max_order, std::vector<double> coeffs);

    int max_order() const noexcept { return max_order_; }
    double operator()(int l, int m) const { return coeffs_[sh_index(l, m)]; }
    double& operator()(int l, int m) { return coeffs_[sh_index(l, m)]; }
    const std::vector<double>& coeffs() const noexcept { return coeffs_; }

private:
    int max_order_ = 0;
    std::vector<double> coeffs_;
};

/// Latitude weights used by the projection quadrature.
enum class Quadrature {
    /// Fejer's first rule on the pixel-center latitudes: integrates products of
    /// band-limited functions exactly for l + l' < height.
    fejer,
    /// sin(theta) * pi / height per row (plain midpoint rule).
    midpoint,
};

/// Per-row solid-angle weight (excluding the 2 pi / width azimuth factor).
std::vector<double> latitude_weights(int height, Quadrature rule);

/// c_lm = sum over pixels of luminance * Y_lm * dOmega.
/// Throws DomainError for maps smaller than 4x2 or negative max_order.
ShSpectrum project(const envmap::EquirectMap& map, int max_order, Quadrature rule = Quadrature::fejer);

/// Grayscale map evaluating sum c_lm Y_lm at each pixel center.
envmap::EquirectMap reconstruct(const ShSpectrum& spectrum, int width, int height);

enum class PowerMode {
    rms,              ///< sqrt(sum_m c_lm^2 / (2l + 1))
    sum_of_squares,   ///< sum_m c_lm^2, for sensitivity checks
};

/// Power per order, index l = 0..max_order.
struct OrderPowers {
    std::vector<double> powers;
    int max_order() const noexcept { return static_cast<int>(powers.size()) - 1; }
};

OrderPowers order_powers(const ShSpectrum& spectrum, PowerMode mode = PowerMode::rms);

/// Order the brilliance sum must reach.
inline constexpr int kBrillianceOrder = 30;

/// P1 / P0. Throws NumericError when P0 == 0.
double diffuseness(const OrderPowers& p);
/// sum_{l>=3} P_l / sum_l P_l. Requires powers through kBrillianceOrder.
double brilliance(const OrderPowers& p);
/// P2 / P0. Throws NumericError when P0 == 0.
double diffuseness2(const OrderPowers& p);

struct Metrics {
    double diffuseness;
    double brilliance;
    double diffuseness2;
};

Metrics metrics(const OrderPowers& p);

/// Irradiance from the order <= 2 part of the spectrum: the clamped-cosine
/// convolution, E(n) = sum_l A_l sum_m c_lm Y_lm(n) with A = (pi, 2pi/3, pi/4).
double irradiance(const ShSpectrum& spectrum, double theta, double phi);

}  // namespace glossmap::sphharm
