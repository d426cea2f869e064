#pragma once

#include <vector>

namespace glossmap::optics {

/// Complex index of refraction n - ki. k == 0 is a dielectric, k > 0 a conductor.
struct ComplexIOR {
    double n = 1.0;
    double k = 0.0;

    bool is_dielectric() const noexcept { return k == 0.0; }
    bool operator==(const ComplexIOR&) const = default;
};

/// Throws DomainError unless n > 0, k >= 0 and both are finite.
void validate(const ComplexIOR& ior);

/// Reference materials used by the stimulus set.
inline constexpr ComplexIOR kChrome{3.21, 3.30};
inline constexpr ComplexIOR kObsidian{1.51, 0.0};
inline constexpr ComplexIOR kAluminum{1.2, 7.0};
/// High-n dielectric that stands in for a metal when metalness = 1.
inline constexpr ComplexIOR kMetalProxy{50.0, 0.0};

struct PolarizedReflectance {
    double s = 0.0;
    double p = 0.0;
    double unpolarized() const noexcept { return 0.5 * (s + p); }
};

/// s- and p-power reflectances at incidence angle theta (degrees, [0, 90]) from air.
PolarizedReflectance reflectance_polarized(const ComplexIOR& ior, double theta_deg);

/// Unpolarized Fresnel reflectance, the mean of the s and p power reflectances.
/// theta = 90 returns exactly 1.
double reflectance_unpolarized(const ComplexIOR& ior, double theta_deg);

/// ((n-1)^2 + k^2) / ((n+1)^2 + k^2)
double normal_incidence_reflectance(const ComplexIOR& ior);

/// Inverts the facing/grazing reflectance pair. Only the dielectric branch
/// (grazing reflectance 1, k = 0) is defined; anything else throws UnsupportedError.
ComplexIOR ior_from_facing_grazing(double r_facing, double r_grazing);

/// Renderer-style metalness switch: 0 keeps the dielectric n, 1 selects kMetalProxy.
ComplexIOR metalness_ior(double metalness, double dielectric_n);

struct CurveSample {
    double theta_deg;
    double reflectance;
};

using ReflectanceCurve = std::vector<CurveSample>;

/// Samples at 0, step, 2*step, ... and always ends with 90.
ReflectanceCurve curve(const ComplexIOR& ior, double step_deg);

}  // namespace glossmap::optics
