#include "glossmap/optics.hpp"

#include "glossmap/error.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

namespace glossmap::optics {

namespace {

using cplx = std::complex<double>;

void check_angle(double theta_deg) {
    if (!std::isfinite(theta_deg) || theta_deg < 0.0 || theta_deg > 90.0)
        throw DomainError("incident angle must lie in [0, 90] degrees, got " + std::to_string(theta_deg));
}

}  // namespace

void validate(const ComplexIOR& ior) {
    if (!std::isfinite(ior.n) || !std::isfinite(ior.k))
        throw DomainError("index of refraction must be finite");
    if (ior.n <= 0.0) throw DomainError("refraction coefficient n must be > 0");
    if (ior.k < 0.0) throw DomainError("extinction coefficient k must be >= 0");
}

PolarizedReflectance reflectance_polarized(const ComplexIOR& ior, double theta_deg) {
    validate(ior);
    check_angle(theta_deg);
    if (theta_deg == 90.0) return {1.0, 1.0};

    const double theta = theta_deg * std::numbers::pi / 180.0;
    const double cos_i = std::cos(theta);
    const double sin_i = std::sin(theta);

    // |r|^2 is the same for n - ki and its conjugate, so work with n + ki, for
    // which the principal root below has non-negative imaginary part.
    const cplx eta(ior.n, ior.k);
    const cplx eta2 = eta * eta;
    // eta * cos(theta_t) from Snell's law.
    const cplx eta_cos_t = std::sqrt(eta2 - sin_i * sin_i);

    const cplx rs = (cos_i - eta_cos_t) / (cos_i + eta_cos_t);
    const cplx rp = (eta2 * cos_i - eta_cos_t) / (eta2 * cos_i + eta_cos_t);
    return {std::norm(rs), std::norm(rp)};
}

double reflectance_unpolarized(const ComplexIOR& ior, double theta_deg) {
    return reflectance_polarized(ior, theta_deg).unpolarized();
}

double normal_incidence_reflectance(const ComplexIOR& ior) {
    validate(ior);
    const double k2 = ior.k * ior.k;
    return ((ior.n - 1.0) * (ior.n - 1.0) + k2) / ((ior.n + 1.0) * (ior.n + 1.0) + k2);
}

ComplexIOR ior_from_facing_grazing(double r_facing, double r_grazing) {
    if (!std::isfinite(r_facing) || r_facing < 0.0 || r_facing >= 1.0)
        throw DomainError("facing reflectance must lie in [0, 1)");
    if (!std::isfinite(r_grazing) || r_grazing < 0.0 || r_grazing > 1.0)
        throw DomainError("grazing reflectance must lie in [0, 1]");
    if (std::abs(r_grazing - 1.0) > 1e-12)
        throw UnsupportedError("only the dielectric branch (grazing reflectance 1) can be inverted");

    const double root = std::sqrt(r_facing);
    return {(1.0 + root) / (1.0 - root), 0.0};
}

ComplexIOR metalness_ior(double metalness, double dielectric_n) {
    if (!(dielectric_n > 1.0) || !std::isfinite(dielectric_n))
        throw DomainError("dielectric n must be > 1");
    if (metalness == 0.0) return {dielectric_n, 0.0};
    if (metalness == 1.0) return kMetalProxy;
    throw DomainError("metalness is a switch and must be exactly 0 or 1");
}

ReflectanceCurve curve(const ComplexIOR& ior, double step_deg) {
    validate(ior);
    if (!(step_deg > 0.0) || step_deg > 10.0) throw DomainError("curve step must lie in (0, 10] degrees");

    ReflectanceCurve out;
    for (int i = 0;; ++i) {
        const double theta = i * step_deg;
        if (theta >= 90.0 - 1e-9) break;
        out.push_back({theta, reflectance_unpolarized(ior, theta)});
    }
    out.push_back({90.0, 1.0});
    return out;
}

}  // namespace glossmap::optics
