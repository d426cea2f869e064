#include "glossmap/sphharm.hpp"

#include "glossmap/error.hpp"
#include "glossmap/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace glossmap::sphharm {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt2 = std::sqrt(2.0);

/// Index of P_lm (m >= 0) in the triangular Legendre table.
constexpr int legendre_index(int l, int m) { return l * (l + 1) / 2 + m; }

/// Orthonormalized associated Legendre values sqrt((2l+1)/4pi (l-m)!/(l+m)!) P_l^m(cos theta),
/// Condon-Shortley phase included, for 0 <= m <= l <= max_order.
void legendre_normalized(int max_order, double theta, std::vector<double>& out) {
    out.assign(static_cast<std::size_t>(legendre_index(max_order, max_order) + 1), 0.0);
    const double x = std::cos(theta);
    const double s = std::sin(theta);

    double pmm = 1.0 / std::sqrt(4.0 * kPi);
    for (int m = 0; m <= max_order; ++m) {
        if (m > 0) pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
        out[legendre_index(m, m)] = pmm;
        if (m == max_order) break;
        double prev2 = pmm;
        double prev1 = std::sqrt(2.0 * m + 3.0) * x * pmm;
        out[legendre_index(m + 1, m)] = prev1;
        for (int l = m + 2; l <= max_order; ++l) {
            const double ll = static_cast<double>(l) * l;
            const double mm = static_cast<double>(m) * m;
            const double a = std::sqrt((4.0 * ll - 1.0) / (ll - mm));
            const double lm1 = static_cast<double>(l - 1) * (l - 1);
            const double b = std::sqrt((lm1 - mm) / (4.0 * lm1 - 1.0));
            const double cur = a * (x * prev1 - b * prev2);
            out[legendre_index(l, m)] = cur;
            prev2 = prev1;
            prev1 = cur;
        }
    }
}

void check_order(int max_order) {
    if (max_order < 0) throw DomainError("max_order must be >= 0");
}

/// Pairwise sum of equally-sized partial vectors, in index order.
std::vector<double> pairwise_sum(std::vector<std::vector<double>>& parts, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return std::move(parts[lo]);
    const std::size_t mid = lo + (hi - lo) / 2;
    std::vector<double> left = pairwise_sum(parts, lo, mid);
    const std::vector<double> right = pairwise_sum(parts, mid, hi);
    for (std::size_t i = 0; i < left.size(); ++i) left[i] += right[i];
    return left;
}

}  // namespace

double real_sh(int l, int m, double theta, double phi) {
    if (l < 0 || m < -l || m > l) throw DomainError("invalid spherical harmonic index");
    std::vector<double> table;
    legendre_normalized(l, theta, table);
    const double p = table[legendre_index(l, std::abs(m))];
    if (m == 0) return p;
    return m > 0 ? kSqrt2 * p * std::cos(m * phi) : kSqrt2 * p * std::sin(-m * phi);
}

void real_sh_all(int max_order, double theta, double phi, std::vector<double>& out) {
    check_order(max_order);
    std::vector<double> table;
    legendre_normalized(max_order, theta, table);
    out.assign(static_cast<std::size_t>(coefficient_count(max_order)), 0.0);
    for (int l = 0; l <= max_order; ++l) {
        out[sh_index(l, 0)] = table[legendre_index(l, 0)];
        for (int m = 1; m <= l; ++m) {
            const double p = kSqrt2 * table[legendre_index(l, m)];
            out[sh_index(l, m)] = p * std::cos(m * phi);
            out[sh_index(l, -m)] = p * std::sin(m * phi);
        }
    }
}

ShSpectrum::ShSpectrum(int max_order)
    : max_order_(max_order), coeffs_(static_cast<std::size_t>(coefficient_count(max_order)), 0.0) {
    check_order(max_order);
}

ShSpectrum::ShSpectrum(int max_order, std::vector<double> coeffs) : max_order_(max_order), coeffs_(std::move(coeffs)) {
    check_order(max_order);
    if (coeffs_.size() != static_cast<std::size_t>(coefficient_count(max_order)))
        throw DomainError("spectrum needs (L+1)^2 coefficients");
    for (double c : coeffs_)
        if (!std::isfinite(c)) throw DomainError("spectrum coefficients must be finite");
}

std::vector<double> latitude_weights(int height, Quadrature rule) {
    std::vector<double> w(static_cast<std::size_t>(height));
    const double h = kPi / height;
    for (int i = 0; i < height; ++i) {
        const double theta = h * (i + 0.5);
        if (rule == Quadrature::midpoint) {
            w[i] = std::sin(theta) * h;
            continue;
        }
        double sum = 0.0;
        for (int j = 1; j <= height / 2; ++j) sum += std::cos(2.0 * j * theta) / (4.0 * j * j - 1.0);
        w[i] = 2.0 / height * (1.0 - 2.0 * sum);
    }
    return w;
}

ShSpectrum project(const envmap::EquirectMap& map, int max_order, Quadrature rule) {
    check_order(max_order);
    if (map.width() < 4 || map.height() < 2) throw DomainError("map too small for spherical quadrature (min 4x2)");

    const int width = map.width();
    const int height = map.height();
    const int count = coefficient_count(max_order);
    const std::vector<double> lat = latitude_weights(height, rule);
    const double dphi = 2.0 * kPi / width;

    // cos(m phi_j), sin(m phi_j) tables.
    std::vector<double> cos_table(static_cast<std::size_t>(max_order + 1) * width);
    std::vector<double> sin_table(cos_table.size());
    for (int m = 0; m <= max_order; ++m)
        for (int j = 0; j < width; ++j) {
            cos_table[static_cast<std::size_t>(m) * width + j] = std::cos(m * map.phi(j));
            sin_table[static_cast<std::size_t>(m) * width + j] = std::sin(m * map.phi(j));
        }

    std::vector<std::vector<double>> rows(static_cast<std::size_t>(height));
    parallel_for(static_cast<std::size_t>(height), [&](std::size_t row_index) {
        const int i = static_cast<int>(row_index);
        std::vector<double> lum(static_cast<std::size_t>(width));
        for (int j = 0; j < width; ++j) lum[j] = map.luminance_at(i, j);

        std::vector<double> a(static_cast<std::size_t>(max_order + 1), 0.0);
        std::vector<double> b(a.size(), 0.0);
        for (int m = 0; m <= max_order; ++m) {
            const double* cm = &cos_table[static_cast<std::size_t>(m) * width];
            const double* sm = &sin_table[static_cast<std::size_t>(m) * width];
            double sa = 0.0, sb = 0.0;
            for (int j = 0; j < width; ++j) {
                sa += lum[j] * cm[j];
                sb += lum[j] * sm[j];
            }
            a[m] = sa;
            b[m] = sb;
        }

        std::vector<double> table;
        legendre_normalized(max_order, map.theta(i), table);
        const double weight = lat[i] * dphi;
        std::vector<double>& out = rows[row_index];
        out.assign(static_cast<std::size_t>(count), 0.0);
        for (int l = 0; l <= max_order; ++l) {
            out[sh_index(l, 0)] = weight * table[legendre_index(l, 0)] * a[0];
            for (int m = 1; m <= l; ++m) {
                const double p = weight * kSqrt2 * table[legendre_index(l, m)];
                out[sh_index(l, m)] = p * a[m];
                out[sh_index(l, -m)] = p * b[m];
            }
        }
    });

    return ShSpectrum(max_order, pairwise_sum(rows, 0, rows.size()));
}

envmap::EquirectMap reconstruct(const ShSpectrum& spectrum, int width, int height) {
    envmap::EquirectMap out(width, height);
    const int max_order = spectrum.max_order();
    parallel_for(static_cast<std::size_t>(height), [&](std::size_t row_index) {
        const int i = static_cast<int>(row_index);
        std::vector<double> table;
        legendre_normalized(max_order, out.theta(i), table);
        for (int j = 0; j < width; ++j) {
            const double phi = out.phi(j);
            double value = 0.0;
            for (int l = 0; l <= max_order; ++l) {
                value += spectrum(l, 0) * table[legendre_index(l, 0)];
                for (int m = 1; m <= l; ++m) {
                    const double p = kSqrt2 * table[legendre_index(l, m)];
                    value += p * (spectrum(l, m) * std::cos(m * phi) + spectrum(l, -m) * std::sin(m * phi));
                }
            }
            out.set(i, j, {value, value, value});
        }
    });
    return out;
}

OrderPowers order_powers(const ShSpectrum& spectrum, PowerMode mode) {
    OrderPowers out;
    out.powers.resize(static_cast<std::size_t>(spectrum.max_order() + 1));
    for (int l = 0; l <= spectrum.max_order(); ++l) {
        double sum = 0.0;
        for (int m = -l; m <= l; ++m) sum += spectrum(l, m) * spectrum(l, m);
        out.powers[l] = mode == PowerMode::rms ? std::sqrt(sum / (2.0 * l + 1.0)) : sum;
    }
    return out;
}

namespace {

double ratio_to_p0(const OrderPowers& p, int order, const char* name) {
    if (p.max_order() < order)
        throw DomainError(std::string(name) + " needs powers through order " + std::to_string(order));
    if (!(p.powers[0] > 0.0)) throw NumericError(std::string(name) + " is undefined when P0 == 0");
    return p.powers[order] / p.powers[0];
}

}  // namespace

double diffuseness(const OrderPowers& p) { return ratio_to_p0(p, 1, "diffuseness"); }

double diffuseness2(const OrderPowers& p) { return ratio_to_p0(p, 2, "diffuseness2"); }

double brilliance(const OrderPowers& p) {
    if (p.max_order() < kBrillianceOrder)
        throw DomainError("brilliance needs powers through order " + std::to_string(kBrillianceOrder));
    const double total = std::accumulate(p.powers.begin(), p.powers.end(), 0.0);
    if (!(total > 0.0)) throw NumericError("brilliance is undefined for zero total power");
    const double high = std::accumulate(p.powers.begin() + 3, p.powers.end(), 0.0);
    return high / total;
}

Metrics metrics(const OrderPowers& p) { return {diffuseness(p), brilliance(p), diffuseness2(p)}; }

double irradiance(const ShSpectrum& spectrum, double theta, double phi) {
    static constexpr double kLobe[3] = {kPi, 2.0 * kPi / 3.0, kPi / 4.0};
    const int order = std::min(spectrum.max_order(), 2);
    std::vector<double> y;
    real_sh_all(order, theta, phi, y);
    double e = 0.0;
    for (int l = 0; l <= order; ++l)
        for (int m = -l; m <= l; ++m) e += kLobe[l] * spectrum(l, m) * y[sh_index(l, m)];
    return e;
}

}  // namespace glossmap::sphharm
