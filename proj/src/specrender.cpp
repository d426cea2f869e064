#include "glossmap/specrender.hpp"

#include "glossmap/error.hpp"
#include "glossmap/parallel.hpp"
#include "glossmap/sphharm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace glossmap::specrender {

namespace {

constexpr double kPi = std::numbers::pi;

struct Vec {
    double x, y, z;
};

Vec normalized(Vec v) {
    const double len = std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
    return {v.x / len, v.y / len, v.z / len};
}

envmap::Vec3 to_world(const Vec& cam) { return {cam.z, cam.x, cam.y}; }

/// Surface normal (camera frame) at disk coordinates (u, v), u^2 + v^2 < 1.
Vec surface_normal(const ObjectShape& shape, double u, double v) {
    const double rho2 = u * u + v * v;
    const double z0 = std::sqrt(std::max(1.0 - rho2, 1e-12));
    if (shape.bump_amplitude == 0.0) return {u, v, z0};
    // Height field z0 + a (1 - rho^2) sin(pi f u) sin(pi f v); the normal is
    // (-dz/du, -dz/dv, 1) normalized.
    const double a = shape.bump_amplitude;
    const double w = kPi * shape.bump_frequency;
    const double su = std::sin(w * u), cu = std::cos(w * u);
    const double sv = std::sin(w * v), cv = std::cos(w * v);
    const double envelope = 1.0 - rho2;
    const double dzdu = -u / z0 + a * (-2.0 * u * su * sv + envelope * w * cu * sv);
    const double dzdv = -v / z0 + a * (-2.0 * v * su * sv + envelope * w * su * cv);
    return normalized({-dzdu, -dzdv, 1.0});
}

double sample_luminance(const envmap::EquirectMap& map, const envmap::Vec3& dir, Sampling sampling) {
    const envmap::Rgb c = sampling == Sampling::bilinear ? envmap::sample_bilinear(map, dir)
                                                         : envmap::sample_nearest(map, dir);
    return envmap::luminance(c[0], c[1], c[2]);
}

void check_size(int size) {
    if (size < 32) throw DomainError("render size must be >= 32 pixels");
}

}  // namespace

std::string to_string(MaterialKind kind) {
    switch (kind) {
    case MaterialKind::metal: return "metal";
    case MaterialKind::shiny_black: return "shiny_black";
    case MaterialKind::shiny_white: return "shiny_white";
    }
    return "unknown";
}

MaterialKind parse_material(const std::string& name) {
    std::string s = name;
    std::replace(s.begin(), s.end(), '-', '_');
    if (s == "metal") return MaterialKind::metal;
    if (s == "shiny_black") return MaterialKind::shiny_black;
    if (s == "shiny_white") return MaterialKind::shiny_white;
    throw DomainError("unknown material '" + name + "'");
}

MaterialSpec MaterialSpec::metal() { return {MaterialKind::metal, optics::kChrome, 0.0}; }
MaterialSpec MaterialSpec::shiny_black() { return {MaterialKind::shiny_black, optics::kObsidian, 0.0}; }
MaterialSpec MaterialSpec::shiny_white(double albedo) { return {MaterialKind::shiny_white, optics::kObsidian, albedo}; }

MaterialSpec MaterialSpec::of(MaterialKind kind) {
    switch (kind) {
    case MaterialKind::metal: return metal();
    case MaterialKind::shiny_black: return shiny_black();
    case MaterialKind::shiny_white: return shiny_white();
    }
    throw DomainError("unknown material kind");
}

void MaterialSpec::validate() const {
    optics::validate(ior);
    if (!(diffuse_albedo >= 0.0 && diffuse_albedo <= 1.0)) throw DomainError("diffuse albedo must lie in [0, 1]");
    switch (kind) {
    case MaterialKind::metal:
        if (!(ior.k > 0.0)) throw DomainError("metal needs k > 0");
        break;
    case MaterialKind::shiny_black:
        if (ior.k != 0.0 || diffuse_albedo != 0.0) throw DomainError("shiny_black needs k = 0 and no diffuse");
        break;
    case MaterialKind::shiny_white:
        if (ior.k != 0.0 || !(diffuse_albedo > 0.0)) throw DomainError("shiny_white needs k = 0 and albedo > 0");
        break;
    }
}

ObjectShape ObjectShape::by_id(const std::string& id) {
    if (id == "sphere") return {id, 0.0, 0.0};
    if (id == "bumpy-low") return {id, 0.06, 2.0};
    if (id == "bumpy-high") return {id, 0.03, 5.0};
    throw DomainError("unknown object '" + id + "'");
}

double Raster::max_object_value() const {
    double best = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < radiance.size(); ++i)
        if (mask[i]) {
            best = any ? std::max(best, radiance[i]) : radiance[i];
            any = true;
        }
    return best;
}

namespace {

Raster render(const envmap::EquirectMap& source, const MaterialSpec* material, double albedo,
              const RenderOptions& options) {
    check_size(options.size);
    if (source.empty()) throw DomainError("cannot render with an empty map");
    const envmap::EquirectMap map =
        options.preblur_width > 0.0 ? envmap::gaussian_blur(source, options.preblur_width) : source;

    const bool want_diffuse = options.diffuse && albedo > 0.0;
    sphharm::ShSpectrum low_order;
    if (want_diffuse) low_order = sphharm::project(map, 2);

    const int size = options.size;
    const double half = size / 2.0;
    Raster out{size, std::vector<double>(static_cast<std::size_t>(size) * size, 0.0),
               std::vector<std::uint8_t>(static_cast<std::size_t>(size) * size, 0)};

    parallel_for(static_cast<std::size_t>(size), [&](std::size_t row_index) {
        const int py = static_cast<int>(row_index);
        for (int px = 0; px < size; ++px) {
            const double u = (px + 0.5 - half) / half;
            const double v = (half - (py + 0.5)) / half;
            if (u * u + v * v >= 1.0) continue;
            const std::size_t idx = static_cast<std::size_t>(py) * size + px;
            out.mask[idx] = 1;

            const Vec n = surface_normal(options.object, u, v);
            const double n_dot_v = std::clamp(n.z, 0.0, 1.0);
            double value = 0.0;

            if (material && options.specular) {
                const Vec r{2.0 * n_dot_v * n.x, 2.0 * n_dot_v * n.y, 2.0 * n_dot_v * n.z - 1.0};
                const double incident = std::acos(n_dot_v) * 180.0 / kPi;
                const double fresnel =
                    options.force_unit_reflectance ? 1.0 : optics::reflectance_unpolarized(material->ior, incident);
                value += fresnel * sample_luminance(map, to_world(r), options.sampling);
            }
            if (want_diffuse) {
                const auto [theta, phi] = envmap::spherical_of(to_world(n));
                value += albedo / kPi * std::max(sphharm::irradiance(low_order, theta, phi), 0.0);
            }
            out.radiance[idx] = value;
        }
    });
    return out;
}

}  // namespace

Raster render_sphere(const envmap::EquirectMap& map, const MaterialSpec& material, const RenderOptions& options) {
    material.validate();
    return render(map, &material, material.kind == MaterialKind::shiny_white ? material.diffuse_albedo : 0.0, options);
}

Raster render_diffuse_only(const envmap::EquirectMap& map, double albedo, const RenderOptions& options) {
    if (!(albedo >= 0.0 && albedo <= 1.0)) throw DomainError("diffuse albedo must lie in [0, 1]");
    RenderOptions diffuse_options = options;
    diffuse_options.diffuse = true;
    return render(map, nullptr, albedo, diffuse_options);
}

double exposure_ceiling() { return std::pow(static_cast<double>(kStimulusMax) / 255.0, kGamma); }

std::uint8_t tone_map_value(double v) {
    const double clamped = std::clamp(std::isfinite(v) ? v : 0.0, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::lround(255.0 * std::pow(clamped, 1.0 / kGamma)));
}

Exposed normalize_exposure(const Raster& raster) {
    const double peak = raster.max_object_value();
    if (!(peak > 0.0)) throw NumericError("cannot normalize exposure: no positive object pixel");
    const double scale = exposure_ceiling() / peak;
    return {apply_exposure(raster, scale), scale};
}

Raster apply_exposure(const Raster& raster, double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("exposure scale must be > 0");
    Raster out = raster;
    for (double& v : out.radiance) v *= scale;
    return out;
}

std::string Stimulus::id() const {
    return meta.object + "__" + meta.light_map + "__" + to_string(meta.material) + "__x" + format_factor(meta.factor);
}

std::string format_factor(double factor) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", factor);
    return buf;
}

Stimulus tone_map(const Raster& raster, const StimulusMeta& meta, std::uint8_t background) {
    Stimulus out;
    out.image.width = raster.size;
    out.image.height = raster.size;
    out.image.pixels.resize(raster.radiance.size());
    out.mask = raster.mask;
    out.meta = meta;
    for (std::size_t i = 0; i < raster.radiance.size(); ++i)
        out.image.pixels[i] = raster.mask[i] ? tone_map_value(raster.radiance[i]) : background;
    return out;
}

std::vector<Condition> default_conditions() {
    return {
        {MaterialKind::metal, 1.0},
        {MaterialKind::metal, 0.2},
        {MaterialKind::shiny_black, 1.0},
        {MaterialKind::shiny_black, 5.0},
        {MaterialKind::shiny_white, 1.0},
    };
}

std::vector<Stimulus> render_condition_set(const std::vector<LightMap>& maps, const std::vector<std::string>& objects,
                                           const std::vector<Condition>& conditions, const RenderOptions& base) {
    if (maps.empty() || objects.empty() || conditions.empty())
        throw DomainError("condition set needs at least one map, object and condition");

    std::size_t reference = 0;
    for (std::size_t i = 0; i < conditions.size(); ++i)
        if (conditions[i].material == MaterialKind::metal && conditions[i].factor == 1.0) {
            reference = i;
            break;
        }

    std::vector<Stimulus> out;
    out.reserve(maps.size() * objects.size() * conditions.size());
    for (const LightMap& light : maps) {
        for (const std::string& object : objects) {
            RenderOptions options = base;
            options.object = ObjectShape::by_id(object);

            auto render_condition = [&](const Condition& c) {
                return render_sphere(envmap::scale_intensity(light.map, c.factor), MaterialSpec::of(c.material),
                                     options);
            };

            const double shared_scale = normalize_exposure(render_condition(conditions[reference])).scale;
            for (const Condition& c : conditions) {
                Raster raster = apply_exposure(render_condition(c), shared_scale);
                StimulusMeta meta{object, c.material, light.id, c.factor, shared_scale, false};
                if (tone_map_value(raster.max_object_value()) > kStimulusMax) {
                    Exposed pulled = normalize_exposure(raster);
                    raster = std::move(pulled.raster);
                    meta.exposure_scale = shared_scale * pulled.scale;
                    meta.renormalized = true;
                }
                out.push_back(tone_map(raster, meta));
            }
        }
    }
    return out;
}

}  // namespace glossmap::specrender
