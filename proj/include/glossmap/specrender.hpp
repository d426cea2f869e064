#pragma once

#include "glossmap/envmap.hpp"
#include "glossmap/optics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace glossmap::specrender {

enum class MaterialKind { metal, shiny_black, shiny_white };

/// "metal", "shiny_black", "shiny_white".
std::string to_string(MaterialKind kind);
/// Accepts underscores or hyphens ("shiny-black").
MaterialKind parse_material(const std::string& name);

struct MaterialSpec {
    MaterialKind kind = MaterialKind::metal;
    optics::ComplexIOR ior = optics::kChrome;
    double diffuse_albedo = 0.0;

    /// Chrome (3.21, 3.30).
    static MaterialSpec metal();
    /// Obsidian-like dielectric (1.51, 0), no diffuse.
    static MaterialSpec shiny_black();
    /// Same specular layer as shiny_black plus a Lambertian base.
    static MaterialSpec shiny_white(double albedo = 0.5);
    static MaterialSpec of(MaterialKind kind);

    /// Throws DomainError when the kind/ior/albedo combination is inconsistent.
    void validate() const;
};

/// Object silhouettes. Every object is a unit-disk projection; the bumpy
/// variants perturb the sphere's height field to vary highlight structure.
struct ObjectShape {
    std::string id = "sphere";
    double bump_amplitude = 0.0;
    double bump_frequency = 0.0;

    /// "sphere", "bumpy-low", "bumpy-high".
    static ObjectShape by_id(const std::string& id);
};

enum class Sampling { bilinear, nearest };

struct RenderOptions {
    int size = 512;
    ObjectShape object;
    Sampling sampling = Sampling::bilinear;
    /// Test hook: treat the specular layer as a perfect mirror (R = 1).
    bool force_unit_reflectance = false;
    /// Blur width (map pixels) applied before lookup to mimic slight roughness; 0 disables.
    double preblur_width = 0.0;
    bool specular = true;
    bool diffuse = true;
};

/// Square linear-radiance raster. mask[i] == 1 marks object pixels.
struct Raster {
    int size = 0;
    std::vector<double> radiance;
    std::vector<std::uint8_t> mask;

    double max_object_value() const;
};

/// Orthographic view of the object. The camera sits on the world +x axis
/// looking at the origin with +z up; world = (camera z, camera x, camera y).
Raster render_sphere(const envmap::EquirectMap& map, const MaterialSpec& material, const RenderOptions& options = {});

/// Lambertian term on its own: albedo / pi * E(n).
Raster render_diffuse_only(const envmap::EquirectMap& map, double albedo, const RenderOptions& options = {});

// -- Exposure and tone mapping ----------------------------------------------

inline constexpr double kGamma = 2.2;
inline constexpr std::uint8_t kBackgroundGray = 100;
inline constexpr std::uint8_t kStimulusMax = 254;

/// Linear value that tone-maps to exactly kStimulusMax: (254/255)^2.2.
double exposure_ceiling();

/// round(255 * clamp(v, 0, 1)^(1/2.2))
std::uint8_t tone_map_value(double v);

struct Exposed {
    Raster raster;
    double scale = 1.0;
};

/// Scales so the brightest object pixel lands on exposure_ceiling().
/// Throws NumericError when no object pixel is positive.
Exposed normalize_exposure(const Raster& raster);
Raster apply_exposure(const Raster& raster, double scale);

struct Image8 {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
};

struct StimulusMeta {
    std::string object = "sphere";
    MaterialKind material = MaterialKind::metal;
    std::string light_map;
    double factor = 1.0;
    double exposure_scale = 1.0;
    /// Set when the shared exposure would have saturated and the stimulus was pulled down to 254.
    bool renormalized = false;
};

struct Stimulus {
    Image8 image;
    std::vector<std::uint8_t> mask;
    StimulusMeta meta;

    /// "<object>__<light_map>__<material>__x<factor>"
    std::string id() const;
};

/// Compact factor text used in ids and CSVs ("1", "0.2", "5").
std::string format_factor(double factor);

/// Gamma tone map of object pixels; background pixels are set to `background`.
Stimulus tone_map(const Raster& raster, const StimulusMeta& meta = {}, std::uint8_t background = kBackgroundGray);

// -- Condition sets ---------------------------------------------------------

struct Condition {
    MaterialKind material;
    double factor;
};

/// metal x1, metal x0.2, shiny_black x1, shiny_black x5, shiny_white x1.
std::vector<Condition> default_conditions();

struct LightMap {
    std::string id;
    envmap::EquirectMap map;
};

/// One stimulus per (map, object, condition), in that nesting order.
///
/// For each (map, object) the exposure scale comes from the metal x1 render
/// (or the first condition when that is absent) and is reused for every
/// sibling condition. Any stimulus whose brightest pixel would then exceed 254
/// is renormalized down to exactly 254.
std::vector<Stimulus> render_condition_set(const std::vector<LightMap>& maps, const std::vector<std::string>& objects,
                                           const std::vector<Condition>& conditions,
                                           const RenderOptions& base = {});

}  // namespace glossmap::specrender
