#include "glossmap/error.hpp"
#include "glossmap/imstats.hpp"
#include "glossmap/optics.hpp"
#include "glossmap/specrender.hpp"
#include "glossmap/synthetic.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace glossmap;
using namespace glossmap::specrender;
using envmap::EquirectMap;

namespace {

std::uint8_t max_object_pixel(const Stimulus& s) {
    std::uint8_t best = 0;
    for (std::size_t i = 0; i < s.mask.size(); ++i)
        if (s.mask[i]) best = std::max(best, s.image.pixels[i]);
    return best;
}

double coverage_of(const EquirectMap& map, const MaterialSpec& material, RenderOptions options = {}) {
    const Exposed e = normalize_exposure(render_sphere(map, material, options));
    return imstats::specular_coverage(tone_map(e.raster)).coverage;
}

EquirectMap add(const EquirectMap& a, const EquirectMap& b) {
    EquirectMap out = a;
    for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] += b.data()[i];
    return out;
}

}  // namespace

TEST_CASE("tone map constants") {
    CHECK(tone_map_value(0.5) == 186);
    CHECK(tone_map_value(0.0) == 0);
    CHECK(tone_map_value(1.0) == 255);
    CHECK(tone_map_value(7.0) == 255);
    CHECK(tone_map_value(-1.0) == 0);
    CHECK(tone_map_value(exposure_ceiling()) == 254);
    CHECK(tone_map_value(exposure_ceiling() * 1.001) == 254);
    CHECK(exposure_ceiling() == doctest::Approx(std::pow(254.0 / 255.0, 2.2)));
}

TEST_CASE("normalize_exposure lands the peak on 254") {
    Raster r{32, std::vector<double>(32 * 32, 0.0), std::vector<std::uint8_t>(32 * 32, 1)};
    r.radiance[10] = 2.0;
    r.radiance[11] = 0.5;
    const Exposed e = normalize_exposure(r);
    CHECK(e.scale == doctest::Approx(exposure_ceiling() / 2.0));
    CHECK(max_object_pixel(tone_map(e.raster)) == 254);

    Raster black{32, std::vector<double>(32 * 32, 0.0), std::vector<std::uint8_t>(32 * 32, 1)};
    CHECK_THROWS_AS(normalize_exposure(black), NumericError);
    CHECK_THROWS_AS(apply_exposure(r, 0.0), DomainError);
}

TEST_CASE("background pixels are exactly 100 and the object is a disk") {
    const Raster r = render_sphere(synthetic::broad(128), MaterialSpec::metal(), {.size = 64});
    const Stimulus s = tone_map(normalize_exposure(r).raster);
    std::size_t object = 0;
    for (std::size_t i = 0; i < s.mask.size(); ++i) {
        if (!s.mask[i]) CHECK(s.image.pixels[i] == kBackgroundGray);
        object += s.mask[i];
    }
    CHECK(static_cast<double>(object) / (64.0 * 64.0) == doctest::Approx(std::acos(-1.0) / 4.0).epsilon(0.02));
    CHECK(s.mask[0] == 0);
    CHECK(s.mask[32 * 64 + 32] == 1);
}

TEST_CASE("a unit mirror reflects a constant map unchanged") {
    RenderOptions opt;
    opt.size = 64;
    opt.force_unit_reflectance = true;
    const Raster r = render_sphere(EquirectMap::constant(128, 64, 0.8), MaterialSpec::metal(), opt);
    for (std::size_t i = 0; i < r.radiance.size(); ++i)
        if (r.mask[i]) CHECK(r.radiance[i] == doctest::Approx(0.8));
}

TEST_CASE("mirror radiance follows the Fresnel curve") {
    // Under a constant map each pixel is R(theta) * L; the center pixel sees
    // near-normal incidence.
    const Raster r = render_sphere(EquirectMap::constant(128, 64, 1.0), MaterialSpec::metal(), {.size = 65});
    const double center = r.radiance[32 * 65 + 32];
    CHECK(center == doctest::Approx(optics::normal_incidence_reflectance(optics::kChrome)).epsilon(1e-3));
}

TEST_CASE("diffuse-only render of a constant map equals the albedo times radiance") {
    const Raster r = render_diffuse_only(EquirectMap::constant(128, 64, 2.0), 0.5, {.size = 48});
    for (std::size_t i = 0; i < r.radiance.size(); ++i)
        if (r.mask[i]) CHECK(r.radiance[i] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("a single texel reflects where the mirror geometry predicts") {
    const int width = 256, size = 256;
    RenderOptions opt;
    opt.size = size;
    opt.force_unit_reflectance = true;
    opt.sampling = Sampling::nearest;
    for (auto [row, col] : {std::pair{40, 10}, {64, 20}, {90, 240}, {50, 200}}) {
        const EquirectMap map = synthetic::single_texel(width, row, col, 1.0);
        const Raster r = render_sphere(map, MaterialSpec::metal(), opt);
        double sx = 0.0, sy = 0.0, sw = 0.0;
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x) {
                const double w = r.radiance[static_cast<std::size_t>(y) * size + x];
                sx += w * x;
                sy += w * y;
                sw += w;
            }
        REQUIRE(sw > 0.0);
        // Camera frame of the texel direction, then the half vector with the view axis.
        const auto d = map.direction(row, col);
        const double cx = d.y, cy = d.z, cz = d.x + 1.0;
        const double len = std::sqrt(cx * cx + cy * cy + cz * cz);
        const double half = size / 2.0;
        const double px = cx / len * half + half - 0.5;
        const double py = half - cy / len * half - 0.5;
        CHECK(std::abs(sx / sw - px) < 1.0);
        CHECK(std::abs(sy / sw - py) < 1.0);
    }
}

TEST_CASE("rendering is linear in the light map") {
    const EquirectMap a = synthetic::sparse(128);
    const EquirectMap b = synthetic::noise(128, 4);
    for (const auto& material : {MaterialSpec::metal(), MaterialSpec::shiny_white()}) {
        const Raster ra = render_sphere(a, material, {.size = 48});
        const Raster rb = render_sphere(b, material, {.size = 48});
        const Raster rab = render_sphere(add(a, b), material, {.size = 48});
        for (std::size_t i = 0; i < rab.radiance.size(); ++i)
            CHECK(rab.radiance[i] == doctest::Approx(ra.radiance[i] + rb.radiance[i]).epsilon(1e-9));
    }
}

TEST_CASE("chrome covers at least as much as obsidian under a shared exposure") {
    for (const EquirectMap& map : {synthetic::sparse(256), synthetic::broad(256), synthetic::noise(256, 3)}) {
        const Raster metal = render_sphere(map, MaterialSpec::metal(), {.size = 96});
        const Raster black = render_sphere(map, MaterialSpec::shiny_black(), {.size = 96});
        const Exposed e = normalize_exposure(metal);
        const Stimulus sm = tone_map(e.raster);
        const Stimulus sb = tone_map(apply_exposure(black, e.scale));
        CHECK(imstats::specular_coverage(sm).coverage >= imstats::specular_coverage(sb).coverage);
        CHECK(max_object_pixel(sb) <= max_object_pixel(sm));
    }
}

TEST_CASE("sparse light gives lower coverage than broad light") {
    CHECK(coverage_of(synthetic::sparse(256), MaterialSpec::metal(), {.size = 96}) <
          coverage_of(synthetic::broad(256), MaterialSpec::metal(), {.size = 96}));
}

TEST_CASE("pre-blurring the map does not reduce coverage") {
    const EquirectMap map = synthetic::sparse(256);
    double previous = 0.0;
    for (double w : {0.0, 8.0, 32.0, 128.0}) {
        RenderOptions opt;
        opt.size = 96;
        opt.preblur_width = w;
        const double c = coverage_of(map, MaterialSpec::metal(), opt);
        CHECK(c >= previous);
        previous = c;
    }
}

TEST_CASE("bumpy objects change the highlight layout but keep the silhouette") {
    const EquirectMap map = synthetic::sparse(256);
    RenderOptions sphere{.size = 64};
    RenderOptions bumpy{.size = 64, .object = ObjectShape::by_id("bumpy-high")};
    const Raster a = render_sphere(map, MaterialSpec::metal(), sphere);
    const Raster b = render_sphere(map, MaterialSpec::metal(), bumpy);
    CHECK(a.mask == b.mask);
    CHECK(a.radiance != b.radiance);
    CHECK_THROWS_AS(ObjectShape::by_id("teapot"), DomainError);
}

TEST_CASE("material helpers") {
    CHECK(parse_material("shiny-black") == MaterialKind::shiny_black);
    CHECK(parse_material("shiny_white") == MaterialKind::shiny_white);
    CHECK_THROWS_AS(parse_material("gold"), DomainError);
    MaterialSpec bad = MaterialSpec::metal();
    bad.ior.k = 0.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    CHECK_THROWS_AS(render_sphere(synthetic::broad(64), MaterialSpec::metal(), {.size = 8}), DomainError);
}

TEST_CASE("condition sets share the reference exposure and never exceed 254") {
    const std::vector<LightMap> maps = {{"sparse", synthetic::sparse(128)}, {"broad", synthetic::broad(128)}};
    const auto stimuli = render_condition_set(maps, {"sphere", "bumpy-low"}, default_conditions(), {.size = 48});
    REQUIRE(stimuli.size() == 2 * 2 * 5);
    CHECK(stimuli[0].id() == "sphere__sparse__metal__x1");
    CHECK(stimuli[1].id() == "sphere__sparse__metal__x0.2");
    CHECK(stimuli[3].id() == "sphere__sparse__shiny_black__x5");
    for (std::size_t g = 0; g < stimuli.size(); g += 5) {
        CHECK(max_object_pixel(stimuli[g]) == 254);
        CHECK(max_object_pixel(stimuli[g + 1]) < 254);
        CHECK(max_object_pixel(stimuli[g + 2]) < 254);
        for (std::size_t k = 0; k < 5; ++k) {
            const Stimulus& s = stimuli[g + k];
            CHECK(max_object_pixel(s) <= 254);
            if (s.meta.renormalized) CHECK(max_object_pixel(s) == 254);
            else CHECK(s.meta.exposure_scale == stimuli[g].meta.exposure_scale);
        }
    }
}
