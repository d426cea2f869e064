#include "glossmap/analysis.hpp"
#include "glossmap/envmap.hpp"
#include "glossmap/error.hpp"
#include "glossmap/imstats.hpp"
#include "glossmap/optics.hpp"
#include "glossmap/specrender.hpp"
#include "glossmap/sphharm.hpp"
#include "glossmap/synthetic.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>

namespace py = pybind11;
using namespace glossmap;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using Bytes = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

// (H, W, 3) float64 copy.
Array to_numpy(const envmap::EquirectMap& m) {
    Array out({m.height(), m.width(), 3});
    std::copy(m.data().begin(), m.data().end(), out.mutable_data());
    return out;
}

envmap::EquirectMap from_numpy(const Array& a) {
    if (a.ndim() != 3 || a.shape(2) != 3) throw DomainError("expected an (H, W, 3) array");
    const auto h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
    return {w, h, std::vector<double>(a.data(), a.data() + a.size())};
}

py::dict stimulus_dict(const specrender::Stimulus& s) {
    const int n = s.image.width;
    Bytes image({n, n}), mask({n, n});
    std::copy(s.image.pixels.begin(), s.image.pixels.end(), image.mutable_data());
    std::copy(s.mask.begin(), s.mask.end(), mask.mutable_data());
    py::dict d;
    d["id"] = s.id();
    d["image"] = image;
    d["mask"] = mask;
    d["exposure_scale"] = s.meta.exposure_scale;
    return d;
}

}  // namespace

PYBIND11_MODULE(_glossmap, m) {
    m.doc() = "Light-map statistics, Fresnel optics and gloss stimulus rendering.";

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    m.def(
        "fresnel",
        [](double n, double k, double theta_deg) { return optics::reflectance_unpolarized({n, k}, theta_deg); },
        py::arg("n"), py::arg("k"), py::arg("theta_deg"));
    m.def(
        "fresnel_curve",
        [](double n, double k, double step) {
            std::vector<std::pair<double, double>> out;
            for (const auto& s : optics::curve({n, k}, step)) out.emplace_back(s.theta_deg, s.reflectance);
            return out;
        },
        py::arg("n"), py::arg("k"), py::arg("step_deg") = 1.0);
    m.def(
        "normal_incidence", [](double n, double k) { return optics::normal_incidence_reflectance({n, k}); },
        py::arg("n"), py::arg("k"));

    m.def("load_map", [](const std::filesystem::path& p) { return to_numpy(envmap::load(p)); }, py::arg("path"));
    m.def(
        "save_map", [](const Array& a, const std::filesystem::path& p) { envmap::save(from_numpy(a), p); },
        py::arg("map"), py::arg("path"));
    m.def(
        "synth", [](const std::string& kind, int width, unsigned seed) {
            return to_numpy(synthetic::by_name(kind, width, seed));
        },
        py::arg("kind"), py::arg("width"), py::arg("seed") = 1);
    m.def(
        "blur", [](const Array& a, double width_px) { return to_numpy(envmap::gaussian_blur(from_numpy(a), width_px)); },
        py::arg("map"), py::arg("width_px"));

    m.def(
        "order_powers",
        [](const Array& a, int max_order) {
            return sphharm::order_powers(sphharm::project(from_numpy(a), max_order)).powers;
        },
        py::arg("map"), py::arg("max_order") = sphharm::kBrillianceOrder);
    m.def(
        "metrics",
        [](const Array& a) {
            const auto p = sphharm::order_powers(sphharm::project(from_numpy(a), sphharm::kBrillianceOrder));
            const auto r = sphharm::metrics(p);
            py::dict d;
            d["diffuseness"] = r.diffuseness;
            d["brilliance"] = r.brilliance;
            d["diffuseness2"] = r.diffuseness2;
            return d;
        },
        py::arg("map"));

    m.def(
        "render",
        [](const Array& a, const std::string& material, int size, const std::string& object, double exposure_scale) {
            specrender::RenderOptions opt;
            opt.size = size;
            opt.object = specrender::ObjectShape::by_id(object);
            const auto kind = specrender::parse_material(material);
            const auto raw = specrender::render_sphere(from_numpy(a), specrender::MaterialSpec::of(kind), opt);
            specrender::Exposed e =
                exposure_scale > 0.0 ? specrender::Exposed{specrender::apply_exposure(raw, exposure_scale), exposure_scale}
                                     : specrender::normalize_exposure(raw);
            specrender::StimulusMeta meta;
            meta.object = object;
            meta.material = kind;
            meta.exposure_scale = e.scale;
            return stimulus_dict(specrender::tone_map(e.raster, meta));
        },
        py::arg("map"), py::arg("material") = "metal", py::arg("size") = 256, py::arg("object") = "sphere",
        py::arg("exposure_scale") = 0.0,
        "exposure_scale <= 0 normalizes the brightest object pixel to 254.");
    m.def("tone_map", &specrender::tone_map_value, py::arg("value"));

    m.def(
        "coverage",
        [](const Bytes& image, const Bytes& mask, int threshold) {
            if (image.size() != mask.size()) throw DomainError("image and mask sizes differ");
            const std::span<const std::uint8_t> px(image.data(), image.size()), mk(mask.data(), mask.size());
            return imstats::specular_coverage(px, mk, threshold).coverage;
        },
        py::arg("image"), py::arg("mask"), py::arg("threshold") = imstats::kDefaultThreshold);

    m.def(
        "linear_fit",
        [](const std::vector<double>& x, const std::vector<double>& y) {
            const auto f = analysis::linear_fit(x, y);
            py::dict d;
            d["slope"] = f.slope;
            d["intercept"] = f.intercept;
            d["r_squared"] = f.r_squared;
            return d;
        },
        py::arg("x"), py::arg("y"));
}
