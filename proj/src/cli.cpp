#include "glossmap/cli.hpp"

#include "glossmap/analysis.hpp"
#include "glossmap/envmap.hpp"
#include "glossmap/error.hpp"
#include "glossmap/exprig.hpp"
#include "glossmap/imstats.hpp"
#include "glossmap/optics.hpp"
#include "glossmap/pipeline.hpp"
#include "glossmap/png_io.hpp"
#include "glossmap/specrender.hpp"
#include "glossmap/sphharm.hpp"
#include "glossmap/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <csignal>
#include <fstream>
#include <functional>
#include <iostream>

namespace glossmap::cli {

namespace fs = std::filesystem;
using analysis::format_number;
using ojson = nlohmann::ordered_json;

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(IoErrorCode::open_failed, "cannot create " + path.string());
    return out;
}

/// "file:column" -> (file, column); column may be empty.
std::pair<std::string, std::string> split_spec(const std::string& spec) {
    const auto colon = spec.rfind(':');
    if (colon == std::string::npos || colon == 0) return {spec, ""};
    return {spec.substr(0, colon), spec.substr(colon + 1)};
}

exprig::HttpServer* g_server = nullptr;

void handle_signal(int) {
    if (g_server) g_server->stop();
}

struct Commands {
    explicit Commands(std::ostream& o) : out(o) {}

    std::ostream& out;
    std::function<void()> action = {};

    // fresnel-curve
    double n = 1.5, k = 0.0, step = 1.0;
    // shared paths
    std::string in_path, out_path, mask_path, img_path, config_path, ratings_path, map_id;
    // filter / scale
    double width = 0.0, factor = 1.0, sigma_per_width = 1.0 / 6.0, reference_width = 0.0;
    std::string mode = "low";
    // sh-analyze
    int max_order = sphharm::kBrillianceOrder;
    std::string powers_path, metrics_path, power_mode = "rms", quadrature = "fejer";
    // render
    std::string material = "metal", object = "sphere";
    int size = 512;
    double exposure_scale = 0.0, preblur = 0.0;
    // coverage
    int threshold = imstats::kDefaultThreshold;
    bool as_json = false;
    // regress
    std::string x_spec, y_spec;
    // serve
    std::string stimuli_dir, store_path, host = "127.0.0.1";
    int port = 8080;
    // synth
    std::string kind = "sparse";
    int synth_width = 512;
    unsigned seed = 1;

    void fresnel_curve() {
        const auto samples = optics::curve({n, k}, step);
        auto f = open_out(out_path);
        f << "theta_deg,reflectance\n";
        for (const auto& s : samples) f << format_number(s.theta_deg) << ',' << format_number(s.reflectance) << '\n';
        out << "wrote " << samples.size() << " samples to " << out_path << '\n';
    }

    void filter() {
        const envmap::EquirectMap map = envmap::load(in_path);
        const double w = reference_width > 0.0
                             ? envmap::rescale_width(width, map.width(), static_cast<int>(reference_width))
                             : width;
        const envmap::BlurOptions blur{sigma_per_width};
        if (mode != "low" && mode != "high") throw DomainError("--mode must be low or high");
        envmap::save(mode == "low" ? envmap::low_pass(map, w, blur) : envmap::high_pass(map, w, blur), out_path);
        out << mode << "-pass (width " << format_number(w) << " px) written to " << out_path << '\n';
    }

    void scale() {
        envmap::save(envmap::scale_intensity(envmap::load(in_path), factor), out_path);
        out << "scaled by " << format_number(factor) << " into " << out_path << '\n';
    }

    void desaturate() {
        envmap::save(envmap::desaturate(envmap::load(in_path)), out_path);
        out << "desaturated map written to " << out_path << '\n';
    }

    void sh_analyze() {
        const envmap::EquirectMap map = envmap::load(in_path);
        if (quadrature != "fejer" && quadrature != "midpoint") throw DomainError("--quadrature must be fejer or midpoint");
        if (power_mode != "rms" && power_mode != "sumsq") throw DomainError("--power-mode must be rms or sumsq");
        const auto spectrum = sphharm::project(
            map, max_order, quadrature == "fejer" ? sphharm::Quadrature::fejer : sphharm::Quadrature::midpoint);
        const auto powers = sphharm::order_powers(
            spectrum, power_mode == "rms" ? sphharm::PowerMode::rms : sphharm::PowerMode::sum_of_squares);

        const fs::path spectrum_path(out_path);
        const fs::path stem = spectrum_path.parent_path() / spectrum_path.stem();
        const fs::path pw = powers_path.empty() ? fs::path(stem.string() + "_powers.csv") : fs::path(powers_path);
        const fs::path mt = metrics_path.empty() ? fs::path(stem.string() + "_metrics.json") : fs::path(metrics_path);

        auto fs_ = open_out(spectrum_path);
        fs_ << "l,m,coeff\n";
        for (int l = 0; l <= max_order; ++l)
            for (int m = -l; m <= l; ++m) fs_ << l << ',' << m << ',' << format_number(spectrum(l, m)) << '\n';
        auto fp = open_out(pw);
        fp << "l," << (power_mode == "rms" ? "rms_power" : "sum_sq_power") << '\n';
        for (std::size_t l = 0; l < powers.powers.size(); ++l) fp << l << ',' << format_number(powers.powers[l]) << '\n';

        ojson metrics{{"diffuseness", sphharm::diffuseness(powers)}, {"diffuseness2", sphharm::diffuseness2(powers)}};
        if (max_order >= sphharm::kBrillianceOrder) metrics["brilliance"] = sphharm::brilliance(powers);
        auto fm = open_out(mt);
        fm << metrics.dump(2) << '\n';
        out << metrics.dump() << '\n';
    }

    void render() {
        specrender::RenderOptions options;
        options.size = size;
        options.object = specrender::ObjectShape::by_id(object);
        options.preblur_width = preblur;
        const auto kind_ = specrender::parse_material(material);
        const envmap::EquirectMap map = envmap::scale_intensity(envmap::load(in_path), factor);
        const specrender::Raster raster = specrender::render_sphere(map, specrender::MaterialSpec::of(kind_), options);
        specrender::Exposed exposed = exposure_scale > 0.0
                                          ? specrender::Exposed{specrender::apply_exposure(raster, exposure_scale),
                                                                exposure_scale}
                                          : specrender::normalize_exposure(raster);
        specrender::StimulusMeta meta{object, kind_, fs::path(in_path).stem().string(), factor, exposed.scale, false};
        const auto stimulus = specrender::tone_map(exposed.raster, meta);
        if (fs::path(out_path).has_parent_path()) fs::create_directories(fs::path(out_path).parent_path());
        png::write_gray8(out_path, stimulus.image);
        if (!mask_path.empty()) png::write_mask(mask_path, stimulus.mask, stimulus.image.width, stimulus.image.height);
        out << ojson{{"stimulus_id", stimulus.id()}, {"exposure_scale", exposed.scale}}.dump() << '\n';
    }

    void coverage() {
        const auto image = png::read_gray8(img_path);
        std::vector<std::uint8_t> mask;
        if (mask_path.empty()) {
            mask = imstats::mask_from_background(image.pixels);
        } else {
            int w = 0, h = 0;
            mask = png::read_mask(mask_path, w, h);
            if (w != image.width || h != image.height) throw DomainError("mask and image dimensions differ");
        }
        const auto c = imstats::specular_coverage(image.pixels, mask, threshold);
        const double mean = imstats::mean_intensity(image.pixels, mask);
        if (as_json) {
            out << ojson{{"coverage", c.coverage},
                         {"mean_intensity", mean},
                         {"object_pixels", c.object_pixels},
                         {"above_pixels", c.above_pixels},
                         {"threshold", c.threshold}}
                       .dump()
                << '\n';
        } else {
            out << "coverage " << format_number(c.coverage) << " (" << c.above_pixels << "/" << c.object_pixels
                << " object pixels > " << c.threshold << "), mean intensity " << format_number(mean) << '\n';
        }
    }

    void bias() {
        const auto records = analysis::read_ratings_csv(ratings_path);
        if (!map_id.empty()) {
            out << format_number(analysis::bias_index(records, map_id)) << '\n';
            return;
        }
        std::vector<std::string> ids;
        for (const auto& r : records)
            if (std::find(ids.begin(), ids.end(), r.stimulus.light_map) == ids.end()) ids.push_back(r.stimulus.light_map);
        std::sort(ids.begin(), ids.end());
        out << "light_map,bias_index\n";
        for (const auto& id : ids) out << id << ',' << format_number(analysis::bias_index(records, id)) << '\n';
    }

    void regress() {
        const auto [x_file, x_col] = split_spec(x_spec);
        auto [y_file, y_col] = split_spec(y_spec);
        if (x_col.empty()) throw DomainError("--x needs file:column");
        const auto xt = analysis::read_keyed_table(x_file);
        const auto yt = analysis::read_keyed_table(y_file);
        if (y_col.empty()) {
            const bool has_bias = std::find(yt.columns.begin(), yt.columns.end(), "bias_index") != yt.columns.end();
            y_col = has_bias ? "bias_index" : yt.columns.front();
        }
        const auto fit = analysis::fit_columns(xt, x_col, yt, y_col);
        out << ojson{{"x", x_col},
                     {"y", y_col},
                     {"slope", fit.slope},
                     {"intercept", fit.intercept},
                     {"r_squared", fit.r_squared},
                     {"n_points", fit.n_points}}
                   .dump()
            << '\n';
    }

    void serve() {
        exprig::ExperimentService service(exprig::Catalog::load(stimuli_dir), store_path);
        exprig::HttpServer server(service, stimuli_dir);
        if (!server.bind(host, port))
            throw IoError(IoErrorCode::open_failed, "cannot bind " + host + ":" + std::to_string(port));
        g_server = &server;
        std::signal(SIGINT, handle_signal);
        std::signal(SIGTERM, handle_signal);
        out << "serving " << service.catalog().entries().size() << " stimuli on http://" << host << ":" << port
            << std::endl;
        server.listen_after_bind();
        g_server = nullptr;
    }

    void run_pipeline() {
        const auto summary = pipeline::run_pipeline(pipeline::load_config(config_path));
        out << "pipeline: " << summary.maps << " maps, " << summary.stimuli << " stimuli"
            << (summary.ratings_analyzed ? ", ratings analyzed" : "") << "; report at "
            << summary.report_json.string() << '\n';
    }

    void synth() {
        envmap::save(synthetic::by_name(kind, synth_width, seed), out_path);
        out << kind << " map (" << synth_width << "x" << synth_width / 2 << ") written to " << out_path << '\n';
    }
};

void build(CLI::App& app, Commands& c) {
    app.require_subcommand(1);

    auto* fc = app.add_subcommand("fresnel-curve", "Unpolarized Fresnel reflectance vs incident angle (CSV)");
    fc->add_option("--n", c.n, "Real part of the index of refraction")->required();
    fc->add_option("--k", c.k, "Extinction coefficient")->default_val(0.0);
    fc->add_option("--step", c.step, "Angle step in degrees (0, 10]")->default_val(1.0);
    fc->add_option("--out", c.out_path, "Output CSV")->required();
    fc->callback([&] { c.action = [&] { c.fresnel_curve(); }; });

    auto* fl = app.add_subcommand("filter", "Gaussian low/high-pass of an equirectangular map");
    fl->add_option("--in", c.in_path)->required();
    fl->add_option("--width", c.width, "Filter width in pixels")->required();
    fl->add_option("--mode", c.mode, "low or high")->default_val("low");
    fl->add_option("--sigma-per-width", c.sigma_per_width, "sigma = width * ratio")->default_val(1.0 / 6.0);
    fl->add_option("--reference-width", c.reference_width,
                   "Treat --width as quoted at this map width and rescale (e.g. 4800)");
    fl->add_option("--out", c.out_path)->required();
    fl->callback([&] { c.action = [&] { c.filter(); }; });

    auto* sc = app.add_subcommand("scale", "Multiply map radiance by a factor");
    sc->add_option("--in", c.in_path)->required();
    sc->add_option("--factor", c.factor)->required();
    sc->add_option("--out", c.out_path)->required();
    sc->callback([&] { c.action = [&] { c.scale(); }; });

    auto* ds = app.add_subcommand("desaturate", "Replace every pixel by its Rec.709 luma");
    ds->add_option("--in", c.in_path)->required();
    ds->add_option("--out", c.out_path)->required();
    ds->callback([&] { c.action = [&] { c.desaturate(); }; });

    auto* sh = app.add_subcommand("sh-analyze", "Spherical-harmonic spectrum, per-order power and metrics");
    sh->add_option("--in", c.in_path)->required();
    sh->add_option("--max-order", c.max_order)->default_val(sphharm::kBrillianceOrder);
    sh->add_option("--out", c.out_path, "Coefficient CSV (l,m,coeff)")->required();
    sh->add_option("--powers", c.powers_path, "Per-order power CSV (default <out>_powers.csv)");
    sh->add_option("--metrics", c.metrics_path, "Metrics JSON (default <out>_metrics.json)");
    sh->add_option("--power-mode", c.power_mode, "rms or sumsq")->default_val("rms");
    sh->add_option("--quadrature", c.quadrature, "fejer or midpoint")->default_val("fejer");
    sh->callback([&] { c.action = [&] { c.sh_analyze(); }; });

    auto* rd = app.add_subcommand("render", "Render one stimulus");
    rd->add_option("--map", c.in_path)->required();
    rd->add_option("--material", c.material, "metal, shiny-black or shiny-white")->default_val("metal");
    rd->add_option("--factor", c.factor)->default_val(1.0);
    rd->add_option("--size", c.size)->default_val(512);
    rd->add_option("--object", c.object, "sphere, bumpy-low or bumpy-high")->default_val("sphere");
    rd->add_option("--exposure-scale", c.exposure_scale, "Reuse a scale instead of normalizing");
    rd->add_option("--preblur", c.preblur, "Pre-lookup blur width in map pixels");
    rd->add_option("--out", c.out_path)->required();
    rd->add_option("--mask", c.mask_path);
    rd->callback([&] { c.action = [&] { c.render(); }; });

    auto* cv = app.add_subcommand("coverage", "Specular coverage and mean intensity of a stimulus");
    cv->add_option("--img", c.img_path)->required();
    cv->add_option("--mask", c.mask_path, "Mask PNG; without it pixels equal to 100 are background");
    cv->add_option("--threshold", c.threshold)->default_val(imstats::kDefaultThreshold);
    cv->add_flag("--json", c.as_json);
    cv->callback([&] { c.action = [&] { c.coverage(); }; });

    auto* bs = app.add_subcommand("bias", "Bias index per light map from a ratings CSV");
    bs->add_option("--ratings", c.ratings_path)->required();
    bs->add_option("--map", c.map_id, "Single light map id");
    bs->callback([&] { c.action = [&] { c.bias(); }; });

    auto* rg = app.add_subcommand("regress", "Least-squares fit joining two keyed CSV tables");
    rg->add_option("--x", c.x_spec, "file.csv:column")->required();
    rg->add_option("--y", c.y_spec, "file.csv[:column]")->required();
    rg->callback([&] { c.action = [&] { c.regress(); }; });

    auto* sv = app.add_subcommand("serve", "Run the rating experiment service");
    sv->add_option("--stimuli", c.stimuli_dir, "Directory with catalog.csv and stimulus PNGs")->required();
    sv->add_option("--store", c.store_path, "Append-only ratings log (NDJSON)")->required();
    sv->add_option("--port", c.port)->default_val(8080);
    sv->add_option("--host", c.host)->default_val("127.0.0.1");
    sv->callback([&] { c.action = [&] { c.serve(); }; });

    auto* pl = app.add_subcommand("pipeline", "Run map -> render -> coverage -> metrics -> regression");
    pl->add_option("--config", c.config_path)->required();
    pl->callback([&] { c.action = [&] { c.run_pipeline(); }; });

    auto* sy = app.add_subcommand("synth", "Write a procedural light map");
    sy->add_option("--kind", c.kind, "sparse, broad, constant or noise")->default_val("sparse");
    sy->add_option("--width", c.synth_width)->default_val(512);
    sy->add_option("--seed", c.seed)->default_val(1);
    sy->add_option("--out", c.out_path)->required();
    sy->callback([&] { c.action = [&] { c.synth(); }; });
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app("Illumination statistics and shiny-material stimulus toolkit", "glossmap");
    Commands commands{out};
    build(app, commands);
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    try {
        if (commands.action) commands.action();
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace glossmap::cli
