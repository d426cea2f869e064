#include "glossmap/pipeline.hpp"

#include "glossmap/analysis.hpp"
#include "glossmap/envmap.hpp"
#include "glossmap/exprig.hpp"
#include "glossmap/imstats.hpp"
#include "glossmap/png_io.hpp"
#include "glossmap/sphharm.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace glossmap::pipeline {

namespace fs = std::filesystem;
using analysis::format_number;
using ojson = nlohmann::ordered_json;

namespace {

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::istringstream in(value);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw DomainError("config key '" + key + "': '" + value + "' is not a number");
    }
}

int to_int(const std::string& key, const std::string& value) {
    const double v = to_double(key, value);
    if (v != static_cast<int>(v)) throw DomainError("config key '" + key + "' must be an integer");
    return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw DomainError("config key '" + key + "' must be true or false");
}

fs::path resolve(const fs::path& base, const std::string& value) {
    const fs::path p(value);
    return p.is_absolute() ? p : base / p;
}

/// Runs one stage, re-throwing failures as StageError tagged with the stage name.
template <typename Fn>
auto stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(name, e.kind(), e.what());
    } catch (const fs::filesystem_error& e) {
        throw StageError(name, ErrorKind::io, e.what());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(IoErrorCode::open_failed, "cannot create " + path.string());
    out << text;
    if (!out) throw IoError(IoErrorCode::write_failed, "write failed for " + path.string());
}

ojson fit_json(const analysis::RegressionFit& f) {
    return ojson{{"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared}, {"n_points", f.n_points}};
}

}  // namespace

void PipelineConfig::validate() const {
    if (maps.empty()) throw DomainError("config lists no maps");
    std::set<std::string> ids;
    for (const auto& m : maps) {
        if (m.id.empty() || m.id.find_first_of(",/ \t") != std::string::npos)
            throw DomainError("map id '" + m.id + "' must be non-empty without commas, slashes or spaces");
        if (!ids.insert(m.id).second) throw DomainError("duplicate map id '" + m.id + "'");
    }
    if (objects.empty()) throw DomainError("config lists no objects");
    std::set<std::string> object_ids;
    for (const auto& o : objects) {
        specrender::ObjectShape::by_id(o);
        if (!object_ids.insert(o).second) throw DomainError("duplicate object '" + o + "'");
    }
    if (conditions.empty()) throw DomainError("config lists no conditions");
    for (const auto& c : conditions)
        if (!(c.factor > 0.0)) throw DomainError("condition factors must be > 0");
    if (size < 32) throw DomainError("size must be >= 32");
    if (threshold < 0 || threshold > 255) throw DomainError("threshold must lie in [0, 255]");
    if (max_order < sphharm::kBrillianceOrder)
        throw DomainError("max_order must be >= " + std::to_string(sphharm::kBrillianceOrder) + " for brilliance");
    if (map_filter != "none" && map_filter != "low" && map_filter != "high")
        throw DomainError("map_filter must be none, low or high");
    if (map_filter != "none" && !(map_filter_width > 0.0)) throw DomainError("map_filter_width must be > 0");
    if (!(sigma_per_width > 0.0)) throw DomainError("sigma_per_width must be > 0");
    if (preblur_width < 0.0) throw DomainError("preblur_width must be >= 0");
}

PipelineConfig parse_config(std::istream& in, const fs::path& base_dir) {
    PipelineConfig c;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw DomainError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "map") {
            const auto colon = value.find(':');
            if (colon == std::string::npos) throw DomainError("config line " + std::to_string(line_no) + ": map = id:path");
            c.maps.push_back({trim(value.substr(0, colon)), resolve(base_dir, trim(value.substr(colon + 1)))});
        } else if (key == "objects") {
            c.objects = split_list(value);
        } else if (key == "conditions") {
            c.conditions.clear();
            for (const std::string& item : split_list(value)) {
                const auto colon = item.find(':');
                if (colon == std::string::npos) throw DomainError("condition '" + item + "' must be material:factor");
                c.conditions.push_back({specrender::parse_material(trim(item.substr(0, colon))),
                                        to_double(key, trim(item.substr(colon + 1)))});
            }
        } else if (key == "output_dir") {
            c.output_dir = resolve(base_dir, value);
        } else if (key == "size") {
            c.size = to_int(key, value);
        } else if (key == "threshold") {
            c.threshold = to_int(key, value);
        } else if (key == "max_order") {
            c.max_order = to_int(key, value);
        } else if (key == "desaturate") {
            c.desaturate = to_bool(key, value);
        } else if (key == "map_filter") {
            c.map_filter = value;
        } else if (key == "map_filter_width") {
            c.map_filter_width = to_double(key, value);
        } else if (key == "sigma_per_width") {
            c.sigma_per_width = to_double(key, value);
        } else if (key == "preblur_width") {
            c.preblur_width = to_double(key, value);
        } else if (key == "ratings") {
            c.ratings = resolve(base_dir, value);
        } else {
            throw DomainError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    c.validate();
    return c;
}

PipelineConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(IoErrorCode::open_failed, "cannot open config " + path.string());
    return parse_config(in, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

Summary run_pipeline(const PipelineConfig& config) {
    stage("config", [&] { config.validate(); });
    const fs::path out_dir = config.output_dir;
    const fs::path stimuli_dir = out_dir / "stimuli";
    stage("report", [&] { fs::create_directories(stimuli_dir); });

    // Light maps.
    std::vector<specrender::LightMap> maps;
    stage("envmap", [&] {
        const envmap::BlurOptions blur{config.sigma_per_width};
        for (const MapSource& source : config.maps) {
            envmap::EquirectMap map = envmap::load(source.path);
            if (config.desaturate) map = envmap::desaturate(map);
            if (config.map_filter != "none") {
                const double width = envmap::rescale_width(config.map_filter_width, map.width());
                map = config.map_filter == "low" ? envmap::low_pass(map, width, blur)
                                                 : envmap::clamp_negative(envmap::high_pass(map, width, blur));
            }
            maps.push_back({source.id, std::move(map)});
        }
    });

    // Illumination statistics.
    struct MapStats {
        sphharm::OrderPowers powers;
        sphharm::Metrics metrics;
    };
    std::vector<MapStats> stats;
    stage("sphharm", [&] {
        for (const auto& m : maps) {
            const auto powers = sphharm::order_powers(sphharm::project(m.map, config.max_order));
            stats.push_back({powers, sphharm::metrics(powers)});
        }
    });

    // Stimuli.
    std::vector<specrender::Stimulus> stimuli;
    stage("render", [&] {
        specrender::RenderOptions options;
        options.size = config.size;
        options.preblur_width = config.preblur_width;
        stimuli = specrender::render_condition_set(maps, config.objects, config.conditions, options);
        std::vector<exprig::CatalogEntry> catalog;
        for (const auto& s : stimuli) {
            const std::string id = s.id();
            png::write_gray8(stimuli_dir / (id + ".png"), s.image);
            png::write_mask(stimuli_dir / (id + "_mask.png"), s.mask, s.image.width, s.image.height);
            catalog.push_back({id, id + ".png", {s.meta.object, s.meta.material, s.meta.light_map, s.meta.factor}});
        }
        exprig::Catalog::write(stimuli_dir, catalog);
    });

    // Image statistics.
    std::vector<imstats::CoverageResult> coverage;
    std::vector<double> mean_intensity;
    stage("imstats", [&] {
        for (const auto& s : stimuli) {
            coverage.push_back(imstats::specular_coverage(s, config.threshold));
            mean_intensity.push_back(imstats::mean_intensity(s));
        }
    });

    ojson report;
    report["config"] = ojson{{"size", config.size},
                             {"threshold", config.threshold},
                             {"max_order", config.max_order},
                             {"desaturate", config.desaturate},
                             {"map_filter", config.map_filter},
                             {"map_filter_width", config.map_filter_width},
                             {"sigma_per_width", config.sigma_per_width},
                             {"preblur_width", config.preblur_width}};

    std::ostringstream stimuli_csv;
    stimuli_csv << "stimulus_id,object,material,light_map,factor,exposure_scale,renormalized,coverage,mean_intensity,"
                   "object_pixels\n";
    ojson stimuli_json = ojson::array();
    for (std::size_t i = 0; i < stimuli.size(); ++i) {
        const auto& m = stimuli[i].meta;
        stimuli_csv << stimuli[i].id() << ',' << m.object << ',' << specrender::to_string(m.material) << ','
                    << m.light_map << ',' << format_number(m.factor) << ',' << format_number(m.exposure_scale) << ','
                    << (m.renormalized ? 1 : 0) << ',' << format_number(coverage[i].coverage) << ','
                    << format_number(mean_intensity[i]) << ',' << coverage[i].object_pixels << '\n';
        stimuli_json.push_back(ojson{{"stimulus_id", stimuli[i].id()},
                                     {"object", m.object},
                                     {"material", specrender::to_string(m.material)},
                                     {"light_map", m.light_map},
                                     {"factor", m.factor},
                                     {"exposure_scale", m.exposure_scale},
                                     {"renormalized", m.renormalized},
                                     {"coverage", coverage[i].coverage},
                                     {"mean_intensity", mean_intensity[i]}});
    }
    report["stimuli"] = stimuli_json;

    std::ostringstream maps_csv, powers_csv;
    maps_csv << "light_map,width,height,diffuseness,brilliance,diffuseness2\n";
    powers_csv << "light_map,l,rms_power\n";
    ojson maps_json = ojson::array();
    for (std::size_t i = 0; i < maps.size(); ++i) {
        const auto& s = stats[i];
        maps_csv << maps[i].id << ',' << maps[i].map.width() << ',' << maps[i].map.height() << ','
                 << format_number(s.metrics.diffuseness) << ',' << format_number(s.metrics.brilliance) << ','
                 << format_number(s.metrics.diffuseness2) << '\n';
        for (std::size_t l = 0; l < s.powers.powers.size(); ++l)
            powers_csv << maps[i].id << ',' << l << ',' << format_number(s.powers.powers[l]) << '\n';
        maps_json.push_back(ojson{{"light_map", maps[i].id},
                                  {"diffuseness", s.metrics.diffuseness},
                                  {"brilliance", s.metrics.brilliance},
                                  {"diffuseness2", s.metrics.diffuseness2},
                                  {"rms_power", s.powers.powers}});
    }
    report["maps"] = maps_json;

    Summary summary;
    summary.stimuli = stimuli.size();
    summary.maps = maps.size();

    std::string bias_text, regress_text;
    if (config.ratings) {
        stage("analysis", [&] {
            const auto records = analysis::read_ratings_csv(config.ratings->string());
            std::ostringstream bias_csv, regress_csv;
            bias_csv << "light_map,bias_index\n";
            regress_csv << "analysis,predictor,response,slope,intercept,r_squared,n_points\n";
            ojson bias_json = ojson::object();
            ojson regress_json = ojson::array();
            ojson skipped = ojson::array();

            std::vector<double> bias_values;
            std::vector<std::size_t> bias_maps;
            for (std::size_t i = 0; i < maps.size(); ++i) {
                const bool rated = std::any_of(records.begin(), records.end(), [&](const auto& r) {
                    return r.stimulus.light_map == maps[i].id;
                });
                if (!rated) continue;
                const double b = analysis::bias_index(records, maps[i].id);
                bias_csv << maps[i].id << ',' << format_number(b) << '\n';
                bias_json[maps[i].id] = b;
                bias_values.push_back(b);
                bias_maps.push_back(i);
            }

            auto emit = [&](const std::string& name, const std::string& x, const std::string& y,
                            const analysis::RegressionFit& f) {
                regress_csv << name << ',' << x << ',' << y << ',' << format_number(f.slope) << ','
                            << format_number(f.intercept) << ',' << format_number(f.r_squared) << ',' << f.n_points
                            << '\n';
                ojson j = fit_json(f);
                j["analysis"] = name;
                j["predictor"] = x;
                j["response"] = y;
                regress_json.push_back(j);
            };
            auto try_fit = [&](const std::string& name, const std::string& x_name, const std::string& y_name,
                               auto&& fit) {
                try {
                    fit();
                } catch (const NumericError& e) {
                    skipped.push_back(ojson{{"analysis", name}, {"predictor", x_name}, {"response", y_name},
                                            {"reason", e.what()}});
                } catch (const DomainError& e) {
                    skipped.push_back(ojson{{"analysis", name}, {"predictor", x_name}, {"response", y_name},
                                            {"reason", e.what()}});
                }
            };

            const std::pair<const char*, double sphharm::Metrics::*> metric_fields[] = {
                {"diffuseness", &sphharm::Metrics::diffuseness},
                {"brilliance", &sphharm::Metrics::brilliance},
                {"diffuseness2", &sphharm::Metrics::diffuseness2},
            };
            for (const auto& [name, field] : metric_fields) {
                try_fit("illumination", name, "bias_index", [&] {
                    std::vector<double> x;
                    for (std::size_t i : bias_maps) x.push_back(stats[i].metrics.*field);
                    emit("illumination", name, "bias_index", analysis::linear_fit(x, bias_values));
                });
            }

            std::map<analysis::StimulusKey, double> cov, mean;
            for (std::size_t i = 0; i < stimuli.size(); ++i) {
                const auto& m = stimuli[i].meta;
                const analysis::StimulusKey key{m.object, m.material, m.light_map, m.factor};
                cov[key] = coverage[i].coverage;
                mean[key] = mean_intensity[i];
            }
            for (const auto& [predictor, values] : {std::pair{"coverage", &cov}, std::pair{"mean_intensity", &mean}}) {
                try_fit("ratings", predictor, "shiny_black+metal", [&] {
                    const auto fits = analysis::rating_regression(*values, records);
                    emit("ratings", predictor, "shiny_black", fits.shiny_black);
                    emit("ratings", predictor, "metal", fits.metal);
                });
            }

            report["bias_index"] = bias_json;
            report["regressions"] = regress_json;
            report["skipped_regressions"] = skipped;
            bias_text = bias_csv.str();
            regress_text = regress_csv.str();
        });
        summary.ratings_analyzed = true;
    }

    stage("report", [&] {
        write_text(out_dir / "stimuli.csv", stimuli_csv.str());
        write_text(out_dir / "maps.csv", maps_csv.str());
        write_text(out_dir / "powers.csv", powers_csv.str());
        if (config.ratings) {
            write_text(out_dir / "bias.csv", bias_text);
            write_text(out_dir / "regressions.csv", regress_text);
        }
        summary.report_json = out_dir / "report.json";
        write_text(summary.report_json, report.dump(2) + "\n");
    });
    return summary;
}

}  // namespace glossmap::pipeline
