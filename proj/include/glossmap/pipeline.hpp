#pragma once

#include "glossmap/error.hpp"
#include "glossmap/specrender.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace glossmap::pipeline {

struct MapSource {
    std::string id;
    std::filesystem::path path;
};

/// Parsed from a flat `key = value` file; see README for the key list.
/// Relative paths resolve against the config file's directory.
struct PipelineConfig {
    std::vector<MapSource> maps;
    std::vector<specrender::Condition> conditions = specrender::default_conditions();
    std::vector<std::string> objects = {"sphere"};
    std::filesystem::path output_dir = "out";
    int size = 256;
    int threshold = 50;
    int max_order = 30;
    bool desaturate = true;
    /// none, low or high.
    std::string map_filter = "none";
    /// Filter width quoted at the 4800-pixel reference width; rescaled per map.
    double map_filter_width = 0.0;
    double sigma_per_width = 1.0 / 6.0;
    /// Pre-lookup blur in map pixels (roughness stand-in); 0 disables.
    double preblur_width = 0.0;
    std::optional<std::filesystem::path> ratings;

    /// Throws DomainError on duplicate ids, missing maps list, bad values.
    void validate() const;
};

PipelineConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = ".");
PipelineConfig load_config(const std::filesystem::path& path);

/// Failure inside one pipeline stage; what() starts with "[stage] ".
class StageError : public Error {
public:
    StageError(std::string stage, ErrorKind kind, const std::string& what)
        : Error(kind, "[" + stage + "] " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

struct Summary {
    std::size_t stimuli = 0;
    std::size_t maps = 0;
    bool ratings_analyzed = false;
    std::filesystem::path report_json;
};

/// map -> render -> coverage -> SH metrics -> (bias, regressions) and the
/// replication report under config.output_dir:
///
///   stimuli/           PNG stimuli, masks and catalog.csv
///   stimuli.csv        per-stimulus coverage and mean intensity
///   maps.csv           per-map diffuseness, brilliance, diffuseness2
///   powers.csv         per-map per-order RMS power
///   bias.csv, regressions.csv   when ratings are supplied
///   report.json        everything above in one document
///
/// Output is byte-identical for identical configs.
Summary run_pipeline(const PipelineConfig& config);

}  // namespace glossmap::pipeline
