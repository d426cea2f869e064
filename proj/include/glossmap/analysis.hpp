#pragma once

#include "glossmap/error.hpp"
#include "glossmap/specrender.hpp"

#include <array>
#include <compare>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace glossmap::analysis {

using specrender::MaterialKind;

struct StimulusKey {
    std::string object;
    MaterialKind material = MaterialKind::metal;
    std::string light_map;
    double factor = 1.0;

    auto operator<=>(const StimulusKey&) const = default;
    bool operator==(const StimulusKey&) const = default;
};

/// Same string as specrender::Stimulus::id() for the same key.
std::string stimulus_id(const StimulusKey& key);

enum class Category { metal = 0, shiny_black = 1, shiny_white = 2, other = 3 };
inline constexpr std::array<const char*, 4> kCategoryNames = {"metal", "shiny_black", "shiny_white", "other"};

/// Confidence percentages for the four response categories.
struct Ratings {
    std::array<double, 4> values{};

    double operator[](Category c) const { return values[static_cast<int>(c)]; }
    double sum() const { return values[0] + values[1] + values[2] + values[3]; }
};

/// Tolerance on the sum-to-100 constraint for real-valued ratings.
inline constexpr double kSumTolerance = 1e-9;

struct RatingRecord {
    std::string observer;
    int session = 1;
    StimulusKey stimulus;
    Ratings ratings;
};

/// Throws DomainError (with the offending sum) unless every rating is in
/// [0, 100], they sum to 100 and the session is 1 or 2.
void validate(const RatingRecord& record);

class MissingDataError : public Error {
public:
    explicit MissingDataError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

// -- Ratings CSV ------------------------------------------------------------

/// observer,session,object,material,light_map,factor,metal,shiny_black,shiny_white,other
inline constexpr const char* kRatingsHeader =
    "observer,session,object,material,light_map,factor,metal,shiny_black,shiny_white,other";

/// Rejects malformed rows and sum violations with 1-based line numbers.
std::vector<RatingRecord> read_ratings_csv(std::istream& in);
std::vector<RatingRecord> read_ratings_csv(const std::string& path);
void write_ratings_csv(std::ostream& out, std::span<const RatingRecord> records);
/// One CSV row (no newline) in the schema above.
std::string ratings_csv_row(const RatingRecord& record);

/// Shortest text that parses back to the same double.
std::string format_number(double value);

// -- Aggregation ------------------------------------------------------------

struct ConditionKey {
    std::string light_map;
    MaterialKind material = MaterialKind::metal;
    double factor = 1.0;

    auto operator<=>(const ConditionKey&) const = default;
    bool operator==(const ConditionKey&) const = default;
};

std::string to_string(const ConditionKey& key);

struct ConditionSummary {
    ConditionKey key;
    std::size_t n = 0;
    std::array<double, 4> mean{};
    /// Sample standard deviation over sqrt(n); 0 when n == 1.
    std::array<double, 4> sem{};
    bool single_sample = false;
};

/// Every condition present in `records`, sorted by key.
std::vector<ConditionSummary> aggregate(std::span<const RatingRecord> records);
/// Throws MissingDataError naming the key when no record matches.
ConditionSummary aggregate(std::span<const RatingRecord> records, const ConditionKey& key);

/// Mean metal confidence over the metal and shiny-black stimuli (every
/// intensity factor) shown with `light_map`, divided by their mean
/// shiny-black confidence.
double bias_index(std::span<const RatingRecord> records, const std::string& light_map);

// -- Regression -------------------------------------------------------------

struct RegressionFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t n_points = 0;
};

/// Ordinary least squares y = slope * x + intercept with R^2 = 1 - SS_res / SS_tot.
/// A constant y gives R^2 = 1 (zero residual). Throws NumericError for constant x.
RegressionFit linear_fit(std::span<const double> x, std::span<const double> y);

struct CategoryFits {
    RegressionFit shiny_black;
    RegressionFit metal;
};

/// Regresses per-stimulus mean shiny-black and metal confidence on a
/// per-stimulus predictor (coverage, mean intensity, ...). Shiny-white
/// stimuli are skipped. Every rated metal/shiny-black stimulus needs a predictor.
CategoryFits rating_regression(const std::map<StimulusKey, double>& predictor, std::span<const RatingRecord> records);

inline CategoryFits coverage_rating_correlation(const std::map<StimulusKey, double>& coverage,
                                                std::span<const RatingRecord> records) {
    return rating_regression(coverage, records);
}

// -- Keyed numeric tables ---------------------------------------------------

/// First column is the row id, the header names the columns.
struct KeyedTable {
    std::vector<std::string> columns;  // excluding the id column
    std::vector<std::string> ids;
    std::vector<std::vector<double>> rows;

    std::vector<double> column(const std::string& name) const;
    double value(const std::string& id, const std::string& column) const;
};

KeyedTable read_keyed_table(std::istream& in);
KeyedTable read_keyed_table(const std::string& path);

/// Fit of y_column against x_column after joining the two tables on the id column.
RegressionFit fit_columns(const KeyedTable& x_table, const std::string& x_column, const KeyedTable& y_table,
                          const std::string& y_column);

}  // namespace glossmap::analysis
