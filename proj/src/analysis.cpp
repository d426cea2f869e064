#include "glossmap/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace glossmap::analysis {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

double parse_double(const std::string& text, const std::string& where) {
    const std::string t = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || !std::isfinite(value))
        throw DomainError(where + ": '" + text + "' is not a number");
    return value;
}

std::string sum_text(double sum) { return format_number(sum); }

}  // namespace

std::string stimulus_id(const StimulusKey& key) {
    return key.object + "__" + key.light_map + "__" + specrender::to_string(key.material) + "__x" +
           specrender::format_factor(key.factor);
}

std::string format_number(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return ec == std::errc() ? std::string(buf, ptr) : std::to_string(value);
}

void validate(const RatingRecord& record) {
    if (record.session != 1 && record.session != 2) throw DomainError("session must be 1 or 2");
    for (std::size_t i = 0; i < 4; ++i) {
        const double v = record.ratings.values[i];
        if (!std::isfinite(v) || v < 0.0 || v > 100.0)
            throw DomainError(std::string(kCategoryNames[i]) + " rating must lie in [0, 100]");
    }
    const double sum = record.ratings.sum();
    if (std::abs(sum - 100.0) > kSumTolerance) throw DomainError("ratings must sum to 100, got " + sum_text(sum));
}

// -- CSV --------------------------------------------------------------------

std::string ratings_csv_row(const RatingRecord& r) {
    std::string row = r.observer + "," + std::to_string(r.session) + "," + r.stimulus.object + "," +
                      specrender::to_string(r.stimulus.material) + "," + r.stimulus.light_map + "," +
                      format_number(r.stimulus.factor);
    for (double v : r.ratings.values) row += "," + format_number(v);
    return row;
}

void write_ratings_csv(std::ostream& out, std::span<const RatingRecord> records) {
    out << kRatingsHeader << '\n';
    for (const RatingRecord& r : records) out << ratings_csv_row(r) << '\n';
}

std::vector<RatingRecord> read_ratings_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != kRatingsHeader)
        throw DomainError("ratings CSV line 1: expected header '" + std::string(kRatingsHeader) + "'");
    std::vector<RatingRecord> out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const std::string where = "ratings CSV line " + std::to_string(line_no);
        const auto f = split_csv(line);
        if (f.size() != 10) throw DomainError(where + ": expected 10 fields, got " + std::to_string(f.size()));
        RatingRecord r;
        r.observer = trim(f[0]);
        const double session = parse_double(f[1], where);
        r.session = static_cast<int>(session);
        if (session != r.session) throw DomainError(where + ": session must be an integer");
        r.stimulus.object = trim(f[2]);
        try {
            r.stimulus.material = specrender::parse_material(trim(f[3]));
        } catch (const DomainError& e) {
            throw DomainError(where + ": " + e.what());
        }
        r.stimulus.light_map = trim(f[4]);
        r.stimulus.factor = parse_double(f[5], where);
        for (int i = 0; i < 4; ++i) r.ratings.values[i] = parse_double(f[6 + i], where);
        try {
            validate(r);
        } catch (const DomainError& e) {
            throw DomainError(where + ": " + e.what());
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<RatingRecord> read_ratings_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(IoErrorCode::open_failed, "cannot open " + path);
    return read_ratings_csv(in);
}

// -- Aggregation ------------------------------------------------------------

std::string to_string(const ConditionKey& key) {
    return key.light_map + "/" + specrender::to_string(key.material) + "/x" + specrender::format_factor(key.factor);
}

namespace {

ConditionKey condition_of(const RatingRecord& r) {
    return {r.stimulus.light_map, r.stimulus.material, r.stimulus.factor};
}

ConditionSummary summarize(const ConditionKey& key, const std::vector<const RatingRecord*>& group) {
    ConditionSummary s;
    s.key = key;
    s.n = group.size();
    s.single_sample = s.n == 1;
    for (int c = 0; c < 4; ++c) {
        double sum = 0.0;
        for (const RatingRecord* r : group) sum += r->ratings.values[c];
        const double mean = sum / static_cast<double>(s.n);
        s.mean[c] = mean;
        if (s.n < 2) continue;
        double ss = 0.0;
        for (const RatingRecord* r : group) ss += (r->ratings.values[c] - mean) * (r->ratings.values[c] - mean);
        s.sem[c] = std::sqrt(ss / static_cast<double>(s.n - 1)) / std::sqrt(static_cast<double>(s.n));
    }
    return s;
}

}  // namespace

std::vector<ConditionSummary> aggregate(std::span<const RatingRecord> records) {
    std::map<ConditionKey, std::vector<const RatingRecord*>> groups;
    for (const RatingRecord& r : records) groups[condition_of(r)].push_back(&r);
    std::vector<ConditionSummary> out;
    out.reserve(groups.size());
    for (const auto& [key, group] : groups) out.push_back(summarize(key, group));
    return out;
}

ConditionSummary aggregate(std::span<const RatingRecord> records, const ConditionKey& key) {
    std::vector<const RatingRecord*> group;
    for (const RatingRecord& r : records)
        if (condition_of(r) == key) group.push_back(&r);
    if (group.empty()) throw MissingDataError("no ratings for condition " + to_string(key));
    return summarize(key, group);
}

double bias_index(std::span<const RatingRecord> records, const std::string& light_map) {
    double metal = 0.0, black = 0.0;
    std::size_t n = 0;
    for (const RatingRecord& r : records) {
        if (r.stimulus.light_map != light_map || r.stimulus.material == MaterialKind::shiny_white) continue;
        metal += r.ratings[Category::metal];
        black += r.ratings[Category::shiny_black];
        ++n;
    }
    if (n == 0) throw MissingDataError("no metal or shiny-black ratings for light map '" + light_map + "'");
    if (black == 0.0) throw NumericError("bias index undefined: mean shiny-black confidence is 0 for '" + light_map + "'");
    return (metal / static_cast<double>(n)) / (black / static_cast<double>(n));
}

// -- Regression -------------------------------------------------------------

RegressionFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DomainError("x and y must have equal length");
    if (x.size() < 2) throw DomainError("linear fit needs at least two points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw DomainError("regression inputs must be finite");
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw NumericError("degenerate fit: x is constant");

    RegressionFit fit;
    fit.n_points = x.size();
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (fit.slope * x[i] + fit.intercept);
        ss_res += e * e;
    }
    fit.r_squared = syy == 0.0 ? 1.0 : std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    return fit;
}

CategoryFits rating_regression(const std::map<StimulusKey, double>& predictor, std::span<const RatingRecord> records) {
    struct Acc {
        double metal = 0.0, black = 0.0;
        std::size_t n = 0;
    };
    std::map<StimulusKey, Acc> per_stimulus;
    for (const RatingRecord& r : records) {
        if (r.stimulus.material == MaterialKind::shiny_white) continue;
        Acc& a = per_stimulus[r.stimulus];
        a.metal += r.ratings[Category::metal];
        a.black += r.ratings[Category::shiny_black];
        ++a.n;
    }
    std::vector<double> x, metal, black;
    for (const auto& [key, acc] : per_stimulus) {
        const auto it = predictor.find(key);
        if (it == predictor.end()) throw MissingDataError("no predictor value for stimulus " + stimulus_id(key));
        x.push_back(it->second);
        metal.push_back(acc.metal / static_cast<double>(acc.n));
        black.push_back(acc.black / static_cast<double>(acc.n));
    }
    return {linear_fit(x, black), linear_fit(x, metal)};
}

// -- Keyed tables -----------------------------------------------------------

std::vector<double> KeyedTable::column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw MissingDataError("table has no column '" + name + "'");
    const std::size_t c = static_cast<std::size_t>(it - columns.begin());
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(row[c]);
    return out;
}

double KeyedTable::value(const std::string& id, const std::string& name) const {
    const auto it = std::find(ids.begin(), ids.end(), id);
    if (it == ids.end()) throw MissingDataError("table has no row '" + id + "'");
    const auto col = std::find(columns.begin(), columns.end(), name);
    if (col == columns.end()) throw MissingDataError("table has no column '" + name + "'");
    return rows[static_cast<std::size_t>(it - ids.begin())][static_cast<std::size_t>(col - columns.begin())];
}

KeyedTable read_keyed_table(std::istream& in) {
    KeyedTable t;
    std::string line;
    int line_no = 0;
    bool have_header = false;
    while (!have_header && std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        have_header = !trim(line).empty() && line[0] != '#';
    }
    if (!have_header) throw DomainError("table is empty");
    auto header = split_csv(line);
    if (header.size() < 2) throw DomainError("table needs an id column and at least one value column");
    for (std::size_t i = 1; i < header.size(); ++i) t.columns.push_back(trim(header[i]));
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || line[0] == '#') continue;
        const auto f = split_csv(line);
        const std::string where = "table line " + std::to_string(line_no);
        if (f.size() != header.size()) throw DomainError(where + ": wrong number of fields");
        t.ids.push_back(trim(f[0]));
        std::vector<double> row;
        for (std::size_t i = 1; i < f.size(); ++i) row.push_back(parse_double(f[i], where));
        t.rows.push_back(std::move(row));
    }
    return t;
}

KeyedTable read_keyed_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(IoErrorCode::open_failed, "cannot open " + path);
    return read_keyed_table(in);
}

RegressionFit fit_columns(const KeyedTable& x_table, const std::string& x_column, const KeyedTable& y_table,
                          const std::string& y_column) {
    std::vector<double> x, y;
    for (const std::string& id : x_table.ids) {
        if (std::find(y_table.ids.begin(), y_table.ids.end(), id) == y_table.ids.end())
            throw MissingDataError("row '" + id + "' missing from the y table");
        x.push_back(x_table.value(id, x_column));
        y.push_back(y_table.value(id, y_column));
    }
    return linear_fit(x, y);
}

}  // namespace glossmap::analysis
