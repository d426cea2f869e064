#include "glossmap/analysis.hpp"
#include "glossmap/error.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace glossmap;
using namespace glossmap::analysis;

namespace {

RatingRecord rec(const std::string& map, MaterialKind material, double factor, std::array<double, 4> v,
                 const std::string& observer = "o1", const std::string& object = "sphere") {
    return {observer, 1, {object, material, map, factor}, Ratings{v}};
}

// Squared Pearson correlation, an independent route to the OLS R^2.
double pearson_r2(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
        sxy += x[i] * y[i];
    }
    const double cov = sxy - sx * sy / n;
    return cov * cov / ((sxx - sx * sx / n) * (syy - sy * sy / n));
}

}  // namespace

TEST_CASE("rating validation") {
    CHECK_NOTHROW(validate(rec("m", MaterialKind::metal, 1, {25, 25, 25, 25})));
    CHECK_NOTHROW(validate(rec("m", MaterialKind::metal, 1, {100, 0, 0, 0})));
    try {
        validate(rec("m", MaterialKind::metal, 1, {30, 30, 30, 15}));
        FAIL("expected a validation error");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("105") != std::string::npos);
    }
    CHECK_THROWS_AS(validate(rec("m", MaterialKind::metal, 1, {-5, 50, 50, 5})), DomainError);
    RatingRecord bad_session = rec("m", MaterialKind::metal, 1, {25, 25, 25, 25});
    bad_session.session = 3;
    CHECK_THROWS_AS(validate(bad_session), DomainError);
}

TEST_CASE("bias index is mean metal over mean shiny-black confidence") {
    const std::vector<RatingRecord> r = {rec("hall", MaterialKind::metal, 1, {8, 61.5, 20.5, 10})};
    CHECK(bias_index(r, "hall") == doctest::Approx(0.13).epsilon(0.01));
    CHECK(bias_index(r, "hall") == doctest::Approx(8.0 / 61.5));
}

TEST_CASE("bias index pools metal and shiny-black stimuli and skips shiny-white") {
    const std::vector<RatingRecord> r = {
        rec("a", MaterialKind::metal, 1, {60, 20, 10, 10}),
        rec("a", MaterialKind::shiny_black, 5, {40, 40, 10, 10}),
        rec("a", MaterialKind::shiny_white, 1, {100, 0, 0, 0}),
        rec("b", MaterialKind::metal, 1, {0, 100, 0, 0}),
    };
    CHECK(bias_index(r, "a") == doctest::Approx(50.0 / 30.0));
    CHECK(bias_index(r, "b") == 0.0);
    CHECK_THROWS_AS(bias_index(r, "nowhere"), MissingDataError);
    const std::vector<RatingRecord> no_black = {rec("c", MaterialKind::metal, 1, {100, 0, 0, 0})};
    CHECK_THROWS_AS(bias_index(no_black, "c"), NumericError);
}

TEST_CASE("aggregation means and standard errors") {
    const std::vector<RatingRecord> r = {
        rec("a", MaterialKind::metal, 1, {40, 60, 0, 0}, "o1"),
        rec("a", MaterialKind::metal, 1, {60, 40, 0, 0}, "o2"),
        rec("a", MaterialKind::shiny_black, 1, {10, 90, 0, 0}, "o1"),
    };
    const ConditionSummary s = aggregate(r, ConditionKey{"a", MaterialKind::metal, 1.0});
    CHECK(s.n == 2);
    CHECK(s.mean[0] == doctest::Approx(50.0));
    CHECK(s.sem[0] == doctest::Approx(10.0));
    CHECK_FALSE(s.single_sample);

    const ConditionSummary one = aggregate(r, ConditionKey{"a", MaterialKind::shiny_black, 1.0});
    CHECK(one.single_sample);
    CHECK(one.sem[1] == 0.0);

    CHECK(aggregate(r).size() == 2);
    CHECK_THROWS_AS(aggregate(r, ConditionKey{"a", MaterialKind::shiny_white, 1.0}), MissingDataError);
}

TEST_CASE("linear fit against a correlation oracle") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(30), y(30);
        for (int i = 0; i < 30; ++i) {
            x[i] = g(rng);
            y[i] = 1.5 * x[i] - 2.0 + g(rng);
        }
        const RegressionFit f = linear_fit(x, y);
        CHECK(f.r_squared == doctest::Approx(pearson_r2(x, y)).epsilon(1e-9));
        CHECK(f.n_points == 30);
    }
    const std::vector<double> x = {0, 1, 2, 3}, y = {1, 3, 5, 7};
    const RegressionFit exact = linear_fit(x, y);
    CHECK(exact.slope == doctest::Approx(2.0));
    CHECK(exact.intercept == doctest::Approx(1.0));
    CHECK(exact.r_squared == doctest::Approx(1.0));
}

TEST_CASE("R^2 is invariant to affine transforms of either variable") {
    const std::vector<double> x = {0.74, 0.36, 0.60, 0.74, 0.17}, y = {0.13, 1.63, 1.66, 4.16, 4.51};
    const double base = linear_fit(x, y).r_squared;
    std::vector<double> x2, y2;
    for (double v : x) x2.push_back(-3.0 * v + 11.0);
    for (double v : y) y2.push_back(0.25 * v - 7.0);
    CHECK(linear_fit(x2, y).r_squared == doctest::Approx(base).epsilon(1e-12));
    CHECK(linear_fit(x, y2).r_squared == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("degenerate fits") {
    const std::vector<double> c = {1, 1, 1}, y = {1, 2, 3};
    CHECK_THROWS_AS(linear_fit(c, y), NumericError);
    const RegressionFit flat = linear_fit(y, c);
    CHECK(flat.slope == 0.0);
    CHECK(flat.r_squared == 1.0);
    CHECK_THROWS_AS(linear_fit(std::vector<double>{1}, std::vector<double>{2}), DomainError);
    CHECK_THROWS_AS(linear_fit(std::vector<double>{1, 2}, std::vector<double>{2}), DomainError);
}

TEST_CASE("table fixture reproduces the published correlations") {
    const KeyedTable t = read_keyed_table(std::string(GLOSSMAP_FIXTURES) + "/table1.csv");
    REQUIRE(t.ids.size() == 5);
    const auto bias = t.column("bias_index");
    // Oracle values from an independent least-squares computation.
    CHECK(linear_fit(t.column("diffuseness"), bias).r_squared == doctest::Approx(0.1778).epsilon(1e-3));
    CHECK(linear_fit(t.column("brilliance"), bias).r_squared == doctest::Approx(0.3889).epsilon(1e-3));
    CHECK(linear_fit(t.column("diffuseness2"), bias).r_squared == doctest::Approx(0.8869).epsilon(1e-3));
    CHECK(fit_columns(t, "diffuseness2", t, "bias_index").r_squared ==
          doctest::Approx(pearson_r2(t.column("diffuseness2"), bias)));
    CHECK_THROWS_AS(t.column("nope"), MissingDataError);
}

TEST_CASE("ratings CSV round trip") {
    const std::vector<RatingRecord> r = {
        rec("hall", MaterialKind::metal, 0.2, {12.5, 50, 37.5, 0}),
        rec("snow", MaterialKind::shiny_white, 1, {0, 0, 100, 0}, "o2", "bumpy-low"),
    };
    std::stringstream ss;
    write_ratings_csv(ss, r);
    const auto back = read_ratings_csv(ss);
    REQUIRE(back.size() == 2);
    CHECK(back[0].stimulus == r[0].stimulus);
    CHECK(back[0].ratings.values == r[0].ratings.values);
    CHECK(back[1].observer == "o2");
    CHECK(back[1].stimulus.object == "bumpy-low");
}

TEST_CASE("ratings CSV errors carry line numbers") {
    std::stringstream bad_sum;
    bad_sum << kRatingsHeader << "\n"
            << "o1,1,sphere,metal,hall,1,25,25,25,25\n"
            << "o1,1,sphere,metal,hall,1,30,30,30,15\n";
    try {
        read_ratings_csv(bad_sum);
        FAIL("expected an error");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    std::stringstream bad_header("a,b,c\n");
    CHECK_THROWS_AS(read_ratings_csv(bad_header), DomainError);
    std::stringstream short_row;
    short_row << kRatingsHeader << "\no1,1,sphere\n";
    CHECK_THROWS_AS(read_ratings_csv(short_row), DomainError);
}

TEST_CASE("stimulus regression on a per-stimulus predictor") {
    std::map<StimulusKey, double> coverage;
    std::vector<RatingRecord> r;
    for (int i = 0; i < 6; ++i) {
        const std::string map = "m" + std::to_string(i);
        const double c = 0.1 * i;
        coverage[{"sphere", MaterialKind::metal, map, 1.0}] = c;
        coverage[{"sphere", MaterialKind::shiny_black, map, 1.0}] = c;
        r.push_back(rec(map, MaterialKind::metal, 1, {20 + 100 * c, 80 - 100 * c, 0, 0}));
        r.push_back(rec(map, MaterialKind::shiny_black, 1, {20 + 100 * c, 80 - 100 * c, 0, 0}));
        r.push_back(rec(map, MaterialKind::shiny_white, 1, {0, 0, 100, 0}));
    }
    const CategoryFits f = rating_regression(coverage, r);
    CHECK(f.metal.r_squared == doctest::Approx(1.0));
    CHECK(f.metal.slope > 0.0);
    CHECK(f.shiny_black.slope < 0.0);
    CHECK(f.metal.n_points == 12);
    r.push_back(rec("unknown", MaterialKind::metal, 1, {25, 25, 25, 25}));
    CHECK_THROWS_AS(rating_regression(coverage, r), MissingDataError);
}

TEST_CASE("number formatting round-trips") {
    CHECK(format_number(0.2) == "0.2");
    CHECK(format_number(5) == "5");
    CHECK(std::stod(format_number(0.1 + 0.2)) == 0.1 + 0.2);
    CHECK(stimulus_id({"sphere", MaterialKind::shiny_black, "hall", 5}) == "sphere__hall__shiny_black__x5");
}
