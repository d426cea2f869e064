#include "glossmap/analysis.hpp"
#include "glossmap/exprig.hpp"

#include "catalog_fixture.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

using namespace glossmap;
using namespace glossmap::exprig;

namespace {

ConflictCode conflict_of(ExperimentService& svc, const std::string& sid, const Submission& sub) {
    try {
        svc.submit_rating(sid, sub);
    } catch (const ConflictError& e) {
        return e.code();
    }
    FAIL("expected a conflict");
    return ConflictCode::unknown_session;
}

void run_session(ExperimentService& svc, const std::string& sid) {
    for (std::size_t i = 0;; ++i) {
        const TrialRef t = svc.next_trial(sid);
        if (t.done) break;
        svc.submit_rating(sid, {t.stimulus_id, testing::scripted_ratings(svc.catalog().at(t.stimulus_id).key, i)});
    }
}

}  // namespace

TEST_CASE("catalog size and ids are enforced") {
    auto entries = testing::catalog_entries();
    CHECK(entries.size() == kCatalogSize);
    CHECK_NOTHROW(Catalog{entries});
    auto short_list = entries;
    short_list.pop_back();
    CHECK_THROWS_AS(Catalog{short_list}, CatalogError);
    auto dup = entries;
    dup[1].id = dup[0].id;
    CHECK_THROWS_AS(Catalog{dup}, CatalogError);
    auto bad = entries;
    bad[3].id = "has space";
    CHECK_THROWS_AS(Catalog{bad}, CatalogError);
    CHECK_NOTHROW(Catalog(short_list, 74));
}

TEST_CASE("catalog.csv round trip") {
    testing::TempDir dir("catalog");
    Catalog::write(dir.path(), testing::catalog_entries());
    const Catalog c = Catalog::load(dir.path());
    CHECK(c.entries().size() == 75);
    const auto& e = c.at("bumpy-high__snowfield__shiny_black__x5");
    CHECK(e.key.factor == 5.0);
    CHECK(e.image == "bumpy-high__snowfield__shiny_black__x5.png");
    CHECK_THROWS_AS(Catalog::load(dir / "missing"), IoError);
}

TEST_CASE("trial order is a seeded permutation") {
    const Catalog c(testing::catalog_entries());
    const auto a = shuffled_order(c.ids(), 42);
    const auto b = shuffled_order(c.ids(), 42);
    const auto other = shuffled_order(c.ids(), 43);
    CHECK(a == b);
    CHECK(a != other);
    CHECK(std::set<std::string>(a.begin(), a.end()).size() == 75);
    auto sorted_a = a, sorted_ids = c.ids();
    std::sort(sorted_a.begin(), sorted_a.end());
    std::sort(sorted_ids.begin(), sorted_ids.end());
    CHECK(sorted_a == sorted_ids);
}

TEST_CASE("shuffle positions are roughly uniform") {
    std::vector<std::string> ids = {"a", "b", "c", "d"};
    std::map<std::string, int> first;
    for (std::uint64_t seed = 0; seed < 4000; ++seed) ++first[shuffled_order(ids, seed)[0]];
    for (const auto& [id, n] : first) CHECK(std::abs(n - 1000) < 150);
}

TEST_CASE("a full session persists every rating") {
    testing::TempDir dir("session");
    ExperimentService svc(Catalog(testing::catalog_entries()), dir / "ratings.ndjson");
    const SessionState s = svc.start_session("obs1", 1, 7);
    CHECK(s.id == "obs1-s1");
    CHECK(s.order == shuffled_order(svc.catalog().ids(), 7));
    run_session(svc, s.id);
    CHECK(svc.session(s.id).completed);
    CHECK(svc.records().size() == 75);
    for (const auto& r : svc.records()) CHECK(r.ratings.sum() == doctest::Approx(100.0));
    CHECK(svc.next_trial(s.id).done);

    std::ifstream log(dir / "ratings.ndjson");
    std::size_t lines = 0;
    for (std::string line; std::getline(log, line);) lines += !line.empty();
    CHECK(lines == 75);
}

TEST_CASE("submission rules") {
    testing::TempDir dir("rules");
    ExperimentService svc(Catalog(testing::catalog_entries()), dir / "ratings.ndjson");
    const std::string sid = svc.start_session("obs2", 2, 3).id;
    const TrialRef t0 = svc.next_trial(sid);

    CHECK_THROWS_AS(svc.submit_rating(sid, {t0.stimulus_id, {{30, 30, 30, 15}}}), DomainError);
    CHECK(svc.session(sid).cursor == 0);
    CHECK(svc.records().empty());

    const std::string later = svc.session(sid).order[5];
    CHECK(conflict_of(svc, sid, {later, {{25, 25, 25, 25}}}) == ConflictCode::out_of_order);

    svc.submit_rating(sid, {t0.stimulus_id, {{25, 25, 25, 25}}});
    CHECK(svc.session(sid).cursor == 1);
    CHECK(conflict_of(svc, sid, {t0.stimulus_id, {{25, 25, 25, 25}}}) == ConflictCode::already_recorded);
    CHECK(conflict_of(svc, "ghost-s1", {t0.stimulus_id, {{25, 25, 25, 25}}}) == ConflictCode::unknown_session);

    CHECK_THROWS_AS(svc.start_session("obs2", 2, 9), ConflictError);
    CHECK_THROWS_AS(svc.start_session("", 1, 9), DomainError);
    CHECK_THROWS_AS(svc.start_session("obs3", 3, 9), DomainError);
}

TEST_CASE("a completed session rejects further submissions") {
    testing::TempDir dir("complete");
    ExperimentService svc(Catalog(testing::catalog_entries()), dir / "ratings.ndjson");
    const std::string sid = svc.start_session("o", 1, 1).id;
    run_session(svc, sid);
    // Every id is already recorded, so the duplicate check fires first.
    CHECK(conflict_of(svc, sid, {svc.catalog().ids()[0], {{25, 25, 25, 25}}}) == ConflictCode::already_recorded);
    CHECK(conflict_of(svc, sid, {"not-in-catalog", {{25, 25, 25, 25}}}) == ConflictCode::session_complete);
}

TEST_CASE("a restarted service resumes where it stopped") {
    testing::TempDir dir("restart");
    const auto store = dir / "ratings.ndjson";
    std::string sid;
    std::string expected_next;
    {
        ExperimentService svc(Catalog(testing::catalog_entries()), store);
        sid = svc.start_session("obs", 1, 99).id;
        for (int i = 0; i < 10; ++i) {
            const TrialRef t = svc.next_trial(sid);
            svc.submit_rating(sid, {t.stimulus_id, {{10, 20, 30, 40}}});
        }
        expected_next = svc.next_trial(sid).stimulus_id;
    }
    ExperimentService again(Catalog(testing::catalog_entries()), store);
    CHECK(again.session(sid).cursor == 10);
    CHECK(again.next_trial(sid).stimulus_id == expected_next);
    CHECK(again.records().size() == 10);
    CHECK_THROWS_AS(again.start_session("obs", 1, 5), ConflictError);
}

TEST_CASE("a torn final log line is dropped on replay") {
    testing::TempDir dir("torn");
    const auto store = dir / "ratings.ndjson";
    std::string sid;
    {
        ExperimentService svc(Catalog(testing::catalog_entries()), store);
        sid = svc.start_session("obs", 1, 5).id;
        for (int i = 0; i < 3; ++i) svc.submit_rating(sid, {svc.next_trial(sid).stimulus_id, {{25, 25, 25, 25}}});
    }
    std::ofstream(store, std::ios::app) << "{\"session_id\":\"obs-s1\",\"stim";
    ExperimentService again(Catalog(testing::catalog_entries()), store);
    CHECK(again.session(sid).cursor == 3);
}

TEST_CASE("export feeds the analysis end to end") {
    testing::TempDir dir("export");
    ExperimentService svc(Catalog(testing::catalog_entries()), dir / "ratings.ndjson");
    run_session(svc, svc.start_session("a", 1, 11).id);
    run_session(svc, svc.start_session("b", 1, 12).id);
    std::istringstream csv(svc.export_csv());
    const auto records = analysis::read_ratings_csv(csv);
    CHECK(records.size() == 150);
    const double b = analysis::bias_index(records, "atrium");
    CHECK(b > 0.0);
    CHECK(b == doctest::Approx(analysis::bias_index(svc.records(), "atrium")));
}
