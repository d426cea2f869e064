#include "glossmap/exprig.hpp"

#include <json.hpp>

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

namespace glossmap::exprig {

using nlohmann::json;

namespace {

bool valid_token(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '-' || c == '_' || c == '.';
    });
}

/// Appends one line and fsyncs before returning.
void durable_append(const std::filesystem::path& path, const std::string& line) {
    const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
    if (fd < 0) throw IoError(IoErrorCode::open_failed, "cannot open " + path.string() + ": " + std::strerror(errno));
    const std::string data = line + "\n";
    std::size_t written = 0;
    while (written < data.size()) {
        const ssize_t n = ::write(fd, data.data() + written, data.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            ::close(fd);
            throw IoError(IoErrorCode::write_failed, "append to " + path.string() + " failed");
        }
        written += static_cast<std::size_t>(n);
    }
    ::fsync(fd);
    ::close(fd);
}

std::vector<json> read_ndjson(const std::filesystem::path& path) {
    std::vector<json> out;
    std::ifstream in(path);
    if (!in) return out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::exception&) {
            // A torn final line from a crash mid-append is dropped; anything else is corruption.
            if (in.peek() == std::char_traits<char>::eof()) break;
            throw IoError(IoErrorCode::corrupt_data, path.string() + " line " + std::to_string(line_no) +
                                                         " is not valid JSON");
        }
    }
    return out;
}

json record_to_json(const std::string& session_id, const std::string& stimulus_id,
                    const analysis::RatingRecord& r) {
    return json{{"session_id", session_id},
                {"observer", r.observer},
                {"session", r.session},
                {"stimulus_id", stimulus_id},
                {"object", r.stimulus.object},
                {"material", specrender::to_string(r.stimulus.material)},
                {"light_map", r.stimulus.light_map},
                {"factor", r.stimulus.factor},
                {"metal", r.ratings.values[0]},
                {"shiny_black", r.ratings.values[1]},
                {"shiny_white", r.ratings.values[2]},
                {"other", r.ratings.values[3]}};
}

}  // namespace

std::string to_string(ConflictCode code) {
    switch (code) {
    case ConflictCode::duplicate_session: return "duplicate_session";
    case ConflictCode::unknown_session: return "unknown_session";
    case ConflictCode::already_recorded: return "already_recorded";
    case ConflictCode::out_of_order: return "out_of_order";
    case ConflictCode::session_complete: return "session_complete";
    }
    return "conflict";
}

// -- Catalog ----------------------------------------------------------------

Catalog::Catalog(std::vector<CatalogEntry> entries, std::size_t expected) : entries_(std::move(entries)) {
    if (entries_.size() != expected)
        throw CatalogError("stimulus catalog has " + std::to_string(entries_.size()) + " entries, expected " +
                           std::to_string(expected));
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (!valid_token(entries_[i].id)) throw CatalogError("invalid stimulus id '" + entries_[i].id + "'");
        if (!index_.emplace(entries_[i].id, i).second)
            throw CatalogError("duplicate stimulus id '" + entries_[i].id + "'");
    }
}

Catalog Catalog::load(const std::filesystem::path& dir, std::size_t expected) {
    const auto path = dir / "catalog.csv";
    std::ifstream in(path);
    if (!in) throw IoError(IoErrorCode::open_failed, "cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "id,image,object,material,light_map,factor")
        throw CatalogError(path.string() + ": unexpected header");
    std::vector<CatalogEntry> entries;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::istringstream row(line);
        std::string field;
        while (std::getline(row, field, ',')) f.push_back(field);
        if (f.size() != 6) throw CatalogError(path.string() + " line " + std::to_string(line_no) + ": expected 6 fields");
        CatalogEntry e;
        e.id = f[0];
        e.image = f[1];
        e.key.object = f[2];
        e.key.material = specrender::parse_material(f[3]);
        e.key.light_map = f[4];
        try {
            e.key.factor = std::stod(f[5]);
        } catch (const std::exception&) {
            throw CatalogError(path.string() + " line " + std::to_string(line_no) + ": bad factor");
        }
        entries.push_back(std::move(e));
    }
    return Catalog(std::move(entries), expected);
}

void Catalog::write(const std::filesystem::path& dir, const std::vector<CatalogEntry>& entries) {
    const auto path = dir / "catalog.csv";
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError(IoErrorCode::open_failed, "cannot create " + path.string());
    out << "id,image,object,material,light_map,factor\n";
    for (const CatalogEntry& e : entries)
        out << e.id << ',' << e.image << ',' << e.key.object << ',' << specrender::to_string(e.key.material) << ','
            << e.key.light_map << ',' << analysis::format_number(e.key.factor) << '\n';
}

const CatalogEntry& Catalog::at(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) throw CatalogError("unknown stimulus id '" + id + "'");
    return entries_[it->second];
}

std::vector<std::string> Catalog::ids() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.id);
    return out;
}

// -- Ordering ---------------------------------------------------------------

std::vector<std::string> shuffled_order(std::vector<std::string> ids, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto bounded = [&rng](std::uint64_t range) {
        const std::uint64_t reject_below = (0 - range) % range;
        std::uint64_t r;
        do r = rng();
        while (r < reject_below);
        return r % range;
    };
    for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[bounded(i)]);
    return ids;
}

// -- Service ----------------------------------------------------------------

ExperimentService::ExperimentService(Catalog catalog, std::filesystem::path store, std::string image_url_prefix)
    : catalog_(std::move(catalog)), store_(std::move(store)), image_url_prefix_(std::move(image_url_prefix)) {
    if (store_.has_parent_path()) std::filesystem::create_directories(store_.parent_path());
    replay();
}

std::string ExperimentService::session_id(const std::string& observer, int session) {
    return observer + "-s" + std::to_string(session);
}

std::filesystem::path ExperimentService::manifest_path() const {
    std::filesystem::path p = store_;
    p += ".sessions";
    return p;
}

void ExperimentService::replay() {
    for (const json& j : read_ndjson(manifest_path())) {
        SessionState s;
        s.observer = j.at("observer").get<std::string>();
        s.session = j.at("session").get<int>();
        s.seed = j.at("seed").get<std::uint64_t>();
        s.id = session_id(s.observer, s.session);
        s.order = shuffled_order(catalog_.ids(), s.seed);
        sessions_[s.id] = std::move(s);
    }
    for (const json& j : read_ndjson(store_)) {
        const std::string sid = j.at("session_id").get<std::string>();
        const auto it = sessions_.find(sid);
        if (it == sessions_.end()) throw IoError(IoErrorCode::corrupt_data, "ratings log names unknown session " + sid);
        const CatalogEntry& entry = catalog_.at(j.at("stimulus_id").get<std::string>());
        analysis::RatingRecord r;
        r.observer = it->second.observer;
        r.session = it->second.session;
        r.stimulus = entry.key;
        r.ratings.values = {j.at("metal").get<double>(), j.at("shiny_black").get<double>(),
                            j.at("shiny_white").get<double>(), j.at("other").get<double>()};
        records_.push_back(std::move(r));
        recorded_[sid].push_back(entry.id);
        SessionState& s = it->second;
        s.cursor = recorded_[sid].size();
        s.completed = s.cursor >= s.order.size();
    }
}

SessionState ExperimentService::start_session(const std::string& observer, int session, std::uint64_t seed) {
    if (!valid_token(observer)) throw DomainError("observer id must be non-empty [A-Za-z0-9._-]");
    if (session != 1 && session != 2) throw DomainError("session must be 1 or 2");
    std::lock_guard lock(mutex_);
    const std::string id = session_id(observer, session);
    if (sessions_.contains(id))
        throw ConflictError(ConflictCode::duplicate_session, "session " + id + " already exists");
    SessionState s{id, observer, session, seed, shuffled_order(catalog_.ids(), seed), 0, false};
    durable_append(manifest_path(), json{{"observer", observer}, {"session", session}, {"seed", seed}}.dump());
    sessions_[id] = s;
    return s;
}

const SessionState& ExperimentService::find(const std::string& session_id) const {
    const auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw ConflictError(ConflictCode::unknown_session, "no session " + session_id);
    return it->second;
}

SessionState ExperimentService::session(const std::string& session_id) const {
    std::lock_guard lock(mutex_);
    return find(session_id);
}

TrialRef ExperimentService::next_trial(const std::string& session_id) const {
    std::lock_guard lock(mutex_);
    const SessionState& s = find(session_id);
    TrialRef t;
    t.total = s.order.size();
    t.index = s.cursor;
    if (s.completed) {
        t.done = true;
        return t;
    }
    const CatalogEntry& e = catalog_.at(s.order[s.cursor]);
    t.stimulus_id = e.id;
    t.image_url = image_url_prefix_ + e.image;
    return t;
}

void ExperimentService::submit_rating(const std::string& session_id, const Submission& submission) {
    std::lock_guard lock(mutex_);
    SessionState& s = sessions_.at(find(session_id).id);
    const auto& done = recorded_[session_id];
    if (std::find(done.begin(), done.end(), submission.stimulus_id) != done.end())
        throw ConflictError(ConflictCode::already_recorded,
                            "stimulus " + submission.stimulus_id + " is already recorded for " + session_id);
    if (s.completed) throw ConflictError(ConflictCode::session_complete, "session " + session_id + " is complete");
    if (submission.stimulus_id != s.order[s.cursor])
        throw ConflictError(ConflictCode::out_of_order, "expected stimulus " + s.order[s.cursor] + ", got " +
                                                            submission.stimulus_id);

    analysis::RatingRecord r;
    r.observer = s.observer;
    r.session = s.session;
    r.stimulus = catalog_.at(submission.stimulus_id).key;
    r.ratings = submission.ratings;
    analysis::validate(r);

    durable_append(store_, record_to_json(session_id, submission.stimulus_id, r).dump());
    records_.push_back(std::move(r));
    recorded_[session_id].push_back(submission.stimulus_id);
    ++s.cursor;
    s.completed = s.cursor >= s.order.size();
}

std::vector<analysis::RatingRecord> ExperimentService::records() const {
    std::lock_guard lock(mutex_);
    return records_;
}

std::string ExperimentService::export_csv() const {
    std::lock_guard lock(mutex_);
    std::ostringstream out;
    analysis::write_ratings_csv(out, records_);
    return out.str();
}

}  // namespace glossmap::exprig
