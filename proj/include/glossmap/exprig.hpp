#pragma once

#include "glossmap/analysis.hpp"
#include "glossmap/error.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace glossmap::exprig {

/// 3 objects x 5 light maps x 5 conditions.
inline constexpr std::size_t kCatalogSize = 75;

struct CatalogEntry {
    std::string id;
    /// File name relative to the stimulus directory.
    std::string image;
    analysis::StimulusKey key;
};

/// The stimulus set an experiment draws from. Stored as catalog.csv
/// (id,image,object,material,light_map,factor) in the stimulus directory.
class Catalog {
public:
    /// Throws CatalogError unless there are exactly `expected` entries with unique ids.
    explicit Catalog(std::vector<CatalogEntry> entries, std::size_t expected = kCatalogSize);

    static Catalog load(const std::filesystem::path& dir, std::size_t expected = kCatalogSize);
    static void write(const std::filesystem::path& dir, const std::vector<CatalogEntry>& entries);

    const std::vector<CatalogEntry>& entries() const noexcept { return entries_; }
    const CatalogEntry& at(const std::string& id) const;
    std::vector<std::string> ids() const;

private:
    std::vector<CatalogEntry> entries_;
    std::map<std::string, std::size_t> index_;
};

class CatalogError : public Error {
public:
    explicit CatalogError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

enum class ConflictCode { duplicate_session, unknown_session, already_recorded, out_of_order, session_complete };

class ConflictError : public Error {
public:
    ConflictError(ConflictCode code, const std::string& what) : Error(ErrorKind::validation, what), code_(code) {}
    ConflictCode code() const noexcept { return code_; }

private:
    ConflictCode code_;
};

std::string to_string(ConflictCode code);

/// Seeded Fisher-Yates over mt19937_64; identical on every platform.
std::vector<std::string> shuffled_order(std::vector<std::string> ids, std::uint64_t seed);

struct SessionState {
    std::string id;
    std::string observer;
    int session = 1;
    std::uint64_t seed = 0;
    std::vector<std::string> order;
    std::size_t cursor = 0;
    bool completed = false;
};

struct TrialRef {
    bool done = false;
    std::string stimulus_id;
    std::string image_url;
    std::size_t index = 0;
    std::size_t total = 0;
};

struct Submission {
    std::string stimulus_id;
    analysis::Ratings ratings;
};

/// Sessions, trial sequencing and the durable ratings log.
///
/// Persistence is two append-only NDJSON files: the ratings log at
/// `store` and the session manifest at `store` + ".sessions". State is
/// rebuilt from both on construction, so a restarted service resumes every
/// session at its first unrated trial.
class ExperimentService {
public:
    ExperimentService(Catalog catalog, std::filesystem::path store, std::string image_url_prefix = "/stimuli/");

    SessionState start_session(const std::string& observer, int session, std::uint64_t seed);
    /// Current trial without advancing; a finished session returns done = true.
    TrialRef next_trial(const std::string& session_id) const;
    /// Validates, persists and advances the cursor.
    void submit_rating(const std::string& session_id, const Submission& submission);

    SessionState session(const std::string& session_id) const;
    std::vector<analysis::RatingRecord> records() const;
    /// Ratings CSV in the analysis schema, taken under the service lock.
    std::string export_csv() const;

    const Catalog& catalog() const noexcept { return catalog_; }
    const std::filesystem::path& store() const noexcept { return store_; }
    std::filesystem::path manifest_path() const;

    static std::string session_id(const std::string& observer, int session);

private:
    void replay();
    const SessionState& find(const std::string& session_id) const;

    Catalog catalog_;
    std::filesystem::path store_;
    std::string image_url_prefix_;
    mutable std::mutex mutex_;
    std::map<std::string, SessionState> sessions_;
    std::vector<analysis::RatingRecord> records_;
    std::map<std::string, std::vector<std::string>> recorded_;  // session id -> stimulus ids in order
};

/// HTTP+JSON front end for an ExperimentService (cpp-httplib).
///
///   POST /sessions                 {observer, session, seed}
///   GET  /sessions/{id}/trial      -> {stimulus_id, image_url} or {done: true}
///   POST /sessions/{id}/ratings    {stimulus_id, metal, shiny_black, shiny_white, other}
///   GET  /export.csv
///   GET  /stimuli/<file>           static stimulus images
class HttpServer {
public:
    HttpServer(ExperimentService& service, std::filesystem::path stimuli_dir);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds an ephemeral port and returns it.
    int bind_any_port(const std::string& host = "127.0.0.1");
    bool bind(const std::string& host, int port);
    /// Blocks until stop().
    bool listen_after_bind();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace glossmap::exprig
