#pragma once

#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include "smartpick/domain.hpp"

namespace smartpick {

// JSON (de)serialization of one sample, used by the history store and tests.
// Field names follow the model's feature names; instances are nested as
// {"n_vm": ..., "n_sl": ...}.
std::string sample_to_json_line(const WorkloadSample& s);
WorkloadSample sample_from_json_line(const std::string& line);

struct TraceDataset {
    std::vector<WorkloadSample> samples;
    std::string source_path;
};

// Append-only workload history: one JSON object per line. Appends are
// serialized by a mutex and flushed (+fsync) per record so a crash can lose
// at most the line being written, never corrupt earlier ones.
class HistoryStore {
public:
    explicit HistoryStore(std::filesystem::path path);

    const std::filesystem::path& path() const { return path_; }

    // Validates, then appends one line.
    void append(const WorkloadSample& s);

    // Reads every well-formed line; throws ParseError (with line number) on a
    // malformed non-final line, tolerates a truncated final line.
    TraceDataset read_all() const;

    // The most recent (file-order) samples whose query_id matches, newest
    // first, at most max_n.
    std::vector<WorkloadSample> latest_features_for(const std::string& query_id,
                                                    std::size_t max_n) const;

    std::size_t size() const;

private:
    std::filesystem::path path_;
    mutable std::mutex write_mu_;
};

} // namespace smartpick
