#include "smartpick/history.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <fstream>

#include "json.hpp"

namespace smartpick {

using nlohmann::json;

std::string sample_to_json_line(const WorkloadSample& s) {
    json j;
    j["query_id"] = s.features.query_id;
    j["instances"] = {{"n_vm", s.features.n_vm}, {"n_sl", s.features.n_sl}};
    j["input_size"] = s.features.input_size_bytes;
    j["start_time_epoch"] = s.features.start_time_epoch;
    j["total_memory"] = s.features.total_memory_mb;
    j["available_memory"] = s.features.available_memory_mb;
    j["memory_per_executor"] = s.features.memory_per_executor_mb;
    j["num_waiting_apps"] = s.features.num_waiting_apps;
    j["total_available_cores"] = s.features.total_available_cores;
    j["query_duration"] = s.query_duration_s;
    return j.dump();
}

WorkloadSample sample_from_json_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("bad history record: ") + e.what());
    }
    WorkloadSample s;
    try {
        s.features.query_id = j.at("query_id").get<std::string>();
        s.features.n_vm = j.at("instances").at("n_vm").get<double>();
        s.features.n_sl = j.at("instances").at("n_sl").get<double>();
        s.features.input_size_bytes = j.at("input_size").get<double>();
        s.features.start_time_epoch = j.at("start_time_epoch").get<double>();
        s.features.total_memory_mb = j.at("total_memory").get<double>();
        s.features.available_memory_mb = j.at("available_memory").get<double>();
        s.features.memory_per_executor_mb = j.at("memory_per_executor").get<double>();
        s.features.num_waiting_apps = j.at("num_waiting_apps").get<double>();
        s.features.total_available_cores = j.at("total_available_cores").get<double>();
        s.query_duration_s = j.at("query_duration").get<double>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad history record: ") + e.what());
    }
    s.validate();
    return s;
}

HistoryStore::HistoryStore(std::filesystem::path path) : path_(std::move(path)) {}

void HistoryStore::append(const WorkloadSample& s) {
    s.validate();
    std::string line = sample_to_json_line(s);
    line.push_back('\n');
    std::lock_guard lock(write_mu_);
    int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (fd < 0) throw IoError("cannot open history file " + path_.string());
    ssize_t n = ::write(fd, line.data(), line.size());
    if (n != static_cast<ssize_t>(line.size())) {
        ::close(fd);
        throw IoError("short write to history file " + path_.string());
    }
    ::fsync(fd);
    ::close(fd);
}

TraceDataset HistoryStore::read_all() const {
    TraceDataset ds;
    ds.source_path = path_.string();
    std::ifstream in(path_);
    if (!in) return ds; // an absent history is an empty history
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        bool last = in.peek() == std::ifstream::traits_type::eof();
        try {
            ds.samples.push_back(sample_from_json_line(line));
        } catch (const ParseError& e) {
            if (last) break; // torn final line from an interrupted append
            throw ParseError("history line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return ds;
}

std::vector<WorkloadSample> HistoryStore::latest_features_for(const std::string& query_id,
                                                              std::size_t max_n) const {
    TraceDataset ds = read_all();
    std::vector<WorkloadSample> out;
    for (auto it = ds.samples.rbegin(); it != ds.samples.rend() && out.size() < max_n; ++it) {
        if (it->features.query_id == query_id) out.push_back(*it);
    }
    return out;
}

std::size_t HistoryStore::size() const { return read_all().samples.size(); }

} // namespace smartpick
