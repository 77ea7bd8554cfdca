#include "smartpick/dynamics.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "json.hpp"

#include "smartpick/errors.hpp"

namespace smartpick {

DriftEvent check_trigger(double predicted_s, double actual_s, double trigger_s) {
    if (!(std::isfinite(predicted_s) && std::isfinite(actual_s)))
        throw DomainError("drift check requires finite durations");
    if (!(std::isfinite(trigger_s) && trigger_s > 0))
        throw DomainError("drift trigger must be > 0");
    DriftEvent e;
    e.predicted_s = predicted_s;
    e.actual_s = actual_s;
    e.abs_error_s = std::abs(predicted_s - actual_s);
    e.trigger_s = trigger_s;
    e.timestamp_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
    e.triggered = e.abs_error_s > trigger_s;
    return e;
}

int retrain_tree_growth(double abs_error_s, double trigger_s) {
    if (!(std::isfinite(abs_error_s) && abs_error_s >= 0))
        throw DomainError("abs_error_s must be >= 0");
    if (!(std::isfinite(trigger_s) && trigger_s > 0)) throw DomainError("trigger_s must be > 0");
    const double raw = std::ceil(1.5 * abs_error_s / trigger_s);
    if (raw <= 2.0) return 2;
    if (raw >= 32.0) return 32;
    return static_cast<int>(raw);
}

double available_ram_gb() {
    std::ifstream in("/proc/meminfo");
    std::string key;
    long long kb = 0;
    while (in >> key >> kb) {
        if (key == "MemAvailable:") return static_cast<double>(kb) / (1024.0 * 1024.0);
        in.ignore(256, '\n');
    }
    return 0.0;
}

std::filesystem::path drift_log_path_for(const std::filesystem::path& history_path) {
    return history_path.parent_path() / "drift-events.jsonl";
}

void append_drift_event(const std::filesystem::path& audit_path, const DriftEvent& event) {
    nlohmann::json j{{"query_id", event.query_id},
                     {"predicted_s", event.predicted_s},
                     {"actual_s", event.actual_s},
                     {"abs_error_s", event.abs_error_s},
                     {"trigger_s", event.trigger_s},
                     {"timestamp_ms", event.timestamp_ms},
                     {"triggered", event.triggered}};
    std::ofstream out(audit_path, std::ios::app);
    if (!out) throw IoError("cannot open drift log " + audit_path.string());
    out << j.dump() << '\n';
    if (!out) throw IoError("cannot append to drift log " + audit_path.string());
}

RetrainOutcome run_retrain(ModelStore& store, HistoryStore& history, const DriftEvent& event,
                           const EngineConfig& config, const RfHyper& hyper) {
    config.validate();
    if (event.query_id.empty()) throw DomainError("drift event needs a query_id");
    if (!(event.trigger_s > 0)) throw DomainError("drift event needs a positive trigger");

    const PredictionModel current = store.load_current();

    const auto batch = history.latest_features_for(
        event.query_id, static_cast<std::size_t>(config.train_max_batch));
    if (batch.empty())
        throw StateError("no recorded runs of query '" + event.query_id + "' to retrain on");

    constexpr int kAugmentFactor = 10;
    constexpr double kAugmentJitter = 0.05;
    const unsigned seed = hyper.seed + static_cast<unsigned>(current.version());
    const auto fresh = augment(batch, kAugmentFactor, kAugmentJitter, seed);

    const int growth = retrain_tree_growth(event.abs_error_s, event.trigger_s);
    const int added = growth * static_cast<int>(current.tree_count());

    const PredictionModel next = warm_retrain(current, fresh, added, hyper);
    store.publish(next);

    RetrainOutcome out;
    out.new_version = next.version();
    out.added_trees = added;
    out.n_train_samples = fresh.size();
    return out;
}

ServingModel::ServingModel(std::shared_ptr<const PredictionModel> initial)
    : current_(std::move(initial)) {}

std::shared_ptr<const PredictionModel> ServingModel::snapshot() const {
    std::lock_guard<std::mutex> lock(mu_);
    return current_;
}

void ServingModel::swap(std::shared_ptr<const PredictionModel> next) {
    std::lock_guard<std::mutex> lock(mu_);
    current_ = std::move(next);
}

RetrainCoordinator::RetrainCoordinator(Options opts, ServingModel& serving)
    : opts_(std::move(opts)), serving_(serving) {
    opts_.config.validate();
    worker_ = std::thread([this] { loop(); });
}

RetrainCoordinator::~RetrainCoordinator() {
    {
        std::lock_guard<std::mutex> lock(mu_);
        stop_ = true;
    }
    cv_.notify_all();
    if (worker_.joinable()) worker_.join();
}

void RetrainCoordinator::schedule(const DriftEvent& event) {
    {
        std::lock_guard<std::mutex> lock(mu_);
        pending_ = event; // newest event wins; stale ones are superseded
    }
    cv_.notify_all();
}

void RetrainCoordinator::wait_idle() {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [this] { return !pending_.has_value() && !running_; });
}

int RetrainCoordinator::completed() const {
    std::lock_guard<std::mutex> lock(mu_);
    return completed_;
}

int RetrainCoordinator::spawned() const {
    std::lock_guard<std::mutex> lock(mu_);
    return spawned_;
}

std::string RetrainCoordinator::last_error() const {
    std::lock_guard<std::mutex> lock(mu_);
    return last_error_;
}

void RetrainCoordinator::loop() {
    for (;;) {
        DriftEvent event;
        {
            std::unique_lock<std::mutex> lock(mu_);
            cv_.wait(lock, [this] { return stop_ || pending_.has_value(); });
            if (stop_) return;
            event = *pending_;
            pending_.reset();
            running_ = true;
        }
        std::string error;
        bool used_subprocess = false;
        try {
            used_subprocess = run_one(event);
        } catch (const std::exception& e) {
            error = e.what();
        }
        {
            std::lock_guard<std::mutex> lock(mu_);
            running_ = false;
            if (error.empty()) {
                ++completed_;
                if (used_subprocess) ++spawned_;
                last_error_.clear();
            } else {
                last_error_ = error;
            }
        }
        cv_.notify_all();
    }
}

bool RetrainCoordinator::run_one(const DriftEvent& event) {
    // Stay in-process when configured to prefer this instance and the
    // machine has headroom; otherwise hand the refresh to a worker process.
    const bool stay_local = opts_.config.train_pref_same_instance &&
                            available_ram_gb() >= opts_.config.train_min_ram_gb;
    bool used_subprocess = false;
    if (!stay_local && !opts_.worker_exe.empty()) {
        used_subprocess = spawn_worker(event);
    }
    if (!used_subprocess) {
        ModelStore store(opts_.model_dir);
        HistoryStore history(opts_.history_path);
        run_retrain(store, history, event, opts_.config, opts_.hyper);
    }
    ModelStore store(opts_.model_dir);
    serving_.swap(std::make_shared<const PredictionModel>(store.load_current()));
    return used_subprocess;
}

bool RetrainCoordinator::spawn_worker(const DriftEvent& event) {
    auto fmt = [](double v) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    std::vector<std::string> args = {opts_.worker_exe,
                                     "retrain-worker",
                                     "--model-dir", opts_.model_dir,
                                     "--history", opts_.history_path,
                                     "--query-id", event.query_id,
                                     "--predicted", fmt(event.predicted_s),
                                     "--actual", fmt(event.actual_s),
                                     "--trigger", fmt(event.trigger_s),
                                     "--max-batch", std::to_string(opts_.config.train_max_batch),
                                     "--trees", std::to_string(opts_.hyper.n_trees),
                                     "--max-depth", std::to_string(opts_.hyper.max_depth),
                                     "--min-leaf", std::to_string(opts_.hyper.min_leaf),
                                     "--seed", std::to_string(opts_.hyper.seed)};
    std::vector<char*> argv;
    argv.reserve(args.size() + 1);
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);

    const pid_t pid = ::fork();
    if (pid < 0) return false; // cannot fork: fall back to in-process
    if (pid == 0) {
        ::execv(argv[0], argv.data());
        ::_exit(127); // exec failed in the child
    }
    int status = 0;
    if (::waitpid(pid, &status, 0) != pid) return false;
    return WIFEXITED(status) && WEXITSTATUS(status) == 0;
}

} // namespace smartpick
