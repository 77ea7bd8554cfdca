#pragma once

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "smartpick/domain.hpp"
#include "smartpick/history.hpp"
#include "smartpick/model_store.hpp"
#include "smartpick/predictor.hpp"

namespace smartpick {

// Outcome of comparing a completed query's observed duration against what
// the model predicted for it.
struct DriftEvent {
    std::string query_id;
    double predicted_s = 0;
    double actual_s = 0;
    double abs_error_s = 0; // |predicted_s - actual_s|
    double trigger_s = 0;   // threshold the miss was measured against
    std::int64_t timestamp_ms = 0; // wall clock of the check, epoch milliseconds
    bool triggered = false;        // abs_error_s > trigger_s
};

// Builds the DriftEvent for one completion; triggered iff the absolute error
// exceeds the trigger. The caller fills in query_id.
DriftEvent check_trigger(double predicted_s, double actual_s, double trigger_s);

// How many trees to add per existing tree so the refreshed ensemble, which
// still contains the stale trees, averages the miss down below two thirds of
// the trigger: ceil(1.5 * error / trigger), clamped to [2, 32].
int retrain_tree_growth(double abs_error_s, double trigger_s);

// MemAvailable from /proc/meminfo, in GB; 0 when it cannot be read.
double available_ram_gb();

// Audit log of drift checks, one JSON object per line, kept next to the
// history store.
std::filesystem::path drift_log_path_for(const std::filesystem::path& history_path);
void append_drift_event(const std::filesystem::path& audit_path, const DriftEvent& event);

struct RetrainOutcome {
    int new_version = 0;
    int added_trees = 0;
    std::size_t n_train_samples = 0; // augmented sample count fed to the refresh
};

// One full refresh pass: load the current model, gather the newest history
// rows for the drifted query (at most train_max_batch), augment them 10x
// with +-5% jitter, grow the ensemble, and publish the new version. Earlier
// published versions are left untouched; a failure anywhere leaves the
// store's current pointer on the old version.
RetrainOutcome run_retrain(ModelStore& store, HistoryStore& history, const DriftEvent& event,
                           const EngineConfig& config, const RfHyper& hyper = {});

// The model currently answering predictions. Readers take a snapshot that
// stays valid while they use it; a refresh swaps the pointer atomically so
// every prediction sees either the old or the new model, never a mix.
class ServingModel {
  public:
    ServingModel() = default;
    explicit ServingModel(std::shared_ptr<const PredictionModel> initial);
    std::shared_ptr<const PredictionModel> snapshot() const;
    void swap(std::shared_ptr<const PredictionModel> next);

  private:
    mutable std::mutex mu_;
    std::shared_ptr<const PredictionModel> current_;
};

// Background retraining: drift events are coalesced (only the newest pending
// event is kept) and processed one at a time on a worker thread. The refresh
// runs in-process when the configuration prefers the same instance and the
// machine has at least train_min_ram_gb available; otherwise it runs in a
// spawned worker subprocess (falling back to in-process when spawning is
// unavailable or fails). Either way the serving model is swapped to the
// store's new current version afterwards.
class RetrainCoordinator {
  public:
    struct Options {
        std::string model_dir;
        std::string history_path;
        EngineConfig config;
        RfHyper hyper;
        std::string worker_exe; // empty: never spawn, always refresh in-process
    };

    RetrainCoordinator(Options opts, ServingModel& serving);
    ~RetrainCoordinator();
    RetrainCoordinator(const RetrainCoordinator&) = delete;
    RetrainCoordinator& operator=(const RetrainCoordinator&) = delete;

    void schedule(const DriftEvent& event);
    void wait_idle(); // until no pending event and no refresh in flight

    int completed() const;          // refreshes that finished successfully
    int spawned() const;            // of those, how many ran in a subprocess
    std::string last_error() const; // empty when the last refresh succeeded

  private:
    void loop();
    bool run_one(const DriftEvent& event);
    bool spawn_worker(const DriftEvent& event);

    Options opts_;
    ServingModel& serving_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::optional<DriftEvent> pending_;
    bool running_ = false;
    bool stop_ = false;
    int completed_ = 0;
    int spawned_ = 0;
    std::string last_error_;
    std::thread worker_;
};

} // namespace smartpick
