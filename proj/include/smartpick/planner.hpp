#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "smartpick/domain.hpp"
#include "smartpick/dynamics.hpp"
#include "smartpick/history.hpp"
#include "smartpick/optimizer.hpp"
#include "smartpick/predictor.hpp"
#include "smartpick/simulator.hpp"

namespace smartpick {

// One incoming query to plan resources for. Exactly one of query_id
// (a known, previously recorded query) or query_text (raw SQL of a new one)
// must be present.
struct PlanRequest {
    std::string query_id;
    std::string query_text;
    double n_map_tasks = 0;         // structural signature component for new queries
    double input_size_bytes = 0;    // > 0 overrides the historical input size
    std::optional<double> epsilon;  // knob override; default: engine config
    std::optional<bool> relay;      // relay override for cost estimates; default: engine config
    void validate() const;
};

struct PlanResponse {
    FleetConfig fleet;
    double predicted_time_s = 0;
    Money estimated_cost;
    std::string matched_query_id;
    double similarity_score = 0; // 1.0 for known queries
    int search_evaluations = 0;
    int model_version = 0;
    // Reference values and context for operators and for executing the plan:
    double t_best_s = 0;
    Money c_best;
    std::string terminated_by;
    QueryFeatures features; // the assembled features the plan was made with
};

// The end-to-end workflow engine: routes known/new queries, assembles
// features from recorded history, searches fleets on the serving model,
// applies the cost/performance knob, and (separately) executes plans,
// records outcomes, and triggers background retraining on drift.
class Planner {
  public:
    struct Setup {
        std::string model_dir;
        std::string history_path;
        EngineConfig config;
        ProviderProfile profile;
        RfHyper hyper;          // used by background refreshes
        std::string worker_exe; // retrain subprocess; empty = in-process only
        unsigned seed = 42;     // search seed
    };

    explicit Planner(Setup setup);

    // Pure planning: never mutates the model, the history, or any other
    // state. Deterministic for a fixed model version and seed.
    PlanResponse plan(const PlanRequest& request) const;

    // Runs the plan on the simulator, appends the observed sample to
    // history, audits the drift check, and schedules a background refresh
    // when the prediction missed by more than the configured trigger.
    SimOutcome execute_and_record(const PlanResponse& plan, const QuerySpec& query);

    ServingModel& serving() { return serving_; }
    RetrainCoordinator& coordinator() { return *coordinator_; }
    const Setup& setup() const { return setup_; }

  private:
    Setup setup_;
    ServingModel serving_;
    HistoryStore history_;
    std::unique_ptr<RetrainCoordinator> coordinator_;
    std::mutex audit_mu_;
};

} // namespace smartpick
