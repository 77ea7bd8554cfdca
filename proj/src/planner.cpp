#include "smartpick/planner.hpp"

#include <utility>

#include "smartpick/errors.hpp"
#include "smartpick/model_store.hpp"
#include "smartpick/similarity.hpp"

namespace smartpick {

void PlanRequest::validate() const {
    if (query_id.empty() == query_text.empty())
        throw ValidationError("plan request needs exactly one of query_id / query_text");
    if (!(n_map_tasks >= 0)) throw ValidationError("n_map_tasks must be >= 0");
    if (epsilon.has_value() && !(*epsilon >= 0))
        throw ValidationError("epsilon must be >= 0 when given");
}

Planner::Planner(Setup setup)
    : setup_(std::move(setup)), history_(setup_.history_path) {
    setup_.config.validate();
    setup_.profile.validate();
    ModelStore store(setup_.model_dir);
    if (store.current_version().has_value()) {
        serving_.swap(std::make_shared<const PredictionModel>(store.load_current()));
    }
    RetrainCoordinator::Options copts;
    copts.model_dir = setup_.model_dir;
    copts.history_path = setup_.history_path;
    copts.config = setup_.config;
    copts.hyper = setup_.hyper;
    copts.worker_exe = setup_.worker_exe;
    coordinator_ = std::make_unique<RetrainCoordinator>(std::move(copts), serving_);
}

PlanResponse Planner::plan(const PlanRequest& request) const {
    request.validate();
    const auto model = serving_.snapshot();
    if (!model || !model->trained()) throw StateError("no trained model is being served");

    std::string matched = request.query_id;
    double similarity = 1.0;
    if (matched.empty()) {
        const StructuralSignature probe =
            extract_signature(request.query_text, request.n_map_tasks);
        const SimilarityMatch match = nearest_known(probe, model->known_queries());
        matched = match.query_id;
        similarity = match.score;
    }

    const auto recent = history_.latest_features_for(matched, 1);
    if (recent.empty())
        throw StateError("no recorded runs of query '" + matched + "' to plan from");
    QueryFeatures base = recent.front().features;
    base.query_id = matched;
    if (request.input_size_bytes > 0) base.input_size_bytes = request.input_size_bytes;

    SearchOptions opts;
    opts.seed = setup_.seed;
    opts.relay = request.relay.value_or(setup_.config.compute_relay);
    const SearchResult result = search(*model, base, setup_.profile, opts);

    const double epsilon = request.epsilon.value_or(setup_.config.compute_knob);
    const Candidate pick = select_with_knob(result, epsilon);

    PlanResponse resp;
    resp.fleet = pick.fleet;
    resp.predicted_time_s = pick.est_time_s;
    resp.estimated_cost = pick.est_cost;
    resp.matched_query_id = matched;
    resp.similarity_score = similarity;
    resp.search_evaluations = result.n_evaluations;
    resp.model_version = model->version();
    resp.t_best_s = result.best.est_time_s;
    resp.c_best = result.best.est_cost;
    resp.terminated_by =
        result.terminated_by == TerminationReason::STAGNATION ? "STAGNATION" : "BUDGET";
    resp.features = base.with_fleet(pick.fleet);
    return resp;
}

SimOutcome Planner::execute_and_record(const PlanResponse& plan, const QuerySpec& query) {
    const Policy policy{
        setup_.config.compute_relay ? PolicyKind::HYBRID_RELAY : PolicyKind::HYBRID_KEEP, 0.0};
    const SimOutcome outcome = simulate(query, plan.fleet, policy, setup_.profile);

    WorkloadSample sample;
    sample.features = plan.features;
    sample.query_duration_s = outcome.completion_s;
    history_.append(sample);

    DriftEvent event = check_trigger(plan.predicted_time_s, outcome.completion_s,
                                     setup_.config.train_error_difference_trigger_s);
    event.query_id = plan.matched_query_id;
    {
        std::lock_guard<std::mutex> lock(audit_mu_);
        append_drift_event(drift_log_path_for(history_.path()), event);
    }
    if (event.triggered) coordinator_->schedule(event);
    return outcome;
}

} // namespace smartpick
