#pragma once

#include <functional>
#include <string>
#include <vector>

#include "smartpick/domain.hpp"
#include "smartpick/gp.hpp"
#include "smartpick/predictor.hpp"

namespace smartpick {

// Planning-time cost estimate for running a query of duration est_time_s on
// a fleet: VM instances bill for the whole run (compute + storage +
// burstable), SL instances bill only until their relay handoff
// (min(est_time, vm_cold_boot_s)) when relay is on, and the external store
// is prorated over the run iff any SL participates.
Money estimate_cost(const FleetConfig& fleet, double est_time_s, const ProviderProfile& profile,
                    bool relay);

struct Candidate {
    FleetConfig fleet;
    double est_time_s = 0; // noiseless model prediction
    Money est_cost;
    double objective = 0;  // -(est_time + noise), the maximized quantity
};

enum class TerminationReason { BUDGET, STAGNATION };

struct SearchResult {
    Candidate best; // smallest est_time_s among visited
    std::vector<Candidate> visited;
    int n_evaluations = 0;
    TerminationReason terminated_by = TerminationReason::BUDGET;
};

struct SearchOptions {
    int budget = 0;          // 0 = full grid size
    unsigned seed = 1;
    double noise_std = 0.0;  // std-dev of the zero-mean noise added to the objective
    double xi_frac = 0.01;   // xi = xi_frac * |f_best| in the acquisition
    int init_design = 5;     // distinct initial fleets, extremes always included
    bool relay = true;       // relay handoff assumed in cost estimates
    // Stagnation: stop after `stagnation_runs` consecutive iterations whose
    // best-objective improvement is below `stagnation_rel` (relative).
    double stagnation_rel = 0.01;
    int stagnation_runs = 10;
};

// The quantity the optimizer maximizes for fleet f: -(model time estimate +
// zero-mean Gaussian noise with std noise_std). Deterministic per seed.
double objective(const PredictionModel& model, const QueryFeatures& base, const FleetConfig& fleet,
                 double noise_std, unsigned seed);

// GP + probability-of-improvement search over the fleet grid
// [0..max_vm] x [0..max_sl] minus {0,0}. Starts from an initial design of
// distinct fleets always containing the two extremes {0, max_sl} and
// {max_vm, 0}; then repeatedly fits the surrogate and evaluates the
// unvisited grid point with the highest improvement probability. No fleet is
// evaluated twice. est_time_s is always the noiseless prediction; noise
// perturbs only the search trajectory.
SearchResult search(const PredictionModel& model, const QueryFeatures& base,
                    const ProviderProfile& profile, const SearchOptions& opts = {});

// Same search loop driven by arbitrary evaluators instead of the prediction
// model; used to compare against optimizing directly on simulated runs.
// time_of(fleet) must return the est_time_s analogue, cost_of(fleet, t) the
// cost analogue.
SearchResult search_with(const std::function<double(const FleetConfig&)>& time_of,
                         const std::function<Money(const FleetConfig&, double)>& cost_of,
                         int max_vm, int max_sl, const SearchOptions& opts);

// Cost/performance knob: among visited candidates, the slowest one whose
// cost does not exceed the best candidate's cost and whose time stays within
// (1+epsilon) of the best time. epsilon = 0 returns the best candidate; no
// qualifying alternative also returns the best candidate.
Candidate select_with_knob(const SearchResult& result, double epsilon);

// Price/performance score: 100 * (1/time) / (1 + cost in dollars).
double pc_ratio(double time_s, Money cost);

} // namespace smartpick
