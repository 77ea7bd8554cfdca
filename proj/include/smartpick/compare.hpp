#pragma once

#include <string>

#include "smartpick/domain.hpp"
#include "smartpick/optimizer.hpp"
#include "smartpick/predictor.hpp"
#include "smartpick/simulator.hpp"

namespace smartpick {

// Accounting constants for how expensive planning itself is. A model
// evaluation is a fixed-latency, fixed-price call; each search iteration
// adds bookkeeping overhead; probing a fleet by actually running the query
// costs its real (simulated) duration and bill.
struct ComparePricing {
    double prediction_latency_s = 0.75;
    double search_overhead_s = 0.05;
    double prediction_price_dollars = 0.005;
    void validate() const;
};

struct StrategyOutcome {
    std::string strategy;
    FleetConfig chosen;
    double chosen_time_s = 0; // the chosen fleet's estimated (or simulated) completion
    Money chosen_cost;
    int n_evaluations = 0;
    double planning_time_s = 0; // wall time the strategy spends deciding
    Money planning_cost;        // what the strategy spends deciding
    double score = 0;           // pc_ratio(planning_time_s, planning_cost)
};

struct CompareReport {
    StrategyOutcome predictor_guided;     // surrogate-guided search over model estimates
    StrategyOutcome predictor_exhaustive; // model estimate for every fleet in the grid
    StrategyOutcome simulator_guided;     // surrogate-guided search over real simulated runs
};

// Runs the three planning strategies on the same query and scores each by
// price/performance of the planning process itself.
CompareReport compare_strategies(const PredictionModel& model, const QueryFeatures& base,
                                 const QuerySpec& spec, const ProviderProfile& profile,
                                 const SearchOptions& opts = {}, const ComparePricing& pricing = {});

} // namespace smartpick
