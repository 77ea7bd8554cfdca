#include "smartpick/compare.hpp"

#include <cmath>
#include <map>

#include "smartpick/errors.hpp"

namespace smartpick {

void ComparePricing::validate() const {
    if (!(std::isfinite(prediction_latency_s) && prediction_latency_s > 0))
        throw DomainError("prediction_latency_s must be > 0");
    if (!(std::isfinite(search_overhead_s) && search_overhead_s >= 0))
        throw DomainError("search_overhead_s must be >= 0");
    if (!(std::isfinite(prediction_price_dollars) && prediction_price_dollars >= 0))
        throw DomainError("prediction_price_dollars must be >= 0");
}

CompareReport compare_strategies(const PredictionModel& model, const QueryFeatures& base,
                                 const QuerySpec& spec, const ProviderProfile& profile,
                                 const SearchOptions& opts, const ComparePricing& pricing) {
    pricing.validate();
    spec.validate();
    profile.validate();

    CompareReport report;
    const Money call_price = Money::from_dollars(pricing.prediction_price_dollars);

    {
        StrategyOutcome& out = report.predictor_guided;
        out.strategy = "predictor-guided-search";
        const SearchResult r = search(model, base, profile, opts);
        out.chosen = r.best.fleet;
        out.chosen_time_s = r.best.est_time_s;
        out.chosen_cost = r.best.est_cost;
        out.n_evaluations = r.n_evaluations;
        out.planning_time_s =
            r.n_evaluations * (pricing.prediction_latency_s + pricing.search_overhead_s);
        for (int i = 0; i < r.n_evaluations; ++i) out.planning_cost += call_price;
        out.score = pc_ratio(out.planning_time_s, out.planning_cost);
    }

    {
        StrategyOutcome& out = report.predictor_exhaustive;
        out.strategy = "predictor-exhaustive";
        bool have = false;
        Candidate best;
        for (int v = 0; v <= profile.max_vm; ++v) {
            for (int s = 0; s <= profile.max_sl; ++s) {
                if (v == 0 && s == 0) continue;
                Candidate c;
                c.fleet = {v, s};
                c.est_time_s = model.predict(base.with_fleet(c.fleet));
                c.est_cost = estimate_cost(c.fleet, c.est_time_s, profile, opts.relay);
                ++out.n_evaluations;
                if (!have || c.est_time_s < best.est_time_s) {
                    best = c;
                    have = true;
                }
            }
        }
        if (!have) throw DomainError("fleet grid is empty");
        out.chosen = best.fleet;
        out.chosen_time_s = best.est_time_s;
        out.chosen_cost = best.est_cost;
        out.planning_time_s = out.n_evaluations * pricing.prediction_latency_s;
        for (int i = 0; i < out.n_evaluations; ++i) out.planning_cost += call_price;
        out.score = pc_ratio(out.planning_time_s, out.planning_cost);
    }

    {
        StrategyOutcome& out = report.simulator_guided;
        out.strategy = "simulator-guided-search";
        const Policy policy{opts.relay ? PolicyKind::HYBRID_RELAY : PolicyKind::HYBRID_KEEP, 0.0};
        std::map<FleetConfig, SimOutcome> probes;
        auto time_of = [&](const FleetConfig& f) {
            auto [it, inserted] = probes.try_emplace(f);
            if (inserted) it->second = simulate(spec, f, policy, profile);
            return it->second.completion_s;
        };
        auto cost_of = [&](const FleetConfig& f, double) { return probes.at(f).cost.total; };
        const SearchResult r = search_with(time_of, cost_of, profile.max_vm, profile.max_sl, opts);
        out.chosen = r.best.fleet;
        out.chosen_time_s = r.best.est_time_s;
        out.chosen_cost = r.best.est_cost;
        out.n_evaluations = r.n_evaluations;
        out.planning_time_s = r.n_evaluations * pricing.search_overhead_s;
        for (const Candidate& c : r.visited) {
            out.planning_time_s += c.est_time_s; // each probe really runs the query
            out.planning_cost += c.est_cost;     // and really pays for it
        }
        out.score = pc_ratio(out.planning_time_s, out.planning_cost);
    }

    return report;
}

} // namespace smartpick
