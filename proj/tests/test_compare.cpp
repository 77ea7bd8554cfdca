// Planning-strategy comparison: the three strategies and their accounting.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "scenario.hpp"
#include "smartpick/compare.hpp"
#include "smartpick/errors.hpp"
#include "smartpick/optimizer.hpp"
#include "smartpick/simulator.hpp"

using namespace smartpick;

namespace {

struct CompareFixture {
    PredictionModel model;
    QueryFeatures base;
    ProviderProfile profile;
    QuerySpec spec{40, 2.0, 1}; // the q68 class

    CompareFixture() {
        const auto corpus =
            scenario::make_corpus(scenario::five_classes(), 15, profile, 2.0, 63);
        model = scenario::train_pipeline(corpus, RfHyper{}).model;
        for (const auto& s : corpus)
            if (s.features.query_id == "q68") base = s.features;
        base.query_id = "q68";
    }
};

} // namespace

TEST_CASE("pricing validation") {
    ComparePricing p;
    CHECK_NOTHROW(p.validate());
    p.prediction_latency_s = 0.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = ComparePricing{};
    p.search_overhead_s = -0.1;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = ComparePricing{};
    p.prediction_price_dollars = -1.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("the three strategies are reported with exact planning accounting") {
    const CompareFixture fx;
    SearchOptions opts;
    opts.seed = 7;
    const ComparePricing pricing; // 0.75 s + 0.05 s, $0.005 per model call
    const CompareReport report =
        compare_strategies(fx.model, fx.base, fx.spec, fx.profile, opts, pricing);

    const auto& guided = report.predictor_guided;
    const auto& exhaustive = report.predictor_exhaustive;
    const auto& simulated = report.simulator_guided;

    CHECK(guided.strategy == "predictor-guided-search");
    CHECK(exhaustive.strategy == "predictor-exhaustive");
    CHECK(simulated.strategy == "simulator-guided-search");

    // Exhaustive touches the whole 8x8 grid minus the empty fleet.
    CHECK(exhaustive.n_evaluations == 80);
    CHECK(exhaustive.planning_time_s == doctest::Approx(80 * 0.75));
    CHECK(exhaustive.planning_cost.micros() == 80 * 5000);

    // Guided search needs fewer model calls than the exhaustive scan.
    CHECK(guided.n_evaluations >= 5);
    CHECK(guided.n_evaluations < exhaustive.n_evaluations);
    CHECK(guided.planning_time_s == doctest::Approx(guided.n_evaluations * (0.75 + 0.05)));
    CHECK(guided.planning_cost.micros() == guided.n_evaluations * 5000);

    // The exhaustive pick is the true argmin of the model's estimates.
    double best_t = -1;
    FleetConfig best_fleet;
    for (int v = 0; v <= 8; ++v) {
        for (int s = 0; s <= 8; ++s) {
            if (v == 0 && s == 0) continue;
            const double t = fx.model.predict(fx.base.with_fleet({v, s}));
            if (best_t < 0 || t < best_t) {
                best_t = t;
                best_fleet = {v, s};
            }
        }
    }
    CHECK(exhaustive.chosen == best_fleet);
    CHECK(exhaustive.chosen_time_s == doctest::Approx(best_t));
    // The guided best can't beat the exhaustive minimum.
    CHECK(guided.chosen_time_s >= best_t - 1e-9);

    // Probing with the simulator pays real completions and real bills: the
    // planning time exceeds the pure bookkeeping overhead by the probes' run
    // times, and the chosen entry matches an actual simulated run.
    CHECK(simulated.n_evaluations >= 5);
    CHECK(simulated.planning_time_s > simulated.n_evaluations * 0.05);
    CHECK(simulated.planning_cost.micros() > 0);
    const Policy relay{PolicyKind::HYBRID_RELAY, 0.0};
    const SimOutcome chosen_run = simulate(fx.spec, simulated.chosen, relay, fx.profile);
    CHECK(simulated.chosen_time_s == doctest::Approx(chosen_run.completion_s));
    CHECK(simulated.chosen_cost.micros() == chosen_run.cost.total.micros());

    // Scores are the planning-process price/performance ratios.
    CHECK(guided.score ==
          doctest::Approx(pc_ratio(guided.planning_time_s, guided.planning_cost)));
    CHECK(exhaustive.score ==
          doctest::Approx(pc_ratio(exhaustive.planning_time_s, exhaustive.planning_cost)));
    CHECK(simulated.score ==
          doctest::Approx(pc_ratio(simulated.planning_time_s, simulated.planning_cost)));
    CHECK(guided.score > 0);
    CHECK(exhaustive.score > 0);
    CHECK(simulated.score > 0);
}

TEST_CASE("guided model search scores above both alternatives") {
    const CompareFixture fx;
    SearchOptions opts;
    opts.seed = 1;
    const CompareReport report =
        compare_strategies(fx.model, fx.base, fx.spec, fx.profile, opts);
    CHECK(report.predictor_guided.score > report.predictor_exhaustive.score);
    CHECK(report.predictor_guided.score > report.simulator_guided.score);
}

TEST_CASE("compare rejects invalid pricing and specs") {
    const CompareFixture fx;
    ComparePricing bad;
    bad.prediction_latency_s = -1;
    CHECK_THROWS_AS(
        compare_strategies(fx.model, fx.base, fx.spec, fx.profile, SearchOptions{}, bad),
        DomainError);
    QuerySpec bad_spec{10, 0.0, 1};
    CHECK_THROWS_AS(
        compare_strategies(fx.model, fx.base, bad_spec, fx.profile, SearchOptions{}),
        ValidationError);
}
