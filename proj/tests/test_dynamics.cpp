// Drift detection, the audit log, warm model refreshes, and the background
// retrain coordinator (in-process, subprocess, and failure paths).

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "scenario.hpp"
#include "smartpick/dynamics.hpp"
#include "smartpick/errors.hpp"
#include "smartpick/history.hpp"
#include "smartpick/model_store.hpp"
#include "smartpick/predictor.hpp"

using namespace smartpick;
using nlohmann::json;

// Build system provides the CLI path so subprocess refreshes can be exercised.
#ifndef SMARTPICK_CLI_PATH
#define SMARTPICK_CLI_PATH ""
#endif

namespace {

// A corpus-backed store + history pair in a temp dir, ready for retraining.
struct RetrainFixture {
    scenario::TempDir tmp;
    ModelStore store;
    HistoryStore history;
    RfHyper hyper;

    RetrainFixture()
        : store(tmp.path / "models"), history(tmp.path / "history.jsonl") {
        const auto corpus =
            scenario::make_corpus(scenario::five_classes(), 12, ProviderProfile{}, 2.0, 77);
        for (const auto& s : corpus) history.append(s);
        const TrainResult r = scenario::train_pipeline(corpus, hyper);
        store.publish(r.model);
    }
};

} // namespace

TEST_CASE("drift check compares the absolute error against the trigger") {
    SUBCASE("inside the window") {
        const DriftEvent e = check_trigger(100.0, 105.0, 10.0);
        CHECK_FALSE(e.triggered);
        CHECK(e.abs_error_s == doctest::Approx(5.0));
        CHECK(e.predicted_s == doctest::Approx(100.0));
        CHECK(e.actual_s == doctest::Approx(105.0));
        CHECK(e.trigger_s == doctest::Approx(10.0));
        CHECK(e.timestamp_ms > 0);
    }
    SUBCASE("outside the window") {
        const DriftEvent e = check_trigger(100.0, 115.0, 10.0);
        CHECK(e.triggered);
        CHECK(e.abs_error_s == doctest::Approx(15.0));
    }
    SUBCASE("underestimates count the same as overestimates") {
        CHECK(check_trigger(115.0, 100.0, 10.0).triggered);
    }
    SUBCASE("an error exactly at the trigger does not fire") {
        const DriftEvent e = check_trigger(100.0, 110.0, 10.0);
        CHECK_FALSE(e.triggered);
    }
    SUBCASE("equal values have zero error") {
        const DriftEvent e = check_trigger(42.0, 42.0, 10.0);
        CHECK(e.abs_error_s == 0.0);
        CHECK_FALSE(e.triggered);
    }
    SUBCASE("invalid inputs") {
        CHECK_THROWS_AS(check_trigger(100.0, 105.0, 0.0), DomainError);
        CHECK_THROWS_AS(check_trigger(100.0, 105.0, -1.0), DomainError);
        CHECK_THROWS_AS(check_trigger(std::nan(""), 105.0, 10.0), DomainError);
        CHECK_THROWS_AS(check_trigger(100.0, std::nan(""), 10.0), DomainError);
    }
}

TEST_CASE("tree growth scales with the miss and is clamped") {
    CHECK(retrain_tree_growth(100.0, 10.0) == 15); // ceil(1.5 * 10)
    CHECK(retrain_tree_growth(47.0, 10.0) == 8);   // ceil(7.05)
    CHECK(retrain_tree_growth(0.0, 10.0) == 2);    // floor clamp
    CHECK(retrain_tree_growth(5.0, 10.0) == 2);    // ceil(0.75) -> 1 -> clamp 2
    CHECK(retrain_tree_growth(1.0e6, 10.0) == 32); // ceiling clamp
    CHECK_THROWS_AS(retrain_tree_growth(-1.0, 10.0), DomainError);
    CHECK_THROWS_AS(retrain_tree_growth(10.0, 0.0), DomainError);
}

TEST_CASE("available ram reads as a sane non-negative number") {
    const double gb = available_ram_gb();
    CHECK(gb >= 0.0);
    CHECK(gb < 1e6);
}

TEST_CASE("the drift audit log lives next to the history file") {
    CHECK(drift_log_path_for("/var/data/history.jsonl") == "/var/data/drift-events.jsonl");
    CHECK(drift_log_path_for("history.jsonl").filename() == "drift-events.jsonl");
}

TEST_CASE("drift events append as one json line each") {
    scenario::TempDir tmp;
    const auto audit = tmp.path / "drift-events.jsonl";
    DriftEvent e = check_trigger(100.0, 117.5, 10.0);
    e.query_id = "q68";
    append_drift_event(audit, e);
    append_drift_event(audit, check_trigger(50.0, 52.0, 10.0));

    std::ifstream in(audit);
    std::string line;
    REQUIRE(std::getline(in, line));
    const json j = json::parse(line);
    CHECK(j.at("query_id") == "q68");
    CHECK(j.at("predicted_s") == doctest::Approx(100.0));
    CHECK(j.at("actual_s") == doctest::Approx(117.5));
    CHECK(j.at("abs_error_s") == doctest::Approx(17.5));
    CHECK(j.at("trigger_s") == doctest::Approx(10.0));
    CHECK(j.at("triggered") == true);
    CHECK(j.at("timestamp_ms").get<std::int64_t>() > 0);
    REQUIRE(std::getline(in, line));
    CHECK(json::parse(line).at("triggered") == false);
    CHECK_FALSE(std::getline(in, line));
}

TEST_CASE("run_retrain publishes a grown next version and keeps the old one") {
    RetrainFixture fx;
    const PredictionModel v1 = fx.store.load_current();
    const std::size_t v1_trees = v1.tree_count();

    DriftEvent e = check_trigger(100.0, 147.0, 10.0); // growth ceil(1.5*4.7) = 8
    e.query_id = "q68";
    EngineConfig cfg;
    cfg.train_max_batch = 100;

    const RetrainOutcome out = run_retrain(fx.store, fx.history, e, cfg, fx.hyper);
    CHECK(out.new_version == 2);
    CHECK(out.added_trees == 8 * static_cast<int>(v1_trees));
    CHECK(out.n_train_samples == 120); // 12 history rows for q68, augmented 10x

    CHECK(*fx.store.current_version() == 2);
    const PredictionModel v2 = fx.store.load_current();
    CHECK(v2.version() == 2);
    CHECK(v2.tree_count() == v1_trees + static_cast<std::size_t>(out.added_trees));
    // The old version file still loads and still predicts.
    CHECK(std::filesystem::exists(fx.store.model_path(1)));
    std::ifstream old_file(fx.store.model_path(1));
    const std::string old_text((std::istreambuf_iterator<char>(old_file)),
                               std::istreambuf_iterator<char>());
    CHECK(PredictionModel::from_json(old_text).version() == 1);
}

TEST_CASE("run_retrain caps the batch at train_max_batch") {
    RetrainFixture fx;
    DriftEvent e = check_trigger(10.0, 100.0, 10.0);
    e.query_id = "q68";
    EngineConfig cfg;
    cfg.train_max_batch = 5;
    const RetrainOutcome out = run_retrain(fx.store, fx.history, e, cfg, fx.hyper);
    CHECK(out.n_train_samples == 50); // 5 newest rows, augmented 10x
}

TEST_CASE("run_retrain with no history for the query fails without side effects") {
    RetrainFixture fx;
    DriftEvent e = check_trigger(10.0, 100.0, 10.0);
    e.query_id = "q_unseen";
    CHECK_THROWS_AS(run_retrain(fx.store, fx.history, e, EngineConfig{}, fx.hyper), StateError);
    CHECK(*fx.store.current_version() == 1);
}

TEST_CASE("retraining on same-distribution data keeps the serving accuracy") {
    RetrainFixture fx;
    const auto corpus = fx.history.read_all().samples;
    const PredictionModel v1 = fx.store.load_current();
    const EvalReport before = evaluate(v1, corpus, 10.0);

    DriftEvent e = check_trigger(100.0, 120.0, 10.0);
    e.query_id = "q49";
    run_retrain(fx.store, fx.history, e, EngineConfig{}, fx.hyper);
    const EvalReport after = evaluate(fx.store.load_current(), corpus, 10.0);
    CHECK(after.within_window_accuracy >= before.within_window_accuracy - 0.05);
}

TEST_CASE("serving model swaps snapshots atomically") {
    auto a = std::make_shared<const PredictionModel>();
    ServingModel serving(a);
    CHECK(serving.snapshot() == a);
    auto b = std::make_shared<const PredictionModel>();
    serving.swap(b);
    CHECK(serving.snapshot() == b);

    // Hammer: a reader sees only complete pointers while a writer churns.
    std::atomic<bool> stop{false};
    std::atomic<int> bad{0};
    std::thread reader([&] {
        while (!stop.load()) {
            auto snap = serving.snapshot();
            if (snap == nullptr) bad.fetch_add(1);
        }
    });
    for (int i = 0; i < 2000; ++i)
        serving.swap(std::make_shared<const PredictionModel>());
    stop.store(true);
    reader.join();
    CHECK(bad.load() == 0);
}

TEST_CASE("coordinator refreshes in-process when configured to stay local") {
    RetrainFixture fx;
    ServingModel serving(std::make_shared<const PredictionModel>(fx.store.load_current()));

    RetrainCoordinator::Options opts;
    opts.model_dir = (fx.tmp.path / "models").string();
    opts.history_path = (fx.tmp.path / "history.jsonl").string();
    opts.config.train_pref_same_instance = true;
    opts.config.train_min_ram_gb = 0.0;
    opts.hyper = fx.hyper;
    opts.worker_exe = SMARTPICK_CLI_PATH; // available but must not be used
    RetrainCoordinator coord(opts, serving);

    DriftEvent e = check_trigger(100.0, 130.0, 10.0);
    e.query_id = "q74";
    coord.schedule(e);
    coord.wait_idle();

    CHECK(coord.completed() == 1);
    CHECK(coord.spawned() == 0);
    CHECK(coord.last_error().empty());
    CHECK(serving.snapshot()->version() == 2);
    CHECK(*fx.store.current_version() == 2);
}

TEST_CASE("coordinator spawns the worker executable when staying local is off") {
    const std::string cli = SMARTPICK_CLI_PATH;
    REQUIRE_FALSE(cli.empty());
    RetrainFixture fx;
    ServingModel serving(std::make_shared<const PredictionModel>(fx.store.load_current()));

    RetrainCoordinator::Options opts;
    opts.model_dir = (fx.tmp.path / "models").string();
    opts.history_path = (fx.tmp.path / "history.jsonl").string();
    opts.config.train_pref_same_instance = false;
    opts.hyper = fx.hyper;
    opts.worker_exe = cli;
    RetrainCoordinator coord(opts, serving);

    DriftEvent e = check_trigger(100.0, 130.0, 10.0);
    e.query_id = "q82";
    coord.schedule(e);
    coord.wait_idle();

    CHECK(coord.completed() == 1);
    CHECK(coord.spawned() == 1);
    CHECK(coord.last_error().empty());
    CHECK(serving.snapshot()->version() == 2);
}

TEST_CASE("a broken worker path falls back to the in-process refresh") {
    RetrainFixture fx;
    ServingModel serving(std::make_shared<const PredictionModel>(fx.store.load_current()));

    RetrainCoordinator::Options opts;
    opts.model_dir = (fx.tmp.path / "models").string();
    opts.history_path = (fx.tmp.path / "history.jsonl").string();
    opts.config.train_pref_same_instance = false;
    opts.hyper = fx.hyper;
    opts.worker_exe = (fx.tmp.path / "no-such-binary").string();
    RetrainCoordinator coord(opts, serving);

    DriftEvent e = check_trigger(100.0, 130.0, 10.0);
    e.query_id = "q11";
    coord.schedule(e);
    coord.wait_idle();

    CHECK(coord.completed() == 1);
    CHECK(coord.spawned() == 0);
    CHECK(serving.snapshot()->version() == 2);
}

TEST_CASE("a failing refresh records the error and leaves serving untouched") {
    RetrainFixture fx;
    ServingModel serving(std::make_shared<const PredictionModel>(fx.store.load_current()));

    RetrainCoordinator::Options opts;
    opts.model_dir = (fx.tmp.path / "models").string();
    opts.history_path = (fx.tmp.path / "history.jsonl").string();
    opts.config.train_pref_same_instance = true;
    opts.config.train_min_ram_gb = 0.0;
    opts.hyper = fx.hyper;
    RetrainCoordinator coord(opts, serving);

    DriftEvent e = check_trigger(100.0, 130.0, 10.0);
    e.query_id = "q_unknown"; // no history rows -> the refresh throws
    coord.schedule(e);
    coord.wait_idle();

    CHECK(coord.completed() == 0);
    CHECK_FALSE(coord.last_error().empty());
    CHECK(serving.snapshot()->version() == 1);
    CHECK(*fx.store.current_version() == 1);
}

TEST_CASE("rapid schedules coalesce to at most one queued event") {
    RetrainFixture fx;
    ServingModel serving(std::make_shared<const PredictionModel>(fx.store.load_current()));

    RetrainCoordinator::Options opts;
    opts.model_dir = (fx.tmp.path / "models").string();
    opts.history_path = (fx.tmp.path / "history.jsonl").string();
    opts.config.train_pref_same_instance = true;
    opts.config.train_min_ram_gb = 0.0;
    opts.hyper = fx.hyper;
    RetrainCoordinator coord(opts, serving);

    for (const char* id : {"q11", "q49", "q68", "q74", "q82"}) {
        DriftEvent e = check_trigger(100.0, 125.0, 10.0);
        e.query_id = id;
        coord.schedule(e);
    }
    coord.wait_idle();

    // One may already be running when the rest arrive; the rest collapse
    // into a single latest-wins slot.
    CHECK(coord.completed() >= 1);
    CHECK(coord.completed() <= 2);
    CHECK(serving.snapshot()->version() == 1 + coord.completed());
}
