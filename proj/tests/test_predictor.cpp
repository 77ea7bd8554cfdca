// Completion-time regressor: sample augmentation, forest training oracles,
// evaluation metrics, warm retraining, serialization, and the model store.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "scenario.hpp"
#include "smartpick/errors.hpp"
#include "smartpick/model_store.hpp"
#include "smartpick/predictor.hpp"

using namespace smartpick;

namespace {

WorkloadSample make_sample(const std::string& id, double n_vm, double n_sl, double input,
                           double label) {
    WorkloadSample s;
    s.features.query_id = id;
    s.features.n_vm = n_vm;
    s.features.n_sl = n_sl;
    s.features.input_size_bytes = input;
    s.features.start_time_epoch = 1.7e9;
    s.features.total_memory_mb = 10000;
    s.features.available_memory_mb = 8000;
    s.features.memory_per_executor_mb = 2048;
    s.features.num_waiting_apps = 1;
    s.features.total_available_cores = 2 * n_vm + n_sl;
    s.query_duration_s = label;
    return s;
}

// n copies each of two well-separated classes; duplicated rows make the
// class means invariant to how the train/test split falls.
std::vector<WorkloadSample> two_class_corpus(int copies, double label_a, double label_b) {
    std::vector<WorkloadSample> out;
    for (int i = 0; i < copies; ++i) {
        out.push_back(make_sample("a", 1, 0, 1.0e9, label_a));
        out.push_back(make_sample("b", 8, 8, 9.0e9, label_b));
    }
    return out;
}

std::vector<double> sorted_labels(const std::vector<WorkloadSample>& v) {
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& s : v) out.push_back(s.query_duration_s);
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST_CASE("hyperparameter validation") {
    RfHyper h;
    CHECK_NOTHROW(h.validate());
    h.n_trees = 0;
    CHECK_THROWS_AS(h.validate(), ValidationError);
    h = RfHyper{};
    h.max_depth = 0;
    CHECK_THROWS_AS(h.validate(), ValidationError);
    h = RfHyper{};
    h.min_leaf = 0;
    CHECK_THROWS_AS(h.validate(), ValidationError);
}

TEST_CASE("augment produces factor copies per sample inside the jitter band") {
    const std::vector<WorkloadSample> src = {make_sample("q1", 2, 3, 4.0e9, 120.0)};
    const auto out = augment(src, 10, 0.05, 7);
    REQUIRE(out.size() == 10);
    for (const auto& s : out) {
        CHECK(s.features.query_id == "q1");
        CHECK(s.features.n_vm >= 0.95 * 2);
        CHECK(s.features.n_vm <= 1.05 * 2);
        CHECK(s.features.n_sl >= 0.95 * 3);
        CHECK(s.features.n_sl <= 1.05 * 3);
        CHECK(s.features.input_size_bytes >= 0.95 * 4.0e9);
        CHECK(s.features.input_size_bytes <= 1.05 * 4.0e9);
        CHECK(s.query_duration_s >= 0.95 * 120.0);
        CHECK(s.query_duration_s <= 1.05 * 120.0);
        CHECK(s.features.available_memory_mb <= s.features.total_memory_mb);
        CHECK_NOTHROW(s.validate());
    }
}

TEST_CASE("augment with factor 1 and zero jitter is a permutation") {
    std::vector<WorkloadSample> src;
    for (int i = 0; i < 20; ++i) src.push_back(make_sample("q" + std::to_string(i), i % 4, 1, 1e9, 10.0 + i));
    const auto out = augment(src, 1, 0.0, 3);
    REQUIRE(out.size() == src.size());
    CHECK(sorted_labels(out) == sorted_labels(src));
    // Some reordering actually happened for this seed.
    bool moved = false;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (!(out[i] == src[i])) moved = true;
    CHECK(moved);
}

TEST_CASE("augment is deterministic per seed and errors on bad input") {
    const std::vector<WorkloadSample> src = {make_sample("q1", 2, 3, 4.0e9, 120.0),
                                             make_sample("q2", 1, 1, 2.0e9, 60.0)};
    const auto a = augment(src, 5, 0.05, 11);
    const auto b = augment(src, 5, 0.05, 11);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    const auto c = augment(src, 5, 0.05, 12);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(a[i] == c[i])) differs = true;
    CHECK(differs);

    CHECK_THROWS_AS(augment({}, 5, 0.05, 1), ValidationError);
    CHECK_THROWS_AS(augment(src, 0, 0.05, 1), ValidationError);
    CHECK_THROWS_AS(augment(src, 5, -0.1, 1), ValidationError);
    CHECK_THROWS_AS(augment(src, 5, 1.0, 1), ValidationError);
}

TEST_CASE("training requires enough samples and a usable split") {
    std::vector<WorkloadSample> nine;
    for (int i = 0; i < 9; ++i) nine.push_back(make_sample("q", 1, 1, 1e9, 10 + i));
    CHECK(scenario::throws_containing<ValidationError>(
        [&] { train(nine, RfHyper{}); }, "at least 10"));
    CHECK_THROWS_AS(train(two_class_corpus(10, 30, 90), RfHyper{}, 0.0), ValidationError);
    CHECK_THROWS_AS(train(two_class_corpus(10, 30, 90), RfHyper{}, 1.0), ValidationError);
}

TEST_CASE("constant-target corpus trains to a constant exact predictor") {
    std::vector<WorkloadSample> src;
    for (int i = 0; i < 24; ++i) src.push_back(make_sample("q" + std::to_string(i % 5), i % 4, (i * 7) % 5, 1e8 * (1 + i), 40.0));
    const TrainResult r = train(src, RfHyper{});
    CHECK(r.report.n_train + r.report.n_test == 24);
    CHECK(r.report.test.rmse_s == doctest::Approx(0.0));
    CHECK(r.report.test.within_window_accuracy == doctest::Approx(1.0));
    CHECK(r.model.predict(make_sample("new", 3, 3, 5e9, 0).features) == doctest::Approx(40.0));
    CHECK(r.model.target_min() == doctest::Approx(40.0));
    CHECK(r.model.target_max() == doctest::Approx(40.0));
    CHECK(r.model.version() == 1);
}

TEST_CASE("a depth-one stump splits two classes at their means") {
    RfHyper h;
    h.n_trees = 1;
    h.max_depth = 1;
    h.min_leaf = 1;
    h.bootstrap = false;
    const TrainResult r = train(two_class_corpus(10, 30.0, 90.0), h, 0.8);
    CHECK(r.model.tree_count() == 1);
    CHECK(r.model.predict(make_sample("a", 1, 0, 1.0e9, 0).features) == doctest::Approx(30.0));
    CHECK(r.model.predict(make_sample("b", 8, 8, 9.0e9, 0).features) == doctest::Approx(90.0));
}

TEST_CASE("an unrestricted single tree on the full data reproduces training labels") {
    RfHyper h;
    h.n_trees = 1;
    h.max_depth = 64;
    h.min_leaf = 1;
    h.bootstrap = false;
    std::vector<WorkloadSample> src;
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> label(5.0, 500.0);
    for (int i = 0; i < 50; ++i)
        src.push_back(make_sample("q" + std::to_string(i), i % 9, (i / 9) % 9, 1e8 * (1 + i), label(rng)));
    const TrainResult r = train(src, h, 0.8);
    // Every training-partition row sits alone in a leaf, so at least
    // n_train of the 50 inputs predict their own label exactly.
    int exact = 0;
    for (const auto& s : src)
        if (std::abs(r.model.predict(s.features) - s.query_duration_s) < 1e-9) ++exact;
    CHECK(exact >= static_cast<int>(r.report.n_train));
    CHECK(r.report.n_train == 40);
    CHECK(r.report.n_test == 10);
}

TEST_CASE("with bagging disabled the ensemble mean equals a single tree") {
    RfHyper one;
    one.n_trees = 1;
    one.bootstrap = false;
    RfHyper three = one;
    three.n_trees = 3;
    const auto corpus = two_class_corpus(12, 25.0, 75.0);
    const TrainResult a = train(corpus, one, 0.8);
    const TrainResult b = train(corpus, three, 0.8);
    for (int vm = 0; vm <= 8; ++vm) {
        const auto probe = make_sample("p", vm, 8 - vm, 1e9 * (1 + vm), 0).features;
        CHECK(a.model.predict(probe) == doctest::Approx(b.model.predict(probe)).epsilon(1e-12));
    }
}

TEST_CASE("training is deterministic for a fixed seed") {
    std::vector<WorkloadSample> src;
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> label(10.0, 300.0);
    for (int i = 0; i < 60; ++i)
        src.push_back(make_sample("q" + std::to_string(i % 6), i % 5, i % 7, 1e8 * (1 + i % 11), label(rng)));
    const TrainResult a = train(src, RfHyper{});
    const TrainResult b = train(src, RfHyper{});
    CHECK(a.report.test.rmse_s == b.report.test.rmse_s);
    CHECK(a.report.n_train == b.report.n_train);
    for (int i = 0; i < 10; ++i) {
        const auto probe = make_sample("p", i % 4, i % 3, 2e8 * (1 + i), 0).features;
        CHECK(a.model.predict(probe) == b.model.predict(probe));
    }
}

TEST_CASE("predictions are clamped to the training target range") {
    const TrainResult r = train(two_class_corpus(10, 30.0, 90.0), RfHyper{}, 0.8);
    for (double vm = 0; vm <= 8; ++vm) {
        const double y = r.model.predict(make_sample("p", vm, 8 - vm, 1e10 * (vm + 1), 0).features);
        CHECK(y >= r.model.target_min() - 1e-12);
        CHECK(y <= r.model.target_max() + 1e-12);
    }
}

TEST_CASE("predicting with an untrained model is a state error") {
    const PredictionModel empty;
    CHECK_FALSE(empty.trained());
    CHECK_THROWS_AS(empty.predict(make_sample("q", 1, 1, 1e9, 0).features), StateError);
}

TEST_CASE("evaluation metrics match hand-computed values") {
    // A constant-40 model, checked against labels chosen by hand.
    std::vector<WorkloadSample> constant;
    for (int i = 0; i < 12; ++i) constant.push_back(make_sample("q", i % 3, i % 2, 1e9, 40.0));
    const PredictionModel model = train(constant, RfHyper{}).model;

    SUBCASE("perfect predictions") {
        const EvalReport e = evaluate(model, constant, 10.0);
        CHECK(e.n == 12);
        CHECK(e.rmse_s == doctest::Approx(0.0));
        CHECK(e.mean_abs_error_s == doctest::Approx(0.0));
        CHECK(e.within_window_accuracy == doctest::Approx(1.0));
    }
    SUBCASE("one of two samples off by 20 s halves the windowed accuracy") {
        const std::vector<WorkloadSample> probes = {make_sample("q", 1, 1, 1e9, 40.0),
                                                    make_sample("q", 2, 0, 1e9, 60.0)};
        const EvalReport e = evaluate(model, probes, 10.0);
        CHECK(e.n == 2);
        CHECK(e.within_window_accuracy == doctest::Approx(0.5));
        CHECK(e.mean_abs_error_s == doctest::Approx(10.0));
        CHECK(e.rmse_s == doctest::Approx(std::sqrt(200.0)));
    }
    SUBCASE("an error exactly at the window edge counts as within") {
        const std::vector<WorkloadSample> probes = {make_sample("q", 1, 1, 1e9, 50.0)};
        const EvalReport e = evaluate(model, probes, 10.0);
        CHECK(e.within_window_accuracy == doctest::Approx(1.0));
    }
    SUBCASE("rmse of the mean predictor is the population standard deviation") {
        // Labels 20,30,40,50,60 have mean 40 and population std sqrt(200).
        std::vector<WorkloadSample> probes;
        for (int i = 0; i < 5; ++i) probes.push_back(make_sample("q", 1, 1, 1e9, 20.0 + 10 * i));
        const EvalReport e = evaluate(model, probes, 10.0);
        CHECK(e.rmse_s == doctest::Approx(std::sqrt(200.0)));
    }
    SUBCASE("empty evaluation set is an error") {
        CHECK_THROWS_AS(evaluate(model, {}, 10.0), ValidationError);
    }
}

TEST_CASE("warm retraining appends trees, bumps the version, keeps the old model intact") {
    const auto corpus = two_class_corpus(12, 25.0, 75.0);
    const TrainResult base = train(corpus, RfHyper{}, 0.8);
    const double before_a = base.model.predict(make_sample("a", 1, 0, 1.0e9, 0).features);
    const double before_c = base.model.predict(make_sample("c", 4, 4, 5.0e9, 0).features);

    std::vector<WorkloadSample> fresh;
    for (int i = 0; i < 8; ++i) fresh.push_back(make_sample("c", 4, 4, 5.0e9, 200.0));
    const PredictionModel next = warm_retrain(base.model, fresh, 50, RfHyper{});

    CHECK(next.version() == base.model.version() + 1);
    CHECK(next.tree_count() == base.model.tree_count() + 50);
    CHECK(next.training_row_count() == base.model.training_row_count() + fresh.size());
    // Old model is untouched and still serves the same numbers.
    CHECK(base.model.version() == 1);
    CHECK(base.model.tree_count() == 100);
    CHECK(base.model.predict(make_sample("a", 1, 0, 1.0e9, 0).features) ==
          doctest::Approx(before_a));
    // The new model has absorbed the new region: with 50 of 150 trees fitted
    // on the 200s labels and the old prediction clamped at or below 75, the
    // ensemble must move at least (200 - 75) / 3 toward the new labels.
    const double after_c = next.predict(make_sample("c", 4, 4, 5.0e9, 0).features);
    CHECK(after_c >= before_c + 40.0);
    CHECK(next.target_max() >= 200.0 * 0.999);

    CHECK_THROWS_AS(warm_retrain(base.model, {}, 50, RfHyper{}), ValidationError);
    CHECK_THROWS_AS(warm_retrain(base.model, fresh, 0, RfHyper{}), ValidationError);
    CHECK_THROWS_AS(warm_retrain(PredictionModel{}, fresh, 10, RfHyper{}), StateError);
}

TEST_CASE("warm retraining on same-distribution data keeps accuracy") {
    const auto corpus = scenario::make_corpus(scenario::five_classes(), 12, ProviderProfile{},
                                              2.0, 21);
    RfHyper h;
    const TrainResult base = scenario::train_pipeline(corpus, h);
    const EvalReport before = evaluate(base.model, corpus, 10.0);
    const auto more = scenario::make_corpus(scenario::five_classes(), 6, ProviderProfile{}, 2.0,
                                            22);
    const PredictionModel next = warm_retrain(base.model, more, 20, h);
    const EvalReport after = evaluate(next, corpus, 10.0);
    CHECK(after.within_window_accuracy >= before.within_window_accuracy - 0.05);
}

TEST_CASE("model json round-trips structure, registry, and predictions") {
    const auto corpus = two_class_corpus(12, 25.0, 75.0);
    TrainResult r = train(corpus, RfHyper{}, 0.8);
    r.model.merge_registry(scenario::five_class_registry());
    const std::string text = r.model.to_json();
    const PredictionModel back = PredictionModel::from_json(text);
    CHECK(back.trained());
    CHECK(back.version() == r.model.version());
    CHECK(back.tree_count() == r.model.tree_count());
    CHECK(back.training_row_count() == r.model.training_row_count());
    CHECK(back.target_min() == r.model.target_min());
    CHECK(back.target_max() == r.model.target_max());
    CHECK(back.known_queries().size() == 5);
    CHECK(back.known_queries().count("q68") == 1);
    for (int i = 0; i < 10; ++i) {
        const auto probe = make_sample("p", i % 5, i % 4, 3e8 * (1 + i), 0).features;
        CHECK(back.predict(probe) == r.model.predict(probe));
    }
}

TEST_CASE("model json rejects malformed or foreign documents") {
    CHECK_THROWS_AS(PredictionModel::from_json("not json"), ParseError);
    CHECK_THROWS_AS(PredictionModel::from_json("{}"), ParseError);
    CHECK_THROWS_AS(PredictionModel::from_json("{\"format\": \"other-model-9\"}"), ParseError);
}

TEST_CASE("merge_registry adds and overwrites signatures") {
    PredictionModel m;
    SignatureRegistry a;
    a["q1"] = StructuralSignature{1, 2, 0, 4};
    m.merge_registry(a);
    CHECK(m.known_queries().size() == 1);
    SignatureRegistry b;
    b["q1"] = StructuralSignature{3, 3, 1, 8};
    b["q2"] = StructuralSignature{2, 5, 0, 6};
    m.merge_registry(b);
    CHECK(m.known_queries().size() == 2);
    CHECK(m.known_queries().at("q1").n_tables == 3);
}

TEST_CASE("model store publishes versioned files behind a CURRENT pointer") {
    scenario::TempDir tmp;
    ModelStore store(tmp.path);
    CHECK_FALSE(store.current_version().has_value());
    CHECK_THROWS_AS(store.load_current(), StateError);
    CHECK_THROWS_AS(store.publish(PredictionModel{}), StateError);

    const auto corpus = two_class_corpus(12, 25.0, 75.0);
    const TrainResult r = train(corpus, RfHyper{}, 0.8);
    store.publish(r.model);
    REQUIRE(store.current_version().has_value());
    CHECK(*store.current_version() == 1);
    CHECK(std::filesystem::exists(store.model_path(1)));

    const PredictionModel v1 = store.load_current();
    CHECK(v1.version() == 1);
    CHECK(v1.tree_count() == r.model.tree_count());

    std::vector<WorkloadSample> fresh = {make_sample("c", 4, 4, 5.0e9, 150.0),
                                         make_sample("c", 4, 5, 5.5e9, 160.0)};
    const PredictionModel v2 = warm_retrain(v1, fresh, 10, RfHyper{});
    store.publish(v2);
    CHECK(*store.current_version() == 2);
    CHECK(store.load_current().version() == 2);
    // The old version's file remains readable.
    CHECK(std::filesystem::exists(store.model_path(1)));
    std::ifstream old_file(store.model_path(1));
    std::string old_text((std::istreambuf_iterator<char>(old_file)),
                         std::istreambuf_iterator<char>());
    CHECK(PredictionModel::from_json(old_text).version() == 1);
}

TEST_CASE("a corrupt CURRENT pointer is a parse error") {
    scenario::TempDir tmp;
    ModelStore store(tmp.path);
    const auto corpus = two_class_corpus(12, 25.0, 75.0);
    store.publish(train(corpus, RfHyper{}, 0.8).model);
    {
        std::ofstream cur(tmp.file("CURRENT"));
        cur << "model-xyz.json\n";
    }
    CHECK_THROWS_AS(store.load_current(), ParseError);
}
