#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "smartpick/domain.hpp"
#include "smartpick/similarity.hpp"

namespace smartpick {

// Random-forest hyperparameters. bootstrap=false fits each tree on the full
// training set (used by exact-fit tests; the default keeps bagging).
struct RfHyper {
    int n_trees = 100;
    int max_depth = 12;
    int min_leaf = 2;
    unsigned seed = 42;
    bool bootstrap = true;

    void validate() const;
};

struct TreeNode {
    int feature = -1; // < 0 marks a leaf
    double threshold = 0;
    int left = -1;
    int right = -1;
    double value = 0; // leaf mean
    bool leaf() const { return feature < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes; // nodes[0] is the root
    double predict(const std::array<double, kNumFeatures>& x) const;
};

// Synthetic-sample expansion: factor copies per source sample, every numeric
// field (label included) scaled by an independent uniform factor in
// [1-jitter, 1+jitter]; available_memory re-clamped to total_memory; output
// shuffled. Deterministic for a fixed seed. factor=1, jitter=0 yields a
// permutation of the input.
std::vector<WorkloadSample> augment(const std::vector<WorkloadSample>& samples, int factor,
                                    double jitter, unsigned seed);

struct EvalReport {
    std::size_t n = 0;
    double rmse_s = 0;
    double mean_abs_error_s = 0;
    double within_window_accuracy = 0; // fraction with |err| <= window_s
    double window_s = 10.0;
};

struct TrainReport {
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    EvalReport test;
};

// Completion-time regressor: bagged CART ensemble over the nine numeric
// feature columns; prediction is the ensemble mean clamped to the training
// target range. Carries the structural-signature registry and its training
// rows (warm retraining refits on old-plus-new data).
class PredictionModel {
public:
    bool trained() const { return !trees_.empty(); }
    int version() const { return version_; }
    std::size_t tree_count() const { return trees_.size(); }
    std::size_t training_row_count() const { return rows_.size(); }
    double target_min() const { return target_min_; }
    double target_max() const { return target_max_; }

    // Ensemble-mean completion-time estimate. Throws StateError if untrained.
    double predict(const QueryFeatures& q) const;

    const SignatureRegistry& known_queries() const { return registry_; }
    void merge_registry(const SignatureRegistry& reg);

    std::string to_json() const;
    static PredictionModel from_json(const std::string& text);

    friend struct TrainAccess;

private:
    std::vector<RegressionTree> trees_;
    // retained design matrix: kNumFeatures columns + label
    std::vector<std::array<double, kNumFeatures + 1>> rows_;
    double target_min_ = 0;
    double target_max_ = 0;
    int version_ = 0;
    SignatureRegistry registry_;
};

struct TrainResult {
    PredictionModel model;
    TrainReport report;
};

// Shuffles (seeded), splits train:test by `split`, fits the forest on the
// train part, evaluates on the held-out part. Needs at least one sample on
// each side of the split.
TrainResult train(const std::vector<WorkloadSample>& samples, const RfHyper& hyper,
                  double split = 0.8, double eval_window_s = 10.0);

// Metrics of an existing model against labeled samples.
EvalReport evaluate(const PredictionModel& model, const std::vector<WorkloadSample>& samples,
                    double window_s = 10.0);

// New model = old trees + `added_trees` new trees fitted on the union of the
// old model's retained rows and `new_samples`. The input model is untouched;
// the result's version is old version + 1.
PredictionModel warm_retrain(const PredictionModel& model,
                             const std::vector<WorkloadSample>& new_samples, int added_trees,
                             const RfHyper& hyper);

} // namespace smartpick
