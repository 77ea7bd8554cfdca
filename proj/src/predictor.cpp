#include "smartpick/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "json.hpp"

namespace smartpick {

using nlohmann::json;
using Row = std::array<double, kNumFeatures + 1>;

void RfHyper::validate() const {
    if (n_trees < 1) throw ValidationError("hyper: n_trees must be >= 1");
    if (max_depth < 1) throw ValidationError("hyper: max_depth must be >= 1");
    if (min_leaf < 1) throw ValidationError("hyper: min_leaf must be >= 1");
}

double RegressionTree::predict(const std::array<double, kNumFeatures>& x) const {
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].leaf()) {
        const TreeNode& n = nodes[static_cast<std::size_t>(i)];
        i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

std::vector<WorkloadSample> augment(const std::vector<WorkloadSample>& samples, int factor,
                                    double jitter, unsigned seed) {
    if (samples.empty()) throw ValidationError("augment: no samples to expand");
    if (factor < 1) throw ValidationError("augment: factor must be >= 1");
    if (!(jitter >= 0.0 && jitter < 1.0)) throw ValidationError("augment: jitter must be in [0, 1)");
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(1.0 - jitter, 1.0 + jitter);
    std::vector<WorkloadSample> out;
    out.reserve(samples.size() * static_cast<std::size_t>(factor));
    for (const WorkloadSample& s : samples) {
        s.validate();
        for (int k = 0; k < factor; ++k) {
            WorkloadSample c = s;
            c.features.n_vm = s.features.n_vm * u(rng);
            c.features.n_sl = s.features.n_sl * u(rng);
            c.features.input_size_bytes = s.features.input_size_bytes * u(rng);
            c.features.start_time_epoch = s.features.start_time_epoch * u(rng);
            c.features.total_memory_mb = s.features.total_memory_mb * u(rng);
            c.features.available_memory_mb = s.features.available_memory_mb * u(rng);
            c.features.memory_per_executor_mb = s.features.memory_per_executor_mb * u(rng);
            c.features.num_waiting_apps = s.features.num_waiting_apps * u(rng);
            c.features.total_available_cores = s.features.total_available_cores * u(rng);
            c.query_duration_s = s.query_duration_s * u(rng);
            // independent factors can momentarily break available <= total;
            // clamping stays within the jitter band of the source value
            c.features.available_memory_mb =
                std::min(c.features.available_memory_mb, c.features.total_memory_mb);
            out.push_back(std::move(c));
        }
    }
    std::shuffle(out.begin(), out.end(), rng);
    return out;
}

namespace {

struct TreeBuilder {
    const std::vector<Row>& rows;
    int max_depth;
    int min_leaf;
    std::vector<TreeNode> nodes;

    int build(std::vector<int>& idx, int depth) {
        const auto n = static_cast<int>(idx.size());
        double sum = 0, sumsq = 0;
        for (int i : idx) {
            const double y = rows[static_cast<std::size_t>(i)][kNumFeatures];
            sum += y;
            sumsq += y * y;
        }
        const double mean = sum / n;
        const double parent_sse = std::max(0.0, sumsq - sum * sum / n);

        auto leaf = [&]() {
            nodes.push_back(TreeNode{-1, 0, -1, -1, mean});
            return static_cast<int>(nodes.size()) - 1;
        };
        if (depth >= max_depth || n < 2 * min_leaf || parent_sse <= 1e-12) return leaf();

        int best_feature = -1;
        int best_pos = -1;
        double best_threshold = 0;
        double best_sse = parent_sse - 1e-12;

        std::vector<int> sorted = idx;
        std::vector<int> best_sorted;
        for (int f = 0; f < kNumFeatures; ++f) {
            std::sort(sorted.begin(), sorted.end(), [&](int a, int b) {
                const double va = rows[static_cast<std::size_t>(a)][static_cast<std::size_t>(f)];
                const double vb = rows[static_cast<std::size_t>(b)][static_cast<std::size_t>(f)];
                if (va != vb) return va < vb;
                return a < b; // stable order for determinism
            });
            double lsum = 0, lsumsq = 0;
            for (int pos = 1; pos < n; ++pos) {
                const double y = rows[static_cast<std::size_t>(sorted[static_cast<std::size_t>(pos - 1)])][kNumFeatures];
                lsum += y;
                lsumsq += y * y;
                const double va =
                    rows[static_cast<std::size_t>(sorted[static_cast<std::size_t>(pos - 1)])][static_cast<std::size_t>(f)];
                const double vb =
                    rows[static_cast<std::size_t>(sorted[static_cast<std::size_t>(pos)])][static_cast<std::size_t>(f)];
                if (va == vb) continue;               // no threshold separates equal values
                if (pos < min_leaf || n - pos < min_leaf) continue;
                const double rsum = sum - lsum;
                const double rsumsq = sumsq - lsumsq;
                const double sse = std::max(0.0, lsumsq - lsum * lsum / pos) +
                                   std::max(0.0, rsumsq - rsum * rsum / (n - pos));
                if (sse < best_sse) {
                    best_sse = sse;
                    best_feature = f;
                    best_pos = pos;
                    best_threshold = va + (vb - va) / 2;
                    if (!(best_threshold > va)) best_threshold = va; // degenerate spacing
                    best_sorted = sorted;
                }
            }
        }
        if (best_feature < 0) return leaf();

        std::vector<int> left_idx(best_sorted.begin(), best_sorted.begin() + best_pos);
        std::vector<int> right_idx(best_sorted.begin() + best_pos, best_sorted.end());

        const int me = static_cast<int>(nodes.size());
        nodes.push_back(TreeNode{best_feature, best_threshold, -1, -1, mean});
        const int l = build(left_idx, depth + 1);
        const int r = build(right_idx, depth + 1);
        nodes[static_cast<std::size_t>(me)].left = l;
        nodes[static_cast<std::size_t>(me)].right = r;
        return me;
    }
};

RegressionTree fit_tree(const std::vector<Row>& rows, const std::vector<int>& idx, int max_depth,
                        int min_leaf) {
    TreeBuilder b{rows, max_depth, min_leaf, {}};
    b.nodes.reserve(idx.size() * 2);
    std::vector<int> root = idx;
    b.build(root, 0);
    RegressionTree t;
    t.nodes = std::move(b.nodes);
    return t;
}

std::vector<RegressionTree> fit_forest(const std::vector<Row>& rows, int n_trees,
                                       const RfHyper& hyper, std::mt19937& rng) {
    std::vector<RegressionTree> trees;
    trees.reserve(static_cast<std::size_t>(n_trees));
    const auto n = static_cast<int>(rows.size());
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int t = 0; t < n_trees; ++t) {
        std::vector<int> idx;
        idx.reserve(static_cast<std::size_t>(n));
        if (hyper.bootstrap) {
            for (int i = 0; i < n; ++i) idx.push_back(pick(rng));
        } else {
            idx.resize(static_cast<std::size_t>(n));
            std::iota(idx.begin(), idx.end(), 0);
        }
        trees.push_back(fit_tree(rows, idx, hyper.max_depth, hyper.min_leaf));
    }
    return trees;
}

Row to_row(const WorkloadSample& s) {
    Row r;
    const auto x = feature_vector(s.features);
    std::copy(x.begin(), x.end(), r.begin());
    r[kNumFeatures] = s.query_duration_s;
    return r;
}

} // namespace

double PredictionModel::predict(const QueryFeatures& q) const {
    if (!trained()) throw StateError("model has no trees; train it first");
    const auto x = feature_vector(q);
    double sum = 0;
    for (const RegressionTree& t : trees_) sum += t.predict(x);
    const double mean = sum / static_cast<double>(trees_.size());
    return std::clamp(mean, target_min_, target_max_);
}

void PredictionModel::merge_registry(const SignatureRegistry& reg) {
    for (const auto& [id, sig] : reg) registry_[id] = sig;
}

struct TrainAccess {
    static PredictionModel make(std::vector<RegressionTree> trees, std::vector<Row> rows,
                                int version, SignatureRegistry registry) {
        PredictionModel m;
        m.trees_ = std::move(trees);
        m.rows_ = std::move(rows);
        m.version_ = version;
        m.registry_ = std::move(registry);
        m.target_min_ = std::numeric_limits<double>::infinity();
        m.target_max_ = -std::numeric_limits<double>::infinity();
        for (const Row& r : m.rows_) {
            m.target_min_ = std::min(m.target_min_, r[kNumFeatures]);
            m.target_max_ = std::max(m.target_max_, r[kNumFeatures]);
        }
        if (m.rows_.empty()) m.target_min_ = m.target_max_ = 0;
        return m;
    }
    static const std::vector<Row>& rows(const PredictionModel& m) { return m.rows_; }
    static const std::vector<RegressionTree>& trees(const PredictionModel& m) { return m.trees_; }
};

TrainResult train(const std::vector<WorkloadSample>& samples, const RfHyper& hyper, double split,
                  double eval_window_s) {
    hyper.validate();
    if (!(split > 0.0 && split < 1.0)) throw ValidationError("train: split must be in (0, 1)");
    if (samples.size() < 10) throw ValidationError("train: need at least 10 samples");

    std::mt19937 rng(hyper.seed);
    std::vector<int> perm(samples.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);

    auto n_train = static_cast<std::size_t>(std::llround(split * static_cast<double>(samples.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, samples.size() - 1);

    std::vector<Row> train_rows;
    train_rows.reserve(n_train);
    std::vector<WorkloadSample> test;
    test.reserve(samples.size() - n_train);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const WorkloadSample& s = samples[perm[i]];
        s.validate();
        if (i < n_train)
            train_rows.push_back(to_row(s));
        else
            test.push_back(s);
    }

    auto trees = fit_forest(train_rows, hyper.n_trees, hyper, rng);
    PredictionModel model = TrainAccess::make(std::move(trees), std::move(train_rows), 1, {});

    TrainResult res{std::move(model), {}};
    res.report.n_train = n_train;
    res.report.n_test = test.size();
    res.report.test = evaluate(res.model, test, eval_window_s);
    return res;
}

EvalReport evaluate(const PredictionModel& model, const std::vector<WorkloadSample>& samples,
                    double window_s) {
    if (!model.trained()) throw StateError("cannot evaluate an untrained model");
    if (samples.empty()) throw ValidationError("evaluate: no samples");
    EvalReport r;
    r.window_s = window_s;
    r.n = samples.size();
    double sse = 0, sae = 0;
    std::size_t hits = 0;
    for (const WorkloadSample& s : samples) {
        const double err = model.predict(s.features) - s.query_duration_s;
        sse += err * err;
        sae += std::abs(err);
        if (std::abs(err) <= window_s) ++hits;
    }
    r.rmse_s = std::sqrt(sse / static_cast<double>(samples.size()));
    r.mean_abs_error_s = sae / static_cast<double>(samples.size());
    r.within_window_accuracy = static_cast<double>(hits) / static_cast<double>(samples.size());
    return r;
}

PredictionModel warm_retrain(const PredictionModel& model,
                             const std::vector<WorkloadSample>& new_samples, int added_trees,
                             const RfHyper& hyper) {
    if (!model.trained()) throw StateError("warm retrain needs a trained model");
    if (new_samples.empty()) throw ValidationError("warm retrain: no new samples");
    if (added_trees < 1) throw ValidationError("warm retrain: added_trees must be >= 1");
    hyper.validate();

    std::vector<Row> rows = TrainAccess::rows(model);
    rows.reserve(rows.size() + new_samples.size());
    for (const WorkloadSample& s : new_samples) {
        s.validate();
        rows.push_back(to_row(s));
    }
    if (rows.empty()) throw ValidationError("warm retrain: no data");

    std::mt19937 rng(hyper.seed + static_cast<unsigned>(model.version()));
    auto fresh = fit_forest(rows, added_trees, hyper, rng);

    std::vector<RegressionTree> trees = TrainAccess::trees(model);
    trees.insert(trees.end(), std::make_move_iterator(fresh.begin()),
                 std::make_move_iterator(fresh.end()));
    return TrainAccess::make(std::move(trees), std::move(rows), model.version() + 1,
                             model.known_queries());
}

std::string PredictionModel::to_json() const {
    json j;
    j["format"] = "smartpick-rf-1";
    j["version"] = version_;
    j["target_min"] = target_min_;
    j["target_max"] = target_max_;
    j["feature_order"] = json::array();
    for (const char* name : kFeatureNames) j["feature_order"].push_back(name);
    json trees = json::array();
    for (const RegressionTree& t : trees_) {
        json nodes = json::array();
        for (const TreeNode& n : t.nodes)
            nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.value}));
        trees.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees);
    json rows = json::array();
    for (const Row& r : rows_) rows.push_back(r);
    j["training_rows"] = std::move(rows);
    json reg = json::object();
    for (const auto& [id, sig] : registry_) {
        reg[id] = {{"n_tables", sig.n_tables},
                   {"n_columns", sig.n_columns},
                   {"n_subqueries", sig.n_subqueries},
                   {"n_map_tasks", sig.n_map_tasks}};
    }
    j["known_queries"] = std::move(reg);
    return j.dump();
}

PredictionModel PredictionModel::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("bad model file: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "smartpick-rf-1")
            throw ParseError("bad model file: unknown format tag");
        std::vector<RegressionTree> trees;
        for (const json& tn : j.at("trees")) {
            RegressionTree t;
            for (const json& n : tn) {
                TreeNode node;
                node.feature = n.at(0).get<int>();
                node.threshold = n.at(1).get<double>();
                node.left = n.at(2).get<int>();
                node.right = n.at(3).get<int>();
                node.value = n.at(4).get<double>();
                t.nodes.push_back(node);
            }
            trees.push_back(std::move(t));
        }
        std::vector<Row> rows;
        for (const json& rj : j.at("training_rows")) {
            Row r;
            for (std::size_t i = 0; i < r.size(); ++i) r[i] = rj.at(i).get<double>();
            rows.push_back(r);
        }
        SignatureRegistry reg;
        for (const auto& [id, sj] : j.at("known_queries").items()) {
            StructuralSignature sig;
            sig.n_tables = sj.at("n_tables").get<double>();
            sig.n_columns = sj.at("n_columns").get<double>();
            sig.n_subqueries = sj.at("n_subqueries").get<double>();
            sig.n_map_tasks = sj.at("n_map_tasks").get<double>();
            reg[id] = sig;
        }
        PredictionModel m = TrainAccess::make(std::move(trees), std::move(rows),
                                              j.at("version").get<int>(), std::move(reg));
        // target bounds are recomputed from rows; trust the file only if sane
        if (j.contains("target_min")) {
            m.target_min_ = j.at("target_min").get<double>();
            m.target_max_ = j.at("target_max").get<double>();
        }
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad model file: ") + e.what());
    }
}

} // namespace smartpick
