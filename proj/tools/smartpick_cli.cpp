// smartpick: operator command line for the fleet planner.
//
// Subcommands: gen (synthesize a labeled history), train (fit + publish a
// model), plan (pick a fleet for a query), simulate (one run), sweep (grid
// CSV), compare (three planning strategies), serve (TCP planning endpoint),
// retrain-worker (internal: one background refresh pass).

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "smartpick/compare.hpp"
#include "smartpick/config.hpp"
#include "smartpick/domain.hpp"
#include "smartpick/dynamics.hpp"
#include "smartpick/errors.hpp"
#include "smartpick/history.hpp"
#include "smartpick/model_store.hpp"
#include "smartpick/optimizer.hpp"
#include "smartpick/planner.hpp"
#include "smartpick/predictor.hpp"
#include "smartpick/service.hpp"
#include "smartpick/similarity.hpp"
#include "smartpick/simulator.hpp"

namespace {

using namespace smartpick;

ProviderProfile profile_or_default(const std::string& path) {
    if (path.empty()) return ProviderProfile{};
    return load_profile(path);
}

EngineConfig config_or_default(const std::string& path) {
    if (path.empty()) return EngineConfig{};
    std::vector<std::string> warnings;
    EngineConfig cfg = load_config(path, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    return cfg;
}

std::string self_exe() {
    std::error_code ec;
    auto p = std::filesystem::read_symlink("/proc/self/exe", ec);
    return ec ? std::string{} : p.string();
}

// Representative query texts for synthesized classes; class i uses shape
// i mod 5. Shapes differ in table/column/subquery counts so the structural
// signatures stay distinguishable.
const char* canned_sql(std::size_t i) {
    static const char* kShapes[5] = {
        "SELECT c_customer_id, SUM(ss_net_paid) AS total FROM store_sales "
        "JOIN customer ON ss_customer_sk = c_customer_sk "
        "WHERE ss_sold_date_sk > 2450815 GROUP BY c_customer_id ORDER BY total",
        "SELECT i_item_id, AVG(ws_quantity) FROM web_sales "
        "JOIN item ON ws_item_sk = i_item_sk "
        "JOIN date_dim ON ws_sold_date_sk = d_date_sk "
        "WHERE d_year = 2001 GROUP BY i_item_id",
        "SELECT s_store_name, COUNT(*) FROM store_sales "
        "JOIN store ON ss_store_sk = s_store_sk "
        "WHERE ss_quantity > 10 GROUP BY s_store_name",
        "SELECT * FROM (SELECT cs_item_sk, SUM(cs_ext_sales_price) AS revenue "
        "FROM catalog_sales GROUP BY cs_item_sk) t "
        "WHERE revenue > (SELECT AVG(cs_list_price) FROM catalog_sales)",
        "SELECT w_warehouse_name, sm_type, cc_name FROM catalog_sales "
        "JOIN warehouse ON cs_warehouse_sk = w_warehouse_sk "
        "JOIN ship_mode ON cs_ship_mode_sk = sm_ship_mode_sk "
        "JOIN call_center ON cs_call_center_sk = cc_call_center_sk "
        "GROUP BY w_warehouse_name, sm_type, cc_name",
    };
    return kShapes[i % 5];
}

struct QueryClass {
    std::string id;
    int n_tasks = 0;
};

std::vector<QueryClass> parse_classes(const std::string& text) {
    std::vector<QueryClass> classes;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::string item =
            text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!item.empty()) {
            const std::size_t colon = item.find(':');
            if (colon == std::string::npos || colon == 0 || colon + 1 >= item.size())
                throw ParseError("class '" + item + "' is not of the form id:tasks");
            QueryClass qc;
            qc.id = item.substr(0, colon);
            try {
                qc.n_tasks = std::stoi(item.substr(colon + 1));
            } catch (const std::exception&) {
                throw ParseError("class '" + item + "' has a non-integer task count");
            }
            if (qc.n_tasks < 1) throw ParseError("class '" + item + "' needs >= 1 tasks");
            classes.push_back(qc);
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (classes.empty()) throw ParseError("no query classes given");
    return classes;
}

void write_registry(const SignatureRegistry& reg, const std::string& path) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [id, sig] : reg) {
        j[id] = {{"n_tables", sig.n_tables},
                 {"n_columns", sig.n_columns},
                 {"n_subqueries", sig.n_subqueries},
                 {"n_map_tasks", sig.n_map_tasks}};
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << "\n";
}

SignatureRegistry read_registry(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    SignatureRegistry reg;
    for (auto it = j.begin(); it != j.end(); ++it) {
        StructuralSignature sig;
        sig.n_tables = it.value().at("n_tables").get<double>();
        sig.n_columns = it.value().at("n_columns").get<double>();
        sig.n_subqueries = it.value().at("n_subqueries").get<double>();
        sig.n_map_tasks = it.value().at("n_map_tasks").get<double>();
        reg[it.key()] = sig;
    }
    return reg;
}

int run(int argc, char** argv) {
    CLI::App app{"smartpick: cost-aware fleet planning for hybrid serverless/VM analytics"};
    app.require_subcommand(1);

    // ---- gen ----------------------------------------------------------
    struct {
        std::string out, profile, signatures;
        std::string classes = "q11:15,q49:25,q68:40,q74:60,q82:80";
        unsigned seed = 42;
        int fleets_per_class = 20;
        int max_vm = 5, max_sl = 5;
        double service_s = 2.0;
    } gen;
    auto* cmd_gen = app.add_subcommand("gen", "Synthesize a simulator-labeled training history");
    cmd_gen->add_option("--out", gen.out, "history JSON-lines file to write")->required();
    cmd_gen->add_option("--profile", gen.profile, "provider profile file");
    cmd_gen->add_option("--classes", gen.classes, "query classes as id:tasks,id:tasks,...");
    cmd_gen->add_option("--fleets-per-class", gen.fleets_per_class, "sampled fleets per class")
        ->check(CLI::PositiveNumber);
    cmd_gen->add_option("--max-vm", gen.max_vm, "grid bound on VMs")->check(CLI::NonNegativeNumber);
    cmd_gen->add_option("--max-sl", gen.max_sl, "grid bound on serverless instances")
        ->check(CLI::NonNegativeNumber);
    cmd_gen->add_option("--service", gen.service_s, "per-task service time, seconds");
    cmd_gen->add_option("--seed", gen.seed, "RNG seed");
    cmd_gen->add_option("--signatures", gen.signatures,
                        "also write the classes' structural signatures to this file");

    // ---- train --------------------------------------------------------
    struct {
        std::string history, model_dir, signatures;
        int augment_factor = 10;
        double jitter = 0.05;
        double split = 0.8;
        int trees = 100, max_depth = 12, min_leaf = 2;
        unsigned seed = 42;
        bool no_bootstrap = false;
    } tr;
    auto* cmd_train = app.add_subcommand("train", "Fit the completion-time model and publish it");
    cmd_train->add_option("--history", tr.history, "history JSON-lines file")->required();
    cmd_train->add_option("--model-dir", tr.model_dir, "model store directory")->required();
    cmd_train->add_option("--signatures", tr.signatures, "structural signature registry to embed");
    cmd_train->add_option("--augment-factor", tr.augment_factor, "augmentation multiplier")
        ->check(CLI::PositiveNumber);
    cmd_train->add_option("--jitter", tr.jitter, "augmentation jitter fraction");
    cmd_train->add_option("--split", tr.split, "train fraction of the 80:20-style split");
    cmd_train->add_option("--trees", tr.trees, "ensemble size")->check(CLI::PositiveNumber);
    cmd_train->add_option("--max-depth", tr.max_depth, "tree depth limit");
    cmd_train->add_option("--min-leaf", tr.min_leaf, "minimum rows per leaf");
    cmd_train->add_option("--seed", tr.seed, "RNG seed");
    cmd_train->add_flag("--no-bootstrap", tr.no_bootstrap, "fit every tree on the full data");

    // ---- plan ---------------------------------------------------------
    struct {
        std::string model_dir, history, profile, config;
        std::string query_id, query_text;
        double n_map_tasks = 0, input_size = 0, epsilon = 0;
        unsigned seed = 42;
        bool relay_on = false, relay_off = false;
        bool execute = false;
        int tasks = 0;
        double service_s = 2.0;
    } pl;
    auto* cmd_plan = app.add_subcommand("plan", "Plan the fleet for one query");
    cmd_plan->add_option("--model-dir", pl.model_dir, "model store directory")->required();
    cmd_plan->add_option("--history", pl.history, "history JSON-lines file")->required();
    cmd_plan->add_option("--profile", pl.profile, "provider profile file");
    cmd_plan->add_option("--config", pl.config, "engine config properties file");
    cmd_plan->add_option("--query-id", pl.query_id, "known query id");
    cmd_plan->add_option("--query-text", pl.query_text, "raw SQL of a new query");
    cmd_plan->add_option("--n-map-tasks", pl.n_map_tasks, "map task count (new queries)");
    cmd_plan->add_option("--input-size", pl.input_size, "input size override, bytes");
    auto* eps_opt = cmd_plan->add_option("--epsilon", pl.epsilon, "cost/performance knob override");
    cmd_plan->add_flag("--relay", pl.relay_on, "assume relay handoff in cost estimates");
    cmd_plan->add_flag("--no-relay", pl.relay_off, "assume no relay handoff in cost estimates");
    cmd_plan->add_option("--seed", pl.seed, "search seed");
    cmd_plan->add_flag("--execute", pl.execute, "run the plan on the simulator and record it");
    cmd_plan->add_option("--tasks", pl.tasks, "task count for --execute");
    cmd_plan->add_option("--service", pl.service_s, "per-task service time for --execute");

    // ---- simulate -----------------------------------------------------
    struct {
        std::string profile;
        int tasks = 0, n_vm = 0, n_sl = 0, slots = 1;
        double service_s = 2.0, segue_timeout = 90.0;
        std::string policy = "relay";
    } sim;
    auto* cmd_sim = app.add_subcommand("simulate", "Run one query on the execution simulator");
    cmd_sim->add_option("--tasks", sim.tasks, "task count")->required();
    cmd_sim->add_option("--service", sim.service_s, "per-task service time, seconds");
    cmd_sim->add_option("--slots", sim.slots, "task slots per instance");
    cmd_sim->add_option("--n-vm", sim.n_vm, "VM count")->required();
    cmd_sim->add_option("--n-sl", sim.n_sl, "serverless count")->required();
    cmd_sim->add_option("--policy", sim.policy, "sl_only|vm_only|keep|relay|segue");
    cmd_sim->add_option("--segue-timeout", sim.segue_timeout, "segue stop time, seconds");
    cmd_sim->add_option("--profile", sim.profile, "provider profile file");

    // ---- sweep --------------------------------------------------------
    struct {
        std::string profile, out;
        int tasks = 0, max_vm = 5, max_sl = 5, slots = 1;
        double service_s = 2.0, segue_timeout = 90.0;
        std::string policy = "relay";
    } sw;
    auto* cmd_sweep = app.add_subcommand("sweep", "Simulate every fleet in a grid, emit CSV");
    cmd_sweep->add_option("--tasks", sw.tasks, "task count")->required();
    cmd_sweep->add_option("--service", sw.service_s, "per-task service time, seconds");
    cmd_sweep->add_option("--slots", sw.slots, "task slots per instance");
    cmd_sweep->add_option("--policy", sw.policy, "sl_only|vm_only|keep|relay|segue");
    cmd_sweep->add_option("--segue-timeout", sw.segue_timeout, "segue stop time, seconds");
    cmd_sweep->add_option("--max-vm", sw.max_vm, "grid bound on VMs");
    cmd_sweep->add_option("--max-sl", sw.max_sl, "grid bound on serverless instances");
    cmd_sweep->add_option("--profile", sw.profile, "provider profile file");
    cmd_sweep->add_option("--out", sw.out, "CSV file (default: stdout)");

    // ---- compare ------------------------------------------------------
    struct {
        std::string model_dir, history, profile, query_id;
        int tasks = 0;
        double service_s = 2.0;
        unsigned seed = 42;
        int budget = 0;
        double pred_latency = 0.75, search_overhead = 0.05, pred_price = 0.005;
    } cp;
    auto* cmd_cmp = app.add_subcommand("compare", "Score three planning strategies by PC_r");
    cmd_cmp->add_option("--model-dir", cp.model_dir, "model store directory")->required();
    cmd_cmp->add_option("--history", cp.history, "history JSON-lines file")->required();
    cmd_cmp->add_option("--query-id", cp.query_id, "known query id")->required();
    cmd_cmp->add_option("--tasks", cp.tasks, "task count for simulator probes")->required();
    cmd_cmp->add_option("--service", cp.service_s, "per-task service time, seconds");
    cmd_cmp->add_option("--profile", cp.profile, "provider profile file");
    cmd_cmp->add_option("--seed", cp.seed, "search seed");
    cmd_cmp->add_option("--budget", cp.budget, "evaluation budget (0 = grid size)");
    cmd_cmp->add_option("--prediction-latency", cp.pred_latency, "seconds per model call");
    cmd_cmp->add_option("--search-overhead", cp.search_overhead, "seconds per search step");
    cmd_cmp->add_option("--prediction-price", cp.pred_price, "dollars per model call");

    // ---- serve --------------------------------------------------------
    struct {
        std::string model_dir, history, profile, config;
        int port = 0;
        unsigned seed = 42;
    } sv;
    auto* cmd_serve = app.add_subcommand("serve", "Run the TCP planning endpoint");
    cmd_serve->add_option("--model-dir", sv.model_dir, "model store directory")->required();
    cmd_serve->add_option("--history", sv.history, "history JSON-lines file")->required();
    cmd_serve->add_option("--profile", sv.profile, "provider profile file");
    cmd_serve->add_option("--config", sv.config, "engine config properties file");
    cmd_serve->add_option("--port", sv.port, "TCP port (0 = ephemeral)");
    cmd_serve->add_option("--seed", sv.seed, "search seed");

    // ---- retrain-worker (internal) -------------------------------------
    struct {
        std::string model_dir, history, query_id;
        double predicted = 0, actual = 0, trigger = 0;
        int max_batch = 100, trees = 100, max_depth = 12, min_leaf = 2;
        unsigned seed = 42;
    } rw;
    auto* cmd_rw = app.add_subcommand("retrain-worker",
                                      "Internal: run one model refresh pass and exit");
    cmd_rw->add_option("--model-dir", rw.model_dir)->required();
    cmd_rw->add_option("--history", rw.history)->required();
    cmd_rw->add_option("--query-id", rw.query_id)->required();
    cmd_rw->add_option("--predicted", rw.predicted)->required();
    cmd_rw->add_option("--actual", rw.actual)->required();
    cmd_rw->add_option("--trigger", rw.trigger)->required();
    cmd_rw->add_option("--max-batch", rw.max_batch);
    cmd_rw->add_option("--trees", rw.trees);
    cmd_rw->add_option("--max-depth", rw.max_depth);
    cmd_rw->add_option("--min-leaf", rw.min_leaf);
    cmd_rw->add_option("--seed", rw.seed);

    CLI11_PARSE(app, argc, argv);

    if (cmd_gen->parsed()) {
        const ProviderProfile profile = profile_or_default(gen.profile);
        const auto classes = parse_classes(gen.classes);

        std::vector<FleetConfig> grid;
        for (int v = 0; v <= gen.max_vm; ++v)
            for (int s = 0; s <= gen.max_sl; ++s)
                if (v != 0 || s != 0) grid.push_back({v, s});
        if (grid.empty()) throw DomainError("fleet grid is empty");

        { std::ofstream truncate(gen.out, std::ios::trunc); }
        HistoryStore store(gen.out);
        std::mt19937 rng(gen.seed);
        std::uniform_real_distribution<double> mem_frac(0.5, 1.0);
        std::uniform_int_distribution<int> waiting(0, 5);
        const Policy policy{PolicyKind::HYBRID_RELAY, 0.0};
        constexpr double kBaseEpoch = 1.7e9;
        constexpr double kBytesPerTask = 128.0 * 1024 * 1024;

        std::size_t written = 0;
        for (const auto& qc : classes) {
            std::vector<FleetConfig> fleets;
            while (static_cast<int>(fleets.size()) < gen.fleets_per_class) {
                std::vector<FleetConfig> pool = grid;
                std::shuffle(pool.begin(), pool.end(), rng);
                for (const auto& f : pool) {
                    if (static_cast<int>(fleets.size()) >= gen.fleets_per_class) break;
                    fleets.push_back(f);
                }
            }
            for (const auto& f : fleets) {
                const QuerySpec spec{qc.n_tasks, gen.service_s, 1};
                const SimOutcome run = simulate(spec, f, policy, profile);
                WorkloadSample s;
                s.features.n_vm = f.n_vm;
                s.features.n_sl = f.n_sl;
                s.features.input_size_bytes = qc.n_tasks * kBytesPerTask;
                s.features.start_time_epoch = kBaseEpoch + 60.0 * static_cast<double>(written);
                s.features.total_memory_mb =
                    8192.0 * f.n_vm + 1024.0 * profile.sl_memory_gb * f.n_sl;
                s.features.available_memory_mb = s.features.total_memory_mb * mem_frac(rng);
                s.features.memory_per_executor_mb = 2048.0;
                s.features.num_waiting_apps = waiting(rng);
                s.features.total_available_cores =
                    profile.vcpus_per_instance * f.n_vm + f.n_sl;
                s.features.query_id = qc.id;
                s.query_duration_s = run.completion_s;
                store.append(s);
                ++written;
            }
        }
        std::cout << "wrote " << written << " samples to " << gen.out << "\n";

        if (!gen.signatures.empty()) {
            SignatureRegistry reg;
            for (std::size_t i = 0; i < classes.size(); ++i) {
                reg[classes[i].id] =
                    extract_signature(canned_sql(i), static_cast<double>(classes[i].n_tasks));
            }
            write_registry(reg, gen.signatures);
            std::cout << "wrote " << reg.size() << " signatures to " << gen.signatures << "\n";
        }
        return 0;
    }

    if (cmd_train->parsed()) {
        HistoryStore store(tr.history);
        const TraceDataset data = store.read_all();
        if (data.samples.empty()) throw StateError("history " + tr.history + " is empty");

        const auto augmented = augment(data.samples, tr.augment_factor, tr.jitter, tr.seed);
        RfHyper hyper;
        hyper.n_trees = tr.trees;
        hyper.max_depth = tr.max_depth;
        hyper.min_leaf = tr.min_leaf;
        hyper.seed = tr.seed;
        hyper.bootstrap = !tr.no_bootstrap;
        TrainResult result = train(augmented, hyper, tr.split);

        if (!tr.signatures.empty()) result.model.merge_registry(read_registry(tr.signatures));

        ModelStore models(tr.model_dir);
        models.publish(result.model);

        std::printf("samples: %zu (augmented from %zu)\n", augmented.size(), data.samples.size());
        std::printf("split: %zu train / %zu test\n", result.report.n_train, result.report.n_test);
        std::printf("test rmse: %.4f s\n", result.report.test.rmse_s);
        std::printf("test mean abs error: %.4f s\n", result.report.test.mean_abs_error_s);
        std::printf("within-%.0fs accuracy: %.4f\n", result.report.test.window_s,
                    result.report.test.within_window_accuracy);
        std::printf("published model version %d to %s\n", result.model.version(),
                    tr.model_dir.c_str());
        return 0;
    }

    if (cmd_plan->parsed()) {
        Planner::Setup setup;
        setup.model_dir = pl.model_dir;
        setup.history_path = pl.history;
        setup.config = config_or_default(pl.config);
        setup.profile = profile_or_default(pl.profile);
        setup.worker_exe = self_exe();
        setup.seed = pl.seed;
        Planner planner(setup);

        PlanRequest req;
        req.query_id = pl.query_id;
        req.query_text = pl.query_text;
        req.n_map_tasks = pl.n_map_tasks;
        req.input_size_bytes = pl.input_size;
        if (eps_opt->count() > 0) req.epsilon = pl.epsilon;
        if (pl.relay_on && pl.relay_off) throw ValidationError("--relay contradicts --no-relay");
        if (pl.relay_on) req.relay = true;
        if (pl.relay_off) req.relay = false;

        const PlanResponse resp = planner.plan(req);
        std::printf("matched_query_id: %s (similarity %.6f)\n", resp.matched_query_id.c_str(),
                    resp.similarity_score);
        std::printf("fleet: {n_vm=%d, n_sl=%d}\n", resp.fleet.n_vm, resp.fleet.n_sl);
        std::printf("T_est: %.4f s (T_best: %.4f s)\n", resp.predicted_time_s, resp.t_best_s);
        std::printf("est_cost: %s (C_best: %s)\n", resp.estimated_cost.str().c_str(),
                    resp.c_best.str().c_str());
        std::printf("search_evaluations: %d (%s)\n", resp.search_evaluations,
                    resp.terminated_by.c_str());
        std::printf("model_version: %d\n", resp.model_version);

        if (pl.execute) {
            if (pl.tasks < 1) throw ValidationError("--execute needs --tasks >= 1");
            const QuerySpec spec{pl.tasks, pl.service_s, 1};
            const SimOutcome run = planner.execute_and_record(resp, spec);
            std::printf("executed: completion %.4f s, cost %s\n", run.completion_s,
                        run.cost.total.str().c_str());
            const double err = std::abs(run.completion_s - resp.predicted_time_s);
            std::printf("prediction abs error: %.4f s (trigger %.1f s)\n", err,
                        setup.config.train_error_difference_trigger_s);
            planner.coordinator().wait_idle();
        }
        return 0;
    }

    if (cmd_sim->parsed()) {
        const ProviderProfile profile = profile_or_default(sim.profile);
        Policy policy{policy_from_name(sim.policy), 0.0};
        if (policy.kind == PolicyKind::SEGUE_STATIC) policy.segue_timeout_s = sim.segue_timeout;
        const QuerySpec spec{sim.tasks, sim.service_s, sim.slots};
        const SimOutcome run = simulate(spec, {sim.n_vm, sim.n_sl}, policy, profile);
        std::printf("completion_s: %.6f\n", run.completion_s);
        std::printf("tasks_on_vm: %lld\ntasks_on_sl: %lld\n",
                    static_cast<long long>(run.tasks_on_vm),
                    static_cast<long long>(run.tasks_on_sl));
        std::printf("sl_busy_seconds: %.6f\nvm_billed_seconds: %.6f\n", run.sl_busy_seconds,
                    run.vm_billed_seconds);
        std::printf("vm_compute: %s\nvm_storage: %s\nvm_burstable: %s\n",
                    run.cost.vm_compute.str().c_str(), run.cost.vm_storage.str().c_str(),
                    run.cost.vm_burstable.str().c_str());
        std::printf("sl_compute: %s\nexternal_store: %s\n", run.cost.sl_compute.str().c_str(),
                    run.cost.external_store.str().c_str());
        std::printf("total: %s\n", run.cost.total.str().c_str());
        return 0;
    }

    if (cmd_sweep->parsed()) {
        const ProviderProfile profile = profile_or_default(sw.profile);
        Policy policy{policy_from_name(sw.policy), 0.0};
        if (policy.kind == PolicyKind::SEGUE_STATIC) policy.segue_timeout_s = sw.segue_timeout;
        const QuerySpec spec{sw.tasks, sw.service_s, sw.slots};
        const auto rows = sweep(spec, policy, profile, sw.max_vm, sw.max_sl);
        const std::string csv = sweep_to_csv(rows);
        if (sw.out.empty()) {
            std::cout << csv;
        } else {
            std::ofstream out(sw.out, std::ios::trunc);
            if (!out) throw IoError("cannot write " + sw.out);
            out << csv;
            std::cout << "wrote " << rows.size() << " rows to " << sw.out << "\n";
        }
        return 0;
    }

    if (cmd_cmp->parsed()) {
        const ProviderProfile profile = profile_or_default(cp.profile);
        ModelStore models(cp.model_dir);
        const PredictionModel model = models.load_current();
        HistoryStore store(cp.history);
        const auto recent = store.latest_features_for(cp.query_id, 1);
        if (recent.empty())
            throw StateError("no recorded runs of query '" + cp.query_id + "' in history");
        QueryFeatures base = recent.front().features;

        SearchOptions opts;
        opts.seed = cp.seed;
        opts.budget = cp.budget;
        ComparePricing pricing;
        pricing.prediction_latency_s = cp.pred_latency;
        pricing.search_overhead_s = cp.search_overhead;
        pricing.prediction_price_dollars = cp.pred_price;
        const QuerySpec spec{cp.tasks, cp.service_s, 1};
        const CompareReport report = compare_strategies(model, base, spec, profile, opts, pricing);

        std::printf("%-26s %-9s %-12s %-6s %-14s %-14s %s\n", "strategy", "fleet", "est_time_s",
                    "evals", "plan_time_s", "plan_cost", "PC_r");
        for (const StrategyOutcome* o :
             {&report.predictor_guided, &report.predictor_exhaustive, &report.simulator_guided}) {
            char fleet[32];
            std::snprintf(fleet, sizeof(fleet), "{%d,%d}", o->chosen.n_vm, o->chosen.n_sl);
            std::printf("%-26s %-9s %-12.4f %-6d %-14.4f %-14s %.6f\n", o->strategy.c_str(), fleet,
                        o->chosen_time_s, o->n_evaluations, o->planning_time_s,
                        o->planning_cost.str().c_str(), o->score);
        }
        return 0;
    }

    if (cmd_serve->parsed()) {
        Planner::Setup setup;
        setup.model_dir = sv.model_dir;
        setup.history_path = sv.history;
        setup.config = config_or_default(sv.config);
        setup.profile = profile_or_default(sv.profile);
        setup.worker_exe = self_exe();
        setup.seed = sv.seed;
        Planner planner(setup);

        PlanService service(planner, sv.port);
        service.start();
        std::printf("listening on 127.0.0.1:%d\n", service.port());
        std::fflush(stdout);

        static std::atomic<bool> stop_requested{false};
        static const auto on_signal = [](int) { stop_requested.store(true); };
        std::signal(SIGINT, +on_signal);
        std::signal(SIGTERM, +on_signal);
        while (!stop_requested.load()) {
            std::this_thread::sleep_for(std::chrono::milliseconds(100));
        }
        service.stop();
        planner.coordinator().wait_idle();
        std::printf("stopped\n");
        return 0;
    }

    if (cmd_rw->parsed()) {
        ModelStore models(rw.model_dir);
        HistoryStore store(rw.history);
        DriftEvent event = check_trigger(rw.predicted, rw.actual, rw.trigger);
        event.query_id = rw.query_id;
        EngineConfig cfg;
        cfg.train_max_batch = rw.max_batch;
        RfHyper hyper;
        hyper.n_trees = rw.trees;
        hyper.max_depth = rw.max_depth;
        hyper.min_leaf = rw.min_leaf;
        hyper.seed = rw.seed;
        const RetrainOutcome out = run_retrain(models, store, event, cfg, hyper);
        std::printf("published model version %d (+%d trees, %zu samples)\n", out.new_version,
                    out.added_trees, out.n_train_samples);
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
