#include "smartpick/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "smartpick/errors.hpp"

namespace smartpick {

namespace {

void validate_options(const SearchOptions& opts) {
    if (opts.budget < 0) throw DomainError("search budget must be >= 0");
    if (!(opts.noise_std >= 0)) throw DomainError("noise_std must be >= 0");
    if (!(opts.xi_frac >= 0)) throw DomainError("xi_frac must be >= 0");
    if (opts.init_design < 1) throw DomainError("init_design must be >= 1");
    if (!(opts.stagnation_rel >= 0)) throw DomainError("stagnation_rel must be >= 0");
    if (opts.stagnation_runs < 1) throw DomainError("stagnation_runs must be >= 1");
}

// Deterministic zero-mean perturbation for a fleet under a fixed seed. The
// same (seed, fleet) pair always yields the same draw, so repeated searches
// are reproducible.
double noise_for(const FleetConfig& fleet, unsigned seed, double noise_std) {
    if (noise_std <= 0) return 0.0;
    std::seed_seq ss{seed, static_cast<unsigned>(fleet.n_vm) + 0x9e3779b9u,
                     static_cast<unsigned>(fleet.n_sl) + 0x85ebca6bu};
    std::mt19937 rng(ss);
    std::normal_distribution<double> draw(0.0, noise_std);
    return draw(rng);
}

struct EvalFns {
    std::function<double(const FleetConfig&)> time_of;
    std::function<Money(const FleetConfig&, double)> cost_of;
};

SearchResult search_core(const EvalFns& fns, int max_vm, int max_sl, const SearchOptions& opts) {
    validate_options(opts);
    if (max_vm < 0 || max_sl < 0) throw DomainError("fleet bounds must be >= 0");

    std::vector<FleetConfig> grid;
    grid.reserve(static_cast<size_t>(max_vm + 1) * static_cast<size_t>(max_sl + 1));
    for (int v = 0; v <= max_vm; ++v) {
        for (int s = 0; s <= max_sl; ++s) {
            if (v == 0 && s == 0) continue;
            grid.push_back({v, s});
        }
    }
    if (grid.empty()) throw DomainError("fleet grid is empty");

    const int budget = opts.budget == 0 ? static_cast<int>(grid.size())
                                        : std::min<int>(opts.budget, static_cast<int>(grid.size()));
    const int init_target = std::min(opts.init_design, static_cast<int>(grid.size()));
    if (budget < init_target)
        throw DomainError("evaluation budget " + std::to_string(budget) +
                          " is below the initial design size " + std::to_string(init_target));

    SearchResult result;
    std::vector<char> visited_mask(grid.size(), 0);
    auto grid_index = [&](const FleetConfig& f) {
        // Row-major over (n_vm, n_sl) with {0,0} removed.
        size_t flat = static_cast<size_t>(f.n_vm) * static_cast<size_t>(max_sl + 1) +
                      static_cast<size_t>(f.n_sl);
        return flat - 1; // every valid fleet follows the excluded origin
    };

    auto evaluate = [&](const FleetConfig& fleet) -> const Candidate& {
        Candidate c;
        c.fleet = fleet;
        c.est_time_s = fns.time_of(fleet);
        c.est_cost = fns.cost_of(fleet, c.est_time_s);
        c.objective = -(c.est_time_s + noise_for(fleet, opts.seed, opts.noise_std));
        visited_mask[grid_index(fleet)] = 1;
        result.visited.push_back(c);
        ++result.n_evaluations;
        return result.visited.back();
    };

    // Initial design: distinct fleets, always containing the all-serverless
    // and all-VM extremes, padded with a seeded sample of the rest.
    std::vector<FleetConfig> init;
    auto add_init = [&](const FleetConfig& f) {
        if (f.n_vm == 0 && f.n_sl == 0) return;
        if (std::find(init.begin(), init.end(), f) == init.end()) init.push_back(f);
    };
    add_init({0, max_sl});
    add_init({max_vm, 0});
    if (static_cast<int>(init.size()) > init_target) init.resize(static_cast<size_t>(init_target));
    std::mt19937 rng(opts.seed);
    std::vector<FleetConfig> pool = grid;
    std::shuffle(pool.begin(), pool.end(), rng);
    for (const auto& f : pool) {
        if (static_cast<int>(init.size()) >= init_target) break;
        add_init(f);
    }
    for (const auto& f : init) evaluate(f);

    double best_obj = result.visited.front().objective;
    for (const auto& c : result.visited) best_obj = std::max(best_obj, c.objective);

    result.terminated_by = TerminationReason::BUDGET;
    int stagnant = 0;
    while (result.n_evaluations < budget) {
        // Fit the surrogate to everything seen so far.
        GpSurrogate gp;
        for (const auto& c : result.visited) {
            gp.add({static_cast<double>(c.fleet.n_vm), static_cast<double>(c.fleet.n_sl)},
                   c.objective);
        }
        gp.fit();

        const double xi = opts.xi_frac * std::abs(best_obj);
        double best_pi = -1.0;
        size_t best_idx = grid.size();
        for (size_t i = 0; i < grid.size(); ++i) {
            if (visited_mask[i]) continue;
            const auto post = gp.posterior(
                {static_cast<double>(grid[i].n_vm), static_cast<double>(grid[i].n_sl)});
            const double pi =
                probability_of_improvement(post.mean, std::sqrt(post.variance), best_obj, xi);
            if (pi > best_pi) {
                best_pi = pi;
                best_idx = i;
            }
        }
        if (best_idx == grid.size()) break; // nothing left to probe

        const Candidate& c = evaluate(grid[best_idx]);
        const double improvement = c.objective - best_obj;
        const double rel = improvement / std::max(std::abs(best_obj), 1e-12);
        if (rel < opts.stagnation_rel) {
            if (++stagnant >= opts.stagnation_runs) {
                result.terminated_by = TerminationReason::STAGNATION;
                best_obj = std::max(best_obj, c.objective);
                break;
            }
        } else {
            stagnant = 0;
        }
        best_obj = std::max(best_obj, c.objective);
    }

    const Candidate* best = &result.visited.front();
    for (const auto& c : result.visited) {
        if (c.est_time_s < best->est_time_s) best = &c;
    }
    result.best = *best;
    return result;
}

} // namespace

Money estimate_cost(const FleetConfig& fleet, double est_time_s, const ProviderProfile& profile,
                    bool relay) {
    profile.validate();
    if (fleet.n_vm < 0 || fleet.n_sl < 0) throw DomainError("fleet counts must be >= 0");
    if (!(est_time_s >= 0)) throw DomainError("estimate_cost requires est_time_s >= 0");
    const double t = est_time_s;
    const double hours = t / 3600.0;

    Money total;
    total += Money::from_dollars(fleet.n_vm * profile.vm_hourly_price * hours);
    total += Money::from_dollars(fleet.n_vm * profile.vm_storage_hourly_price * hours);
    total += Money::from_dollars(fleet.n_vm * profile.burstable_price_per_vcpu_hour *
                                 profile.vcpus_per_instance * hours);

    // With relay on, serverless instances hand their work to VMs once those
    // are warm, so each is billed only up to the cold-boot point.
    const double t_sl = relay ? std::min(t, profile.vm_cold_boot_s) : t;
    total += Money::from_dollars(fleet.n_sl * t_sl * profile.sl_price_per_gb_second *
                                 profile.sl_memory_gb);

    if (fleet.n_sl >= 1) {
        total += Money::from_dollars(profile.external_store_hourly_price * hours);
    }
    return total;
}

double objective(const PredictionModel& model, const QueryFeatures& base, const FleetConfig& fleet,
                 double noise_std, unsigned seed) {
    if (!(noise_std >= 0)) throw DomainError("objective requires noise_std >= 0");
    const double t = model.predict(base.with_fleet(fleet));
    return -(t + noise_for(fleet, seed, noise_std));
}

SearchResult search(const PredictionModel& model, const QueryFeatures& base,
                    const ProviderProfile& profile, const SearchOptions& opts) {
    EvalFns fns;
    fns.time_of = [&](const FleetConfig& f) { return model.predict(base.with_fleet(f)); };
    fns.cost_of = [&](const FleetConfig& f, double t) {
        return estimate_cost(f, t, profile, opts.relay);
    };
    return search_core(fns, profile.max_vm, profile.max_sl, opts);
}

SearchResult search_with(const std::function<double(const FleetConfig&)>& time_of,
                         const std::function<Money(const FleetConfig&, double)>& cost_of,
                         int max_vm, int max_sl, const SearchOptions& opts) {
    if (!time_of || !cost_of) throw DomainError("search_with requires both evaluators");
    EvalFns fns{time_of, cost_of};
    return search_core(fns, max_vm, max_sl, opts);
}

Candidate select_with_knob(const SearchResult& result, double epsilon) {
    if (epsilon < 0) throw DomainError("knob epsilon must be >= 0");
    if (result.visited.empty()) throw StateError("knob selection needs a non-empty search result");
    if (epsilon == 0.0) return result.best;

    const Money cost_cap = result.best.est_cost;
    const double time_cap = (1.0 + epsilon) * result.best.est_time_s;
    const Candidate* pick = nullptr;
    for (const auto& c : result.visited) {
        if (c.est_cost > cost_cap) continue;
        if (c.est_time_s > time_cap) continue;
        if (pick == nullptr || c.est_time_s > pick->est_time_s ||
            (c.est_time_s == pick->est_time_s && c.est_cost < pick->est_cost)) {
            pick = &c;
        }
    }
    return pick ? *pick : result.best;
}

double pc_ratio(double time_s, Money cost) {
    if (!(time_s > 0)) throw DomainError("pc_ratio requires a positive time");
    if (cost.micros() < 0) throw DomainError("pc_ratio requires a non-negative cost");
    return 100.0 * (1.0 / time_s) / (1.0 + cost.dollars());
}

} // namespace smartpick
