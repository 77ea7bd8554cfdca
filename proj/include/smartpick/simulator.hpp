#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "smartpick/domain.hpp"

namespace smartpick {

// The simulated unit of work: n identical tasks, each needing task_service_s
// seconds on a VM slot (times sl_overhead_factor on an SL slot).
struct QuerySpec {
    int n_tasks = 0;
    double task_service_s = 2.0;
    int slots_per_instance = 1;

    void validate() const;
};

enum class PolicyKind {
    SL_ONLY,      // requires n_vm == 0
    VM_ONLY,      // requires n_sl == 0
    HYBRID_KEEP,  // SLs serve until the query completes
    HYBRID_RELAY, // each SL paired with a VM stops taking tasks once that VM is ready
    SEGUE_STATIC, // every SL stops taking tasks at a fixed timeout; needs n_sl == n_vm >= 1
};

const char* policy_name(PolicyKind k);
PolicyKind policy_from_name(const std::string& name);

struct Policy {
    PolicyKind kind = PolicyKind::HYBRID_RELAY;
    double segue_timeout_s = 0; // used by SEGUE_STATIC only, must exceed 0 there
};

enum class InstanceKind { VM, SL };

// Lifecycle record of one instance for a simulated query. SL identifiers are
// request-style ("REQ-..."), VM identifiers instance-style ("INST-...").
// relay_peer links an SL to the VM whose readiness retires it (and back).
// terminate_s < ready_s means the instance was released before it ever
// became ready (query finished during boot).
struct InstanceRecord {
    std::string id;
    InstanceKind kind = InstanceKind::VM;
    double launch_s = 0;
    double ready_s = 0;
    double terminate_s = 0;
    int tasks_run = 0;
    std::optional<std::string> relay_peer;
};

struct SimOutcome {
    double completion_s = 0;
    CostBreakdown cost;
    std::int64_t tasks_on_sl = 0;
    std::int64_t tasks_on_vm = 0;
    double sl_busy_seconds = 0;   // actual busy time over all SL tasks
    double vm_billed_seconds = 0; // n_vm x completion (launch-to-completion proration)
    std::vector<InstanceRecord> instances;
};

// Rounds one SL task's busy time up to the billing granularity, in ms. Shared
// with tests so billing oracles use the identical rule (a 1 ns slack guards
// against float noise pushing an exact multiple over the boundary).
std::int64_t billed_ms_per_task(double service_s, std::int64_t granularity_ms);

// Event-driven, greedy, work-conserving execution of a query on a fleet.
//
// Slot availability: every instance contributes slots_per_instance slots;
// SL slots open at sl_boot_s, VM slots at vm_cold_boot_s; a slot re-opens
// when its task finishes. Free slots take the next waiting task immediately.
// Ties at the same timestamp: VM slots first, then lower instance id.
// An SL whose drain point has passed (relay peer ready or segue timeout)
// closes its slots instead of taking work; in-flight tasks always finish.
// Deterministic: identical inputs give bit-identical outcomes.
//
// n_tasks == 0 is a valid query: completion 0, zero cost, no instances used.
SimOutcome simulate(const QuerySpec& query, const FleetConfig& fleet, const Policy& policy,
                    const ProviderProfile& profile);

struct SweepRow {
    FleetConfig fleet;
    SimOutcome outcome;
};

// Simulates the query on every fleet in [0..max_vm] x [0..max_sl] minus
// {0,0}, row-major by (n_vm, n_sl).
std::vector<SweepRow> sweep(const QuerySpec& query, const Policy& policy,
                            const ProviderProfile& profile, int max_vm, int max_sl);

std::string sweep_to_csv(const std::vector<SweepRow>& rows);

} // namespace smartpick
