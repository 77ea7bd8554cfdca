#include "smartpick/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <sstream>

namespace smartpick {

void QuerySpec::validate() const {
    if (n_tasks < 0) throw ValidationError("query: n_tasks must be >= 0");
    if (!(std::isfinite(task_service_s) && task_service_s > 0))
        throw ValidationError("query: task_service_s must be > 0");
    if (slots_per_instance < 1) throw ValidationError("query: slots_per_instance must be >= 1");
}

const char* policy_name(PolicyKind k) {
    switch (k) {
        case PolicyKind::SL_ONLY: return "SL_ONLY";
        case PolicyKind::VM_ONLY: return "VM_ONLY";
        case PolicyKind::HYBRID_KEEP: return "HYBRID_KEEP";
        case PolicyKind::HYBRID_RELAY: return "HYBRID_RELAY";
        case PolicyKind::SEGUE_STATIC: return "SEGUE_STATIC";
    }
    return "?";
}

PolicyKind policy_from_name(const std::string& name) {
    if (name == "SL_ONLY" || name == "sl-only") return PolicyKind::SL_ONLY;
    if (name == "VM_ONLY" || name == "vm-only") return PolicyKind::VM_ONLY;
    if (name == "HYBRID_KEEP" || name == "keep") return PolicyKind::HYBRID_KEEP;
    if (name == "HYBRID_RELAY" || name == "relay") return PolicyKind::HYBRID_RELAY;
    if (name == "SEGUE_STATIC" || name == "segue") return PolicyKind::SEGUE_STATIC;
    throw ParseError("unknown policy '" + name + "'");
}

std::int64_t billed_ms_per_task(double service_s, std::int64_t granularity_ms) {
    double ms = service_s * 1000.0;
    auto units = static_cast<std::int64_t>(std::ceil(ms / static_cast<double>(granularity_ms) - 1e-9));
    if (units < 1) units = 1;
    return units * granularity_ms;
}

namespace {

constexpr double kNever = std::numeric_limits<double>::infinity();

struct Instance {
    InstanceKind kind;
    int id; // per-kind index
    double ready;
    double drain = kNever; // SL stops accepting tasks at/after this time
    int tasks = 0;
    double last_finish = 0;
    std::optional<int> peer_vm;
};

struct SlotEvent {
    double time;
    InstanceKind kind;
    int inst; // index into the instances array
};

// Earliest time first; at equal times VM slots before SL slots, then lower
// instance index (VM and SL index ranges are disjoint in the array).
struct EventAfter {
    bool operator()(const SlotEvent& a, const SlotEvent& b) const {
        if (a.time != b.time) return a.time > b.time;
        if (a.kind != b.kind) return a.kind == InstanceKind::SL;
        return a.inst > b.inst;
    }
};

std::string vm_name(int i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "INST-%04d", i + 1);
    return buf;
}

std::string sl_name(int i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "REQ-%04d", i + 1);
    return buf;
}

void check_policy_fleet(const FleetConfig& fleet, const Policy& policy) {
    std::ostringstream os;
    switch (policy.kind) {
        case PolicyKind::SL_ONLY:
            if (fleet.n_vm != 0) throw ValidationError("SL_ONLY requires n_vm == 0");
            break;
        case PolicyKind::VM_ONLY:
            if (fleet.n_sl != 0) throw ValidationError("VM_ONLY requires n_sl == 0");
            break;
        case PolicyKind::SEGUE_STATIC:
            if (fleet.n_sl != fleet.n_vm || fleet.n_sl < 1)
                throw ValidationError("SEGUE_STATIC requires n_sl == n_vm >= 1");
            if (!(std::isfinite(policy.segue_timeout_s) && policy.segue_timeout_s > 0))
                throw ValidationError("SEGUE_STATIC requires segue_timeout_s > 0");
            break;
        default:
            break;
    }
    if (fleet.n_vm < 0 || fleet.n_sl < 0) {
        os << "fleet {" << fleet.n_vm << "," << fleet.n_sl << "}: counts must be >= 0";
        throw ValidationError(os.str());
    }
}

CostBreakdown zero_cost() { return CostBreakdown::sum(Money{}, Money{}, Money{}, Money{}, Money{}); }

} // namespace

SimOutcome simulate(const QuerySpec& query, const FleetConfig& fleet, const Policy& policy,
                    const ProviderProfile& profile) {
    query.validate();
    profile.validate();
    // {0,0} stays legal here so a zero-task query can run on an empty fleet;
    // anything negative or beyond the profile bounds is rejected.
    if (fleet.n_vm < 0 || fleet.n_sl < 0 || fleet.n_vm > profile.max_vm ||
        fleet.n_sl > profile.max_sl)
        validate_fleet(fleet, profile);
    check_policy_fleet(fleet, policy);

    SimOutcome out;
    out.cost = zero_cost();
    if (query.n_tasks == 0) return out; // nothing runs, nothing is billed

    if (fleet.total() == 0)
        throw ValidationError("fleet {0,0} cannot run a non-empty query");

    // --- build instances; VMs occupy indices [0, n_vm) so the event
    // comparator's index order matches the VM-first tie-break.
    std::vector<Instance> inst;
    inst.reserve(static_cast<std::size_t>(fleet.total()));
    for (int i = 0; i < fleet.n_vm; ++i)
        inst.push_back({InstanceKind::VM, i, profile.vm_cold_boot_s, kNever, 0, 0, {}});
    for (int i = 0; i < fleet.n_sl; ++i)
        inst.push_back({InstanceKind::SL, i, profile.sl_boot_s, kNever, 0, 0, {}});

    const int pairs = std::min(fleet.n_vm, fleet.n_sl);
    if (policy.kind == PolicyKind::HYBRID_RELAY) {
        for (int i = 0; i < pairs; ++i) {
            Instance& sl = inst[static_cast<std::size_t>(fleet.n_vm + i)];
            sl.drain = profile.vm_cold_boot_s; // its peer VM's ready time
            sl.peer_vm = i;
        }
    } else if (policy.kind == PolicyKind::SEGUE_STATIC) {
        for (int i = 0; i < fleet.n_sl; ++i)
            inst[static_cast<std::size_t>(fleet.n_vm + i)].drain = policy.segue_timeout_s;
    }

    const double vm_service = query.task_service_s;
    const double sl_service = query.task_service_s * profile.sl_overhead_factor;

    std::priority_queue<SlotEvent, std::vector<SlotEvent>, EventAfter> events;
    for (std::size_t i = 0; i < inst.size(); ++i)
        for (int s = 0; s < query.slots_per_instance; ++s)
            events.push({inst[i].ready, inst[i].kind, static_cast<int>(i)});

    int remaining = query.n_tasks;
    double completion = 0;

    while (!events.empty()) {
        SlotEvent e = events.top();
        events.pop();
        Instance& in = inst[static_cast<std::size_t>(e.inst)];
        if (in.kind == InstanceKind::SL && e.time >= in.drain) continue; // slot closed
        if (remaining == 0) continue;                                    // slot idles out
        --remaining;
        const double service = in.kind == InstanceKind::VM ? vm_service : sl_service;
        const double finish = e.time + service;
        ++in.tasks;
        in.last_finish = std::max(in.last_finish, finish);
        completion = std::max(completion, finish);
        if (in.kind == InstanceKind::VM) {
            ++out.tasks_on_vm;
        } else {
            ++out.tasks_on_sl;
            out.sl_busy_seconds += service;
        }
        events.push({finish, in.kind, e.inst});
    }

    if (remaining > 0) {
        // Only reachable when every slot closed before the work ran out,
        // i.e. a segue timeout at/before all slot openings with no VMs --
        // impossible for the supported policies (segue implies VMs), but
        // guard anyway rather than report a bogus completion.
        throw StateError("scheduler stalled with tasks remaining");
    }

    out.completion_s = completion;

    // --- lifecycle records
    out.instances.reserve(inst.size());
    for (const Instance& in : inst) {
        InstanceRecord r;
        r.kind = in.kind;
        r.launch_s = 0;
        r.ready_s = in.ready;
        r.tasks_run = in.tasks;
        if (in.kind == InstanceKind::VM) {
            r.id = vm_name(in.id);
            r.terminate_s = completion; // all VMs are released when the query ends
            if (policy.kind == PolicyKind::HYBRID_RELAY && in.id < pairs)
                r.relay_peer = sl_name(in.id);
        } else {
            r.id = sl_name(in.id);
            if (in.drain == kNever) {
                r.terminate_s = completion;
            } else {
                // told to stop at drain; lives on only for in-flight work,
                // and never past the query itself
                r.terminate_s = std::min(completion, std::max(in.drain, in.last_finish));
            }
            if (policy.kind == PolicyKind::HYBRID_RELAY && in.peer_vm)
                r.relay_peer = vm_name(*in.peer_vm);
        }
        out.instances.push_back(std::move(r));
    }

    // --- billing
    out.vm_billed_seconds = static_cast<double>(fleet.n_vm) * completion;
    const double vm_hours = out.vm_billed_seconds / 3600.0;
    Money vm_compute = Money::from_dollars(profile.vm_hourly_price * vm_hours);
    Money vm_storage = Money::from_dollars(profile.vm_storage_hourly_price * vm_hours);
    Money vm_burstable = Money::from_dollars(profile.burstable_price_per_vcpu_hour *
                                             profile.vcpus_per_instance * vm_hours);

    const std::int64_t billed_ms =
        out.tasks_on_sl * billed_ms_per_task(sl_service, profile.sl_billing_granularity_ms);
    Money sl_compute = Money::from_dollars(static_cast<double>(billed_ms) / 1000.0 *
                                           profile.sl_price_per_gb_second * profile.sl_memory_gb);

    Money external = out.tasks_on_sl >= 1
                         ? Money::from_dollars(profile.external_store_hourly_price * completion / 3600.0)
                         : Money{};

    out.cost = CostBreakdown::sum(vm_compute, vm_storage, vm_burstable, sl_compute, external);
    return out;
}

std::vector<SweepRow> sweep(const QuerySpec& query, const Policy& policy,
                            const ProviderProfile& profile, int max_vm, int max_sl) {
    if (max_vm < 0 || max_sl < 0) throw ValidationError("sweep: bounds must be >= 0");
    std::vector<SweepRow> rows;
    for (int v = 0; v <= max_vm; ++v) {
        for (int s = 0; s <= max_sl; ++s) {
            if (v == 0 && s == 0) continue;
            FleetConfig f{v, s};
            rows.push_back({f, simulate(query, f, policy, profile)});
        }
    }
    return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    // vm_cost groups everything billed against VM instances (compute, storage,
    // burstable credits); sl_cost groups what running on SLs incurs (per-task
    // compute plus the external store required for SL participation), so the
    // two columns always sum to total_cost.
    std::ostringstream os;
    os << "n_vm,n_sl,completion_s,total_cost,vm_cost,sl_cost\n";
    for (const SweepRow& r : rows) {
        const CostBreakdown& c = r.outcome.cost;
        const Money vm_cost = c.vm_compute + c.vm_storage + c.vm_burstable;
        const Money sl_cost = c.sl_compute + c.external_store;
        char line[192];
        std::snprintf(line, sizeof(line), "%d,%d,%.6f,%.6f,%.6f,%.6f\n",
                      r.fleet.n_vm, r.fleet.n_sl, r.outcome.completion_s,
                      c.total.dollars(), vm_cost.dollars(), sl_cost.dollars());
        os << line;
    }
    return os.str();
}

} // namespace smartpick
