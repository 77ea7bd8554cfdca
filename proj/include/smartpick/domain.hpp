#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "smartpick/errors.hpp"
#include "smartpick/money.hpp"

namespace smartpick {

// A candidate deployment: how many VM instances and how many serverless
// (SL) instances serve one query.
struct FleetConfig {
    int n_vm = 0;
    int n_sl = 0;

    int total() const { return n_vm + n_sl; }
    friend bool operator==(const FleetConfig&, const FleetConfig&) = default;
    friend auto operator<=>(const FleetConfig&, const FleetConfig&) = default;
};

// Prices and execution constants for one (simulated) cloud provider. Rates
// are plain dollars per the provider's published unit (they are fractional
// constants, e.g. $1.66667e-5 per GB-second); every computed amount is
// rounded once into integer-micro Money.
struct ProviderProfile {
    std::string name = "default-sim";

    double vm_hourly_price = 0.0208;             // $/instance-hour
    double vm_storage_hourly_price = 0.0010959;  // $/instance-hour (attached volume)
    double burstable_price_per_vcpu_hour = 0.0;  // $/vCPU-hour surcharge, 0 allowed
    int vcpus_per_instance = 2;

    double sl_price_per_gb_second = 0.0000166667; // $/GB-second
    double sl_memory_gb = 2.0;
    std::int64_t sl_billing_granularity_ms = 1;   // per-task busy time rounds up to this

    double external_store_hourly_price = 0.1664;  // $/hour, charged iff any SL ran

    double vm_cold_boot_s = 55.0;
    double sl_boot_s = 0.0;
    double sl_overhead_factor = 1.30; // SL task service multiplier, >= 1

    int max_vm = 8;
    int max_sl = 8;

    void validate() const;
};

// Throws ValidationError when the fleet is negative, empty, or outside the
// profile's bounds.
void validate_fleet(const FleetConfig& fleet, const ProviderProfile& profile);

// One measurement record's feature view. All nine model columns are doubles:
// synthetic training samples scale every numeric field by an independent
// jitter factor, so instance counts are fractional here. Integer FleetConfig
// is the deployment-side type; this is the measurement-side type.
struct QueryFeatures {
    double n_vm = 0;
    double n_sl = 0;
    double input_size_bytes = 0;
    double start_time_epoch = 0;
    double total_memory_mb = 0;
    double available_memory_mb = 0;
    double memory_per_executor_mb = 0;
    double num_waiting_apps = 0;
    double total_available_cores = 0;
    std::string query_id;

    static QueryFeatures from_fleet(const FleetConfig& f) {
        QueryFeatures q;
        q.n_vm = f.n_vm;
        q.n_sl = f.n_sl;
        return q;
    }
    QueryFeatures with_fleet(const FleetConfig& f) const {
        QueryFeatures q = *this;
        q.n_vm = f.n_vm;
        q.n_sl = f.n_sl;
        return q;
    }

    void validate() const;

    friend bool operator==(const QueryFeatures&, const QueryFeatures&) = default;
};

inline constexpr int kNumFeatures = 9;
// Column order of the numeric design matrix; names mirror the history-store
// field names.
extern const std::array<const char*, kNumFeatures> kFeatureNames;

std::array<double, kNumFeatures> feature_vector(const QueryFeatures& q);

// A completed run: features plus the observed completion time (the label).
struct WorkloadSample {
    QueryFeatures features;
    double query_duration_s = 0;

    void validate() const;
    friend bool operator==(const WorkloadSample&, const WorkloadSample&) = default;
};

// Engine configuration. Field defaults match the documented property-file
// defaults; see config.hpp for the key spelling.
struct EngineConfig {
    std::string compute_provider = "aws-sim";
    std::string compute_instance_family = "t3";
    bool compute_relay = true;
    double compute_knob = 0.0; // epsilon for the cost/perf tradeoff, >= 0
    int train_max_batch = 100;
    bool train_pref_same_instance = false;
    double train_min_ram_gb = 4.0;
    double train_error_difference_trigger_s = 50.0;

    void validate() const;
    friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

// Itemized query cost. total is always the exact integer sum of the five
// components.
struct CostBreakdown {
    Money vm_compute;
    Money vm_storage;
    Money vm_burstable;
    Money sl_compute;
    Money external_store;
    Money total;

    static CostBreakdown sum(Money vm_compute, Money vm_storage, Money vm_burstable,
                             Money sl_compute, Money external_store) {
        CostBreakdown c;
        c.vm_compute = vm_compute;
        c.vm_storage = vm_storage;
        c.vm_burstable = vm_burstable;
        c.sl_compute = sl_compute;
        c.external_store = external_store;
        c.total = vm_compute + vm_storage + vm_burstable + sl_compute + external_store;
        return c;
    }
};

} // namespace smartpick
