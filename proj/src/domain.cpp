#include "smartpick/domain.hpp"

#include <cmath>
#include <sstream>

namespace smartpick {

const std::array<const char*, kNumFeatures> kFeatureNames = {
    "n_vm",
    "n_sl",
    "input_size",
    "start_time_epoch",
    "total_memory",
    "available_memory",
    "memory_per_executor",
    "num_waiting_apps",
    "total_available_cores",
};

std::array<double, kNumFeatures> feature_vector(const QueryFeatures& q) {
    return {q.n_vm,
            q.n_sl,
            q.input_size_bytes,
            q.start_time_epoch,
            q.total_memory_mb,
            q.available_memory_mb,
            q.memory_per_executor_mb,
            q.num_waiting_apps,
            q.total_available_cores};
}

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ValidationError(msg);
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

} // namespace

void ProviderProfile::validate() const {
    require(!name.empty(), "profile: name must not be empty");
    require(finite_nonneg(vm_hourly_price), "profile: vm_hourly_price must be >= 0");
    require(finite_nonneg(vm_storage_hourly_price), "profile: vm_storage_hourly_price must be >= 0");
    require(finite_nonneg(burstable_price_per_vcpu_hour),
            "profile: burstable_price_per_vcpu_hour must be >= 0");
    require(vcpus_per_instance >= 1, "profile: vcpus_per_instance must be >= 1");
    require(finite_nonneg(sl_price_per_gb_second), "profile: sl_price_per_gb_second must be >= 0");
    require(std::isfinite(sl_memory_gb) && sl_memory_gb > 0, "profile: sl_memory_gb must be > 0");
    require(sl_billing_granularity_ms >= 1, "profile: sl_billing_granularity_ms must be >= 1");
    require(finite_nonneg(external_store_hourly_price),
            "profile: external_store_hourly_price must be >= 0");
    require(finite_nonneg(vm_cold_boot_s), "profile: vm_cold_boot_s must be >= 0");
    require(finite_nonneg(sl_boot_s), "profile: sl_boot_s must be >= 0");
    require(std::isfinite(sl_overhead_factor) && sl_overhead_factor >= 1.0,
            "profile: sl_overhead_factor must be >= 1");
    require(max_vm >= 0 && max_sl >= 0, "profile: fleet bounds must be >= 0");
    require(max_vm + max_sl >= 1, "profile: fleet bounds admit no instance at all");
}

void validate_fleet(const FleetConfig& fleet, const ProviderProfile& profile) {
    std::ostringstream os;
    if (fleet.n_vm < 0 || fleet.n_sl < 0) {
        os << "fleet {" << fleet.n_vm << "," << fleet.n_sl << "}: counts must be >= 0";
        throw ValidationError(os.str());
    }
    if (fleet.n_vm == 0 && fleet.n_sl == 0)
        throw ValidationError("fleet {0,0}: at least one instance is required");
    if (fleet.n_vm > profile.max_vm || fleet.n_sl > profile.max_sl) {
        os << "fleet {" << fleet.n_vm << "," << fleet.n_sl << "} exceeds profile bounds {"
           << profile.max_vm << "," << profile.max_sl << "}";
        throw ValidationError(os.str());
    }
}

void QueryFeatures::validate() const {
    for (double v : feature_vector(*this)) {
        if (!finite_nonneg(v)) throw ValidationError("features: all numeric fields must be finite and >= 0");
    }
    if (available_memory_mb > total_memory_mb + 1e-9)
        throw ValidationError("features: available_memory must not exceed total_memory");
}

void WorkloadSample::validate() const {
    features.validate();
    if (!(std::isfinite(query_duration_s) && query_duration_s > 0))
        throw ValidationError("sample: query_duration must be > 0");
}

void EngineConfig::validate() const {
    require(!compute_provider.empty(), "config: compute provider must not be empty");
    require(std::isfinite(compute_knob) && compute_knob >= 0.0, "config: knob must be >= 0");
    require(train_max_batch >= 1, "config: train max batch must be >= 1");
    require(std::isfinite(train_min_ram_gb) && train_min_ram_gb >= 0.0,
            "config: train min ram must be >= 0");
    require(std::isfinite(train_error_difference_trigger_s) && train_error_difference_trigger_s > 0.0,
            "config: retrain trigger must be > 0");
}

} // namespace smartpick
