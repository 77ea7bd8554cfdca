#include "smartpick/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace smartpick {
namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

// key -> (value, line number)
using KvMap = std::map<std::string, std::pair<std::string, int>>;

KvMap parse_properties(const std::string& text) {
    KvMap out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw ParseError("line " + std::to_string(lineno) + ": expected key=value, got '" + t + "'");
        }
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        if (key.empty())
            throw ParseError("line " + std::to_string(lineno) + ": empty key");
        out[key] = {val, lineno};
    }
    return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::pair<std::string, int>& v,
                            const char* want) {
    throw ParseError("line " + std::to_string(v.second) + ": key '" + key + "' expects " + want +
                         ", got '" + v.first + "'");
}

bool parse_bool(const std::string& key, const std::pair<std::string, int>& v) {
    std::string s = v.first;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    bad_value(key, v, "a boolean (True/False)");
}

double parse_double(const std::string& key, const std::pair<std::string, int>& v) {
    const std::string& s = v.first;
    char* end = nullptr;
    double d = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) bad_value(key, v, "a number");
    return d;
}

long long parse_int(const std::string& key, const std::pair<std::string, int>& v) {
    const std::string& s = v.first;
    long long n = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec != std::errc() || p != s.data() + s.size()) bad_value(key, v, "an integer");
    return n;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    out.flush();
    if (!out) throw IoError("short write to " + path.string());
}

std::string fmt_double(double v) {
    // Shortest representation that round-trips.
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double back = std::strtod(buf, nullptr);
    for (int prec = 1; prec < 17; ++prec) {
        char cand[64];
        std::snprintf(cand, sizeof(cand), "%.*g", prec, v);
        if (std::strtod(cand, nullptr) == back) return cand;
    }
    return buf;
}

} // namespace

EngineConfig parse_config_text(const std::string& text, std::vector<std::string>* warnings) {
    KvMap kv = parse_properties(text);
    EngineConfig cfg;
    if (auto it = kv.find("smartpick.cloud.compute.provider"); it != kv.end()) {
        cfg.compute_provider = it->second.first;
        kv.erase(it);
    }
    if (auto it = kv.find("smartpick.cloud.compute.instanceFamily"); it != kv.end()) {
        cfg.compute_instance_family = it->second.first;
        kv.erase(it);
    }
    if (auto it = kv.find("smartpick.cloud.compute.relay"); it != kv.end()) {
        cfg.compute_relay = parse_bool(it->first, it->second);
        kv.erase(it);
    }
    if (auto it = kv.find("smartpick.cloud.compute.knob"); it != kv.end()) {
        cfg.compute_knob = parse_double(it->first, it->second);
        kv.erase(it);
    }
    if (auto it = kv.find("smartpick.train.max.batch"); it != kv.end()) {
        cfg.train_max_batch = static_cast<int>(parse_int(it->first, it->second));
        kv.erase(it);
    }
    if (auto it = kv.find("smartpick.train.pref.sameInstance"); it != kv.end()) {
        cfg.train_pref_same_instance = parse_bool(it->first, it->second);
        kv.erase(it);
    }
    if (auto it = kv.find("smartpick.train.min.ram.gb"); it != kv.end()) {
        cfg.train_min_ram_gb = parse_double(it->first, it->second);
        kv.erase(it);
    }
    if (auto it = kv.find("smartpick.train.errorDifference.trigger"); it != kv.end()) {
        cfg.train_error_difference_trigger_s = parse_double(it->first, it->second);
        kv.erase(it);
    }
    for (const auto& [key, val] : kv) {
        if (warnings)
            warnings->push_back("line " + std::to_string(val.second) + ": unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

EngineConfig load_config(const std::filesystem::path& path, std::vector<std::string>* warnings) {
    return parse_config_text(read_file(path), warnings);
}

std::string render_config(const EngineConfig& cfg) {
    std::ostringstream os;
    os << "# smartpick engine configuration\n";
    os << "smartpick.cloud.compute.provider = " << cfg.compute_provider << "\n";
    os << "smartpick.cloud.compute.instanceFamily = " << cfg.compute_instance_family << "\n";
    os << "smartpick.cloud.compute.relay = " << (cfg.compute_relay ? "True" : "False") << "\n";
    os << "smartpick.cloud.compute.knob = " << fmt_double(cfg.compute_knob) << "\n";
    os << "smartpick.train.max.batch = " << cfg.train_max_batch << "\n";
    os << "smartpick.train.pref.sameInstance = " << (cfg.train_pref_same_instance ? "True" : "False")
       << "\n";
    os << "smartpick.train.min.ram.gb = " << fmt_double(cfg.train_min_ram_gb) << "\n";
    os << "smartpick.train.errorDifference.trigger = "
       << fmt_double(cfg.train_error_difference_trigger_s) << "\n";
    return os.str();
}

void save_config(const EngineConfig& cfg, const std::filesystem::path& path) {
    cfg.validate();
    write_file(path, render_config(cfg));
}

ProviderProfile parse_profile_text(const std::string& text) {
    KvMap kv = parse_properties(text);
    ProviderProfile p;
    auto take_str = [&](const char* key, std::string& dst) {
        if (auto it = kv.find(key); it != kv.end()) {
            dst = it->second.first;
            kv.erase(it);
        }
    };
    auto take_double = [&](const char* key, double& dst) {
        if (auto it = kv.find(key); it != kv.end()) {
            dst = parse_double(key, it->second);
            kv.erase(it);
        }
    };
    auto take_int = [&](const char* key, auto& dst) {
        if (auto it = kv.find(key); it != kv.end()) {
            dst = static_cast<std::remove_reference_t<decltype(dst)>>(parse_int(key, it->second));
            kv.erase(it);
        }
    };
    take_str("name", p.name);
    take_double("vm_hourly_price", p.vm_hourly_price);
    take_double("vm_storage_hourly_price", p.vm_storage_hourly_price);
    take_double("burstable_price_per_vcpu_hour", p.burstable_price_per_vcpu_hour);
    take_int("vcpus_per_instance", p.vcpus_per_instance);
    take_double("sl_price_per_gb_second", p.sl_price_per_gb_second);
    take_double("sl_memory_gb", p.sl_memory_gb);
    take_int("sl_billing_granularity_ms", p.sl_billing_granularity_ms);
    take_double("external_store_hourly_price", p.external_store_hourly_price);
    take_double("vm_cold_boot_s", p.vm_cold_boot_s);
    take_double("sl_boot_s", p.sl_boot_s);
    take_double("sl_overhead_factor", p.sl_overhead_factor);
    take_int("max_vm", p.max_vm);
    take_int("max_sl", p.max_sl);
    if (!kv.empty())
        throw ParseError("line " + std::to_string(kv.begin()->second.second) +
                         ": unknown profile key '" + kv.begin()->first + "'");
    p.validate();
    return p;
}

ProviderProfile load_profile(const std::filesystem::path& path) {
    return parse_profile_text(read_file(path));
}

std::string render_profile(const ProviderProfile& p) {
    std::ostringstream os;
    os << "# provider profile\n";
    os << "name = " << p.name << "\n";
    os << "vm_hourly_price = " << fmt_double(p.vm_hourly_price) << "\n";
    os << "vm_storage_hourly_price = " << fmt_double(p.vm_storage_hourly_price) << "\n";
    os << "burstable_price_per_vcpu_hour = " << fmt_double(p.burstable_price_per_vcpu_hour) << "\n";
    os << "vcpus_per_instance = " << p.vcpus_per_instance << "\n";
    os << "sl_price_per_gb_second = " << fmt_double(p.sl_price_per_gb_second) << "\n";
    os << "sl_memory_gb = " << fmt_double(p.sl_memory_gb) << "\n";
    os << "sl_billing_granularity_ms = " << p.sl_billing_granularity_ms << "\n";
    os << "external_store_hourly_price = " << fmt_double(p.external_store_hourly_price) << "\n";
    os << "vm_cold_boot_s = " << fmt_double(p.vm_cold_boot_s) << "\n";
    os << "sl_boot_s = " << fmt_double(p.sl_boot_s) << "\n";
    os << "sl_overhead_factor = " << fmt_double(p.sl_overhead_factor) << "\n";
    os << "max_vm = " << p.max_vm << "\n";
    os << "max_sl = " << p.max_sl << "\n";
    return os.str();
}

void save_profile(const ProviderProfile& p, const std::filesystem::path& path) {
    p.validate();
    write_file(path, render_profile(p));
}

} // namespace smartpick
