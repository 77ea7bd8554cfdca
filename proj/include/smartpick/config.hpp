#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "smartpick/domain.hpp"

namespace smartpick {

// Properties-style key=value files: one pair per line, '#' starts a comment,
// blank lines ignored, whitespace around key and value trimmed.
//
// Engine config keys:
//   smartpick.cloud.compute.provider          (string,  default "aws-sim")
//   smartpick.cloud.compute.instanceFamily    (string,  default "t3")
//   smartpick.cloud.compute.relay             (bool,    default True)
//   smartpick.cloud.compute.knob              (double,  default 0)
//   smartpick.train.max.batch                 (int,     default 100)
//   smartpick.train.pref.sameInstance         (bool,    default False)
//   smartpick.train.min.ram.gb                (double,  default 4)
//   smartpick.train.errorDifference.trigger   (double,  default 50)
//
// Unknown keys are collected as warnings (forward compatibility), malformed
// lines and untypable values raise ParseError with the line number.
EngineConfig load_config(const std::filesystem::path& path,
                         std::vector<std::string>* warnings = nullptr);
EngineConfig parse_config_text(const std::string& text,
                               std::vector<std::string>* warnings = nullptr);
void save_config(const EngineConfig& cfg, const std::filesystem::path& path);
std::string render_config(const EngineConfig& cfg);

// Provider profiles use the same file shape with keys named after the
// ProviderProfile fields (name, vm_hourly_price, ..., max_vm, max_sl).
ProviderProfile load_profile(const std::filesystem::path& path);
ProviderProfile parse_profile_text(const std::string& text);
void save_profile(const ProviderProfile& p, const std::filesystem::path& path);
std::string render_profile(const ProviderProfile& p);

} // namespace smartpick
