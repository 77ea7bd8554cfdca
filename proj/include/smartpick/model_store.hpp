#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "smartpick/predictor.hpp"

namespace smartpick {

// File-backed model versions: model-<version>.json files plus a CURRENT
// pointer file naming the serving version. Both the model file and the
// pointer are written to a temp name and renamed into place, so readers
// always see either the old complete state or the new complete state.
class ModelStore {
public:
    explicit ModelStore(std::filesystem::path dir);

    const std::filesystem::path& dir() const { return dir_; }

    // Writes model-<model.version()>.json and repoints CURRENT at it.
    void publish(const PredictionModel& model);

    // The version CURRENT points at; StateError when no model is published.
    PredictionModel load_current() const;
    std::optional<int> current_version() const;

    std::filesystem::path model_path(int version) const;

private:
    std::filesystem::path dir_;
};

} // namespace smartpick
