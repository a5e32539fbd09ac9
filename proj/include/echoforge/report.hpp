#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "echoforge/metrics.hpp"

namespace echoforge::report {

/// fold, accuracy, n_test
void write_folds_csv(const std::filesystem::path& path, const FoldSummary& summary);

/// class_index, name, support, correct, recall, fpr
void write_per_class_csv(const std::filesystem::path& path, const ConfusionMatrix& cm);

nlohmann::json summary_json(const FoldSummary& summary);

/// "92.0%"
std::string percent(double fraction);

/// Heatmap of row-normalised counts with grasp-grouped axis labels.
void write_confusion_png(const std::filesystem::path& path, const ConfusionMatrix& cm);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace echoforge::report
