#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "echoforge/dataset.hpp"
#include "echoforge/labels.hpp"
#include "echoforge/nn/train.hpp"

namespace echoforge {

/// Rows are truths, columns predictions.
struct ConfusionMatrix {
  Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> counts =
      Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>::Zero(kNumClasses, kNumClasses);
  std::vector<std::string> names;

  ConfusionMatrix();
  long long total() const { return counts.sum(); }
  double accuracy() const;
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
};

ConfusionMatrix confusion(const std::vector<int>& truths, const std::vector<int>& predictions);

struct FalsePositiveRates {
  std::vector<std::optional<double>> per_class;  // empty where FP + TN = 0
  double macro = 0.0;                            // mean over defined classes
  int defined_classes = 0;
};

FalsePositiveRates false_positive_rate(const ConfusionMatrix& cm);

struct FoldResult {
  std::string name;
  double accuracy = 0.0;
  ConfusionMatrix cm;
};

struct FoldSummary {
  std::vector<FoldResult> folds;
  double mean_accuracy = 0.0;
  ConfusionMatrix total;
};

FoldSummary fold_average(const std::vector<FoldResult>& folds);

/// Evaluates params on the given test indices and packages a fold result.
FoldResult evaluate_fold(const nn::ModelSpec& spec, const nn::ModelParams<float>& params,
                         const std::vector<LabeledInstance>& instances, const SplitPlan& plan);

struct BudgetPoint {
  int budget = 0;
  double accuracy = 0.0;
};

/// Budget 0 evaluates `base` as is; budget n fine-tunes a copy of `base` for
/// config.epochs_finetune epochs on the first n non-held-out sessions.
std::vector<BudgetPoint> finetune_curve(const nn::ModelSpec& spec, const std::vector<LabeledInstance>& instances,
                                        const std::string& target, const nn::ModelParams<float>& base,
                                        const std::vector<int>& budgets, int heldout_session,
                                        const nn::TrainConfig& config);

}  // namespace echoforge
