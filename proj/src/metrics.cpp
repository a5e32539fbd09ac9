#include "echoforge/metrics.hpp"

#include "echoforge/errors.hpp"

namespace echoforge {

ConfusionMatrix::ConfusionMatrix() {
  names.reserve(kNumClasses);
  for (int c = 0; c < kNumClasses; ++c) names.push_back(GestureLabel::from_index(c).name());
}

double ConfusionMatrix::accuracy() const {
  const long long n = total();
  return n == 0 ? 0.0 : static_cast<double>(counts.trace()) / static_cast<double>(n);
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  counts += other.counts;
  return *this;
}

ConfusionMatrix confusion(const std::vector<int>& truths, const std::vector<int>& predictions) {
  if (truths.size() != predictions.size())
    throw ShapeError("confusion: " + std::to_string(truths.size()) + " truths vs " +
                     std::to_string(predictions.size()) + " predictions");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const int t = truths[i];
    const int p = predictions[i];
    if (t < 0 || t >= kNumClasses || p < 0 || p >= kNumClasses)
      throw ShapeError("confusion: class index out of range at position " + std::to_string(i));
    ++cm.counts(t, p);
  }
  return cm;
}

FalsePositiveRates false_positive_rate(const ConfusionMatrix& cm) {
  const long long total = cm.total();
  if (total == 0) throw ConfigError("false_positive_rate: empty confusion matrix");
  FalsePositiveRates r;
  r.per_class.resize(static_cast<std::size_t>(cm.counts.rows()));
  double sum = 0.0;
  for (Eigen::Index c = 0; c < cm.counts.rows(); ++c) {
    const long long diag = cm.counts(c, c);
    const long long fp = cm.counts.col(c).sum() - diag;
    const long long tn = total - cm.counts.row(c).sum() - cm.counts.col(c).sum() + diag;
    if (fp + tn == 0) continue;
    const double rate = static_cast<double>(fp) / static_cast<double>(fp + tn);
    r.per_class[static_cast<std::size_t>(c)] = rate;
    sum += rate;
    ++r.defined_classes;
  }
  r.macro = r.defined_classes > 0 ? sum / r.defined_classes : 0.0;
  return r;
}

FoldSummary fold_average(const std::vector<FoldResult>& folds) {
  if (folds.empty()) throw ConfigError("fold_average: no folds");
  FoldSummary s;
  s.folds = folds;
  double sum = 0.0;
  for (const auto& f : folds) {
    sum += f.accuracy;
    s.total += f.cm;
  }
  s.mean_accuracy = sum / static_cast<double>(folds.size());
  return s;
}

FoldResult evaluate_fold(const nn::ModelSpec& spec, const nn::ModelParams<float>& params,
                         const std::vector<LabeledInstance>& instances, const SplitPlan& plan) {
  const auto preds = nn::predict(spec, params, nn::refs_of(instances, plan.test));
  std::vector<int> truths;
  std::vector<int> guesses;
  for (std::size_t k = 0; k < plan.test.size(); ++k) {
    truths.push_back(instances[plan.test[k]].label.class_index());
    guesses.push_back(preds[k].class_index);
  }
  FoldResult f;
  f.name = plan.name;
  f.cm = confusion(truths, guesses);
  f.accuracy = f.cm.accuracy();
  return f;
}

std::vector<BudgetPoint> finetune_curve(const nn::ModelSpec& spec, const std::vector<LabeledInstance>& instances,
                                        const std::string& target, const nn::ModelParams<float>& base,
                                        const std::vector<int>& budgets, int heldout_session,
                                        const nn::TrainConfig& config) {
  const SplitPlan heldout = make_split(instances, SplitScheme::loso(target, heldout_session));
  std::vector<BudgetPoint> curve;
  for (int n : budgets) {
    if (n == 0) {
      curve.push_back({0, evaluate_fold(spec, base, instances, heldout).accuracy});
      continue;
    }
    const SplitPlan plan = make_split(instances, SplitScheme::finetune_budget(target, n, heldout_session));
    nn::TrainConfig ft = config;
    ft.seed = derive_seed(config.seed, 200 + static_cast<std::uint64_t>(n));
    const auto tuned = nn::train(spec, base, nn::refs_of(instances, plan.train), ft, config.epochs_finetune);
    curve.push_back({n, evaluate_fold(spec, tuned.params, instances, plan).accuracy});
  }
  return curve;
}

}  // namespace echoforge
