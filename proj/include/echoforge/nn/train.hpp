#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "echoforge/augment.hpp"
#include "echoforge/dataset.hpp"
#include "echoforge/nn/model.hpp"

namespace echoforge::nn {

struct TrainConfig {
  double learning_rate = 0.0002;
  int batch_size = 8;
  int epochs_base = 150;
  int epochs_finetune = 150;
  std::uint64_t seed = 1;
  AugmentPolicy augment;
  bool augment_enabled = true;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;          // eval-mode accuracy on the un-augmented training set
  std::optional<double> val_acc;   // absent without a validation set
};

struct TrainResult {
  ModelParams<float> params;
  std::vector<EpochMetrics> log;
};

using TensorRefs = std::vector<const EchoTensor*>;
using EpochCallback = std::function<void(const EpochMetrics&)>;

/// Mini-batch Adam over `epochs` epochs with per-epoch seeded shuffling and
/// per-instance augmentation. Every tensor must carry a label.
TrainResult train(const ModelSpec& spec, ModelParams<float> params, const TensorRefs& train_set,
                  const TrainConfig& config, int epochs, const TensorRefs& val_set = {},
                  const EpochCallback& on_epoch = {});

struct Prediction {
  int class_index = 0;
  double confidence = 0.0;
};

/// Softmax argmax, ties broken toward the lower class index.
Prediction predict_from_logits(const Eigen::Ref<const Eigen::VectorXd>& logits);

std::vector<Prediction> predict(const ModelSpec& spec, const ModelParams<float>& params, const TensorRefs& tensors,
                                int batch_size = 16);

double accuracy(const ModelSpec& spec, const ModelParams<float>& params, const TensorRefs& tensors);

TensorRefs refs_of(const std::vector<LabeledInstance>& instances, const std::vector<std::size_t>& indices);
TensorRefs refs_of(const std::vector<LabeledInstance>& instances);

struct TwoStepResult {
  ModelParams<float> base;       // user-independent checkpoint (step 1)
  ModelParams<float> finetuned;  // step 2
  std::vector<EpochMetrics> base_log;
  std::vector<EpochMetrics> finetune_log;
};

/// Step 1 trains epochs_base on every participant except `target`; step 2
/// continues epochs_finetune on the target's sessions other than
/// `heldout_session`, which serves as validation for both steps.
TwoStepResult two_step_train(const ModelSpec& spec, const std::vector<LabeledInstance>& instances,
                             const std::string& target, int heldout_session, const TrainConfig& config,
                             const EpochCallback& on_epoch = {});

void write_metrics_csv(const std::filesystem::path& path, const std::vector<EpochMetrics>& log);

nlohmann::json to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

}  // namespace echoforge::nn
