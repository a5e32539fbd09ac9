#include "echoforge/nn/train.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

#include "echoforge/errors.hpp"
#include "echoforge/nn/adam.hpp"

namespace echoforge::nn {

using nlohmann::json;

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (epochs_base < 0 || epochs_finetune < 0) throw ConfigError("epoch counts must be >= 0");
  augment.validate();
}

namespace {

std::vector<int> labels_of(const TensorRefs& batch) {
  std::vector<int> labels;
  labels.reserve(batch.size());
  for (const auto* t : batch) {
    if (!t->label) throw ConfigError("training tensor without a label");
    labels.push_back(t->label->class_index());
  }
  return labels;
}

}  // namespace

TrainResult train(const ModelSpec& spec, ModelParams<float> params, const TensorRefs& train_set,
                  const TrainConfig& config, int epochs, const TensorRefs& val_set, const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty()) throw ConfigError("train: empty training set");
  if (epochs < 0) throw ConfigError("train: negative epoch count");
  const Network<float> net(spec);
  const std::vector<int> all_labels = labels_of(train_set);

  TrainResult result;
  result.params = std::move(params);
  if (epochs == 0) return result;

  Adam<float> adam(config.learning_rate, config.beta1, config.beta2, config.epsilon);
  Rng shuffle_rng(derive_seed(config.seed, 1));
  Rng augment_rng(derive_seed(config.augment.seed ^ config.seed, 2));
  Rng dropout_rng(derive_seed(config.seed, 3));

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<EchoTensor> augmented;
  TensorRefs batch;
  std::vector<int> labels;

  for (int epoch = 1; epoch <= epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng() % i]);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      labels.clear();
      augmented.clear();
      augmented.reserve(end - start);
      for (std::size_t k = start; k < end; ++k) {
        const EchoTensor* t = train_set[order[k]];
        if (config.augment_enabled) {
          augmented.push_back(augment(*t, config.augment, augment_rng));
          t = &augmented.back();
        }
        batch.push_back(t);
        labels.push_back(all_labels[order[k]]);
      }
      const auto input = prepare_batch<float>(batch, spec.standardize_input);
      auto lg = net.loss_and_grad(result.params, input, labels, Mode::Train, &dropout_rng);
      if (!std::isfinite(lg.loss)) throw NumericError("training loss became non-finite at epoch " + std::to_string(epoch));
      adam.step(result.params, lg.grad);
      loss_sum += static_cast<double>(lg.loss) * static_cast<double>(end - start);
    }
    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = loss_sum / static_cast<double>(order.size());
    m.train_acc = accuracy(spec, result.params, train_set);
    if (!val_set.empty()) m.val_acc = accuracy(spec, result.params, val_set);
    result.log.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  if (!result.params.all_finite()) throw NumericError("training produced non-finite parameters");
  return result;
}

Prediction predict_from_logits(const Eigen::Ref<const Eigen::VectorXd>& logits) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < logits.size(); ++i)
    if (logits[i] > logits[best]) best = i;
  const double z = (logits.array() - logits[best]).exp().sum();
  return {static_cast<int>(best), 1.0 / z};
}

std::vector<Prediction> predict(const ModelSpec& spec, const ModelParams<float>& params, const TensorRefs& tensors,
                                int batch_size) {
  const Network<float> net(spec);
  std::vector<Prediction> out;
  out.reserve(tensors.size());
  for (std::size_t start = 0; start < tensors.size(); start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(tensors.size(), start + static_cast<std::size_t>(batch_size));
    const TensorRefs batch(tensors.begin() + static_cast<std::ptrdiff_t>(start),
                           tensors.begin() + static_cast<std::ptrdiff_t>(end));
    const Mat<float> logits = net.forward(params, prepare_batch<float>(batch, spec.standardize_input), Mode::Eval);
    for (Eigen::Index b = 0; b < logits.rows(); ++b)
      out.push_back(predict_from_logits(logits.row(b).transpose().cast<double>()));
  }
  return out;
}

double accuracy(const ModelSpec& spec, const ModelParams<float>& params, const TensorRefs& tensors) {
  if (tensors.empty()) return 0.0;
  const auto labels = labels_of(tensors);
  const auto preds = predict(spec, params, tensors);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) correct += preds[i].class_index == labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

TensorRefs refs_of(const std::vector<LabeledInstance>& instances, const std::vector<std::size_t>& indices) {
  TensorRefs out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(&instances.at(i).tensor);
  return out;
}

TensorRefs refs_of(const std::vector<LabeledInstance>& instances) {
  TensorRefs out;
  out.reserve(instances.size());
  for (const auto& i : instances) out.push_back(&i.tensor);
  return out;
}

TwoStepResult two_step_train(const ModelSpec& spec, const std::vector<LabeledInstance>& instances,
                             const std::string& target, int heldout_session, const TrainConfig& config,
                             const EpochCallback& on_epoch) {
  const auto people = participants(instances);
  if (std::find(people.begin(), people.end(), target) == people.end())
    throw ConfigError("two_step_train: unknown target participant '" + target + "'");
  if (people.size() < 2) throw ConfigError("two_step_train: need at least 2 participants");

  const SplitPlan lopo = make_split(instances, SplitScheme::lopo(target));
  const SplitPlan loso = make_split(instances, SplitScheme::loso(target, heldout_session));
  const TensorRefs heldout = refs_of(instances, loso.test);

  TwoStepResult r;
  const Network<float> net(spec);
  auto step1 = train(spec, net.init(config.seed), refs_of(instances, lopo.train), config, config.epochs_base, heldout,
                     on_epoch);
  r.base = step1.params;
  r.base_log = std::move(step1.log);
  TrainConfig ft = config;
  ft.seed = derive_seed(config.seed, 100);
  auto step2 = train(spec, r.base, refs_of(instances, loso.train), ft, config.epochs_finetune, heldout, on_epoch);
  r.finetuned = std::move(step2.params);
  r.finetune_log = std::move(step2.log);
  return r;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<EpochMetrics>& log) {
  std::ofstream os(path);
  if (!os) throw IngestError("cannot write " + path.string());
  os << "epoch,train_loss,train_acc,val_acc\n" << std::setprecision(9);
  for (const auto& m : log) {
    os << m.epoch << ',' << m.train_loss << ',' << m.train_acc << ',';
    if (m.val_acc) os << *m.val_acc;
    os << '\n';
  }
}

json to_json(const ModelSpec& spec) {
  const auto stage = [](const ConvStage& s) {
    return json{{"out_channels", s.out_channels}, {"kernel", s.kernel}, {"stride", s.stride}, {"residual", s.residual}};
  };
  json j;
  j["input"] = {spec.in_width, spec.in_height, spec.in_channels};
  j["stem"] = spec.stem ? stage(*spec.stem) : json(nullptr);
  j["stages"] = json::array();
  for (const auto& s : spec.stages) j["stages"].push_back(stage(s));
  j["pool"] = "global_average";
  j["dropout_rate"] = spec.dropout_rate;
  j["output_dim"] = spec.output_dim;
  j["standardize_input"] = spec.standardize_input;
  j["init"] = "he_normal_fan_in";
  return j;
}

ModelSpec model_spec_from_json(const json& j) {
  const auto stage = [](const json& s) {
    return ConvStage{s.at("out_channels").get<int>(), s.at("kernel").get<int>(), s.at("stride").get<int>(),
                     s.at("residual").get<bool>()};
  };
  ModelSpec spec;
  if (j.contains("stem") && !j.at("stem").is_null()) spec.stem = stage(j.at("stem"));
  for (const auto& s : j.at("stages")) spec.stages.push_back(stage(s));
  spec.dropout_rate = j.value("dropout_rate", 0.6);
  spec.output_dim = j.value("output_dim", 30);
  spec.standardize_input = j.value("standardize_input", true);
  spec.validate();
  return spec;
}

json to_json(const TrainConfig& cfg) {
  return json{{"learning_rate", cfg.learning_rate},
              {"batch_size", cfg.batch_size},
              {"epochs_base", cfg.epochs_base},
              {"epochs_finetune", cfg.epochs_finetune},
              {"seed", cfg.seed},
              {"loss", "cross_entropy"},
              {"optimizer", {{"type", "adam"}, {"beta1", cfg.beta1}, {"beta2", cfg.beta2}, {"epsilon", cfg.epsilon}}},
              {"weight_decay", 0.0},
              {"lr_schedule", "constant"},
              {"finetune_layers", "all"},
              {"augment",
               {{"enabled", cfg.augment_enabled},
                {"max_shift", cfg.augment.max_shift},
                {"jitter_prob", cfg.augment.jitter_prob},
                {"jitter_low", cfg.augment.jitter_low},
                {"jitter_high", cfg.augment.jitter_high},
                {"seed", cfg.augment.seed}}}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig cfg;
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.epochs_base = j.value("epochs_base", cfg.epochs_base);
  cfg.epochs_finetune = j.value("epochs_finetune", cfg.epochs_finetune);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    cfg.beta1 = o.value("beta1", cfg.beta1);
    cfg.beta2 = o.value("beta2", cfg.beta2);
    cfg.epsilon = o.value("epsilon", cfg.epsilon);
  }
  if (j.contains("augment")) {
    const auto& a = j.at("augment");
    cfg.augment_enabled = a.value("enabled", cfg.augment_enabled);
    cfg.augment.max_shift = a.value("max_shift", cfg.augment.max_shift);
    cfg.augment.jitter_prob = a.value("jitter_prob", cfg.augment.jitter_prob);
    cfg.augment.jitter_low = a.value("jitter_low", cfg.augment.jitter_low);
    cfg.augment.jitter_high = a.value("jitter_high", cfg.augment.jitter_high);
    cfg.augment.seed = a.value("seed", cfg.augment.seed);
  }
  cfg.validate();
  return cfg;
}

}  // namespace echoforge::nn
