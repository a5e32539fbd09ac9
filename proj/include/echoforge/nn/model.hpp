#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "echoforge/echo.hpp"
#include "echoforge/nn/layers.hpp"
#include "echoforge/rng.hpp"

namespace echoforge::nn {

struct ConvStage {
  int out_channels = 16;
  int kernel = 3;
  int stride = 1;
  bool residual = true;
};

/// Encoder: optional strided stem conv, then one two-conv block per stage,
/// global average pool, dropout and a linear head.
struct ModelSpec {
  int in_channels = EchoTensor::kChannels;
  int in_height = EchoTensor::kBins;
  int in_width = EchoTensor::kFrames;
  std::optional<ConvStage> stem;
  std::vector<ConvStage> stages;
  double dropout_rate = 0.6;
  int output_dim = 30;
  /// Zero-mean, unit-variance standardisation of each input plane.
  bool standardize_input = true;

  /// 3x3 stride-2 stem (16 ch) + residual stages 16, 32, 64, 128.
  static ModelSpec desk_scale();
  /// Eight residual blocks (64..512) behind a 7x7 stride-2 stem; 18 weight layers.
  static ModelSpec resnet18();

  void validate() const;
};

enum class Mode { Train, Eval };

template <typename Scalar>
struct ModelParams {
  std::vector<std::string> names;
  std::vector<Mat<Scalar>> blocks;
  std::uint32_t version = 1;
  std::uint64_t init_seed = 0;

  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<int>(i);
    return -1;
  }
  Eigen::Index count() const {
    Eigen::Index n = 0;
    for (const auto& b : blocks) n += b.size();
    return n;
  }
  bool all_finite() const {
    for (const auto& b : blocks)
      if (!b.allFinite()) return false;
    return true;
  }
  ModelParams zeros_like() const {
    ModelParams out = *this;
    for (auto& b : out.blocks) b.setZero();
    return out;
  }
  template <typename Other>
  ModelParams<Other> cast() const {
    ModelParams<Other> out;
    out.names = names;
    out.version = version;
    out.init_seed = init_seed;
    for (const auto& b : blocks) out.blocks.push_back(b.template cast<Other>());
    return out;
  }
};

template <typename Scalar>
struct LossAndGrad {
  Scalar loss = 0;
  ModelParams<Scalar> grad;
};

/// Batch of tensors -> (8 x B*70*155) activation, optionally standardised plane by plane.
template <typename Scalar>
Activation<Scalar> prepare_batch(std::span<const EchoTensor* const> batch, bool standardize);

template <typename Scalar>
class Network {
 public:
  explicit Network(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }

  /// He-normal weights (fan-in), zero biases.
  ModelParams<Scalar> init(std::uint64_t seed) const;

  /// Logits as (batch x output_dim). Train mode needs rng for dropout.
  Mat<Scalar> forward(const ModelParams<Scalar>& params, const Activation<Scalar>& input, Mode mode,
                      Rng* rng = nullptr) const;

  /// Mean cross-entropy and its gradient with respect to every block.
  LossAndGrad<Scalar> loss_and_grad(const ModelParams<Scalar>& params, const Activation<Scalar>& input,
                                    const std::vector<int>& labels, Mode mode, Rng* rng = nullptr) const;

  /// Names of the parameter blocks for one layer type (for gradient checks):
  /// "stem", "conv", "proj", "fc".
  std::vector<int> blocks_of_kind(const std::string& kind) const;

 private:
  struct ConvRef {
    int weight = -1;
    int bias = -1;
    ConvGeometry geom;
  };
  struct BlockRef {
    ConvRef conv1, conv2;
    std::optional<ConvRef> proj;
    bool residual = true;
  };
  struct ConvCache {
    Mat<Scalar> cols;
    Geometry in;
  };
  struct BlockCache {
    ConvCache c1, c2, proj;
    Activation<Scalar> hidden;  // relu(conv1)
    Activation<Scalar> out;     // relu(conv2 + shortcut)
  };
  struct Cache {
    ConvCache stem;
    Activation<Scalar> stem_out;
    std::vector<BlockCache> blocks;
    Geometry last;
    int batch = 0;
    Mat<Scalar> pooled;
    Mat<Scalar> mask;  // inverted-dropout multipliers, empty in eval mode
    Mat<Scalar> features;
  };

  Mat<Scalar> run(const ModelParams<Scalar>& params, const Activation<Scalar>& input, Mode mode, Rng* rng,
                  Cache& cache) const;
  void check_params(const ModelParams<Scalar>& params) const;

  ModelSpec spec_;
  std::vector<std::string> names_;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> shapes_;
  std::vector<std::string> kinds_;
  std::optional<ConvRef> stem_;
  std::vector<BlockRef> blocks_;
  int fc_weight_ = -1;
  int fc_bias_ = -1;
};

extern template class Network<float>;
extern template class Network<double>;
extern template Activation<float> prepare_batch<float>(std::span<const EchoTensor* const>, bool);
extern template Activation<double> prepare_batch<double>(std::span<const EchoTensor* const>, bool);

}  // namespace echoforge::nn
