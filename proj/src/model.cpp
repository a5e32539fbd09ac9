#include "echoforge/nn/model.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "echoforge/errors.hpp"

namespace echoforge::nn {

ModelSpec ModelSpec::desk_scale() {
  ModelSpec s;
  s.stem = ConvStage{16, 3, 2, false};
  s.stages = {{16, 3, 1, true}, {32, 3, 2, true}, {64, 3, 2, true}, {128, 3, 2, true}};
  return s;
}

ModelSpec ModelSpec::resnet18() {
  ModelSpec s;
  s.stem = ConvStage{64, 7, 2, false};
  s.stages = {{64, 3, 1, true},  {64, 3, 1, true},  {128, 3, 2, true}, {128, 3, 1, true},
              {256, 3, 2, true}, {256, 3, 1, true}, {512, 3, 2, true}, {512, 3, 1, true}};
  return s;
}

void ModelSpec::validate() const {
  if (output_dim != 30) throw ConfigError("model output_dim must be 30");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout rate must be in [0, 1)");
  if (in_channels <= 0 || in_height <= 0 || in_width <= 0) throw ConfigError("model input shape must be positive");
  if (stages.empty()) throw ConfigError("model needs at least one conv stage");
  auto check = [](const ConvStage& s) {
    if (s.out_channels <= 0 || s.kernel <= 0 || s.kernel % 2 == 0 || s.stride <= 0)
      throw ConfigError("conv stages need positive channels/stride and an odd kernel");
  };
  if (stem) check(*stem);
  for (const auto& s : stages) check(s);
}

template <typename Scalar>
Activation<Scalar> prepare_batch(std::span<const EchoTensor* const> batch, bool standardize) {
  const int C = EchoTensor::kChannels, H = EchoTensor::kBins, W = EchoTensor::kFrames;
  Activation<Scalar> x;
  x.geom = {C, H, W};
  x.batch = static_cast<int>(batch.size());
  x.data.resize(C, static_cast<Eigen::Index>(x.batch) * H * W);
  for (int b = 0; b < x.batch; ++b) {
    const EchoTensor& t = *batch[b];
    if (!t.has_valid_shape()) throw ShapeError("classifier input must be 155 x 70 x 8");
    for (int c = 0; c < C; ++c) {
      const auto& plane = t.planes[c];
      if (!plane.allFinite()) throw NumericError("classifier input contains non-finite values");
      double shift = 0.0, scale = 1.0;
      if (standardize) {
        const auto v = plane.cast<double>().array();
        shift = v.mean();
        const double sd = std::sqrt((v - shift).square().mean());
        if (sd > 0.0) scale = 1.0 / sd;
      }
      Scalar* dst = x.data.row(c).data() + static_cast<Eigen::Index>(b) * H * W;
      for (int y = 0; y < H; ++y)
        for (int xx = 0; xx < W; ++xx)
          dst[y * W + xx] = static_cast<Scalar>((static_cast<double>(plane(y, xx)) - shift) * scale);
    }
  }
  return x;
}

template <typename Scalar>
Network<Scalar>::Network(ModelSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  const auto add = [&](const std::string& name, Eigen::Index rows, Eigen::Index cols, const std::string& kind) {
    names_.push_back(name);
    shapes_.emplace_back(rows, cols);
    kinds_.push_back(kind);
    return static_cast<int>(names_.size() - 1);
  };
  const auto conv = [&](const std::string& name, int in, const ConvStage& s, int kernel, int stride,
                        const std::string& kind) {
    ConvRef r;
    r.weight = add(name + ".w", s.out_channels, static_cast<Eigen::Index>(in) * kernel * kernel, kind);
    r.bias = add(name + ".b", s.out_channels, 1, kind);
    r.geom = {kernel, stride, kernel / 2};
    return r;
  };

  int channels = spec_.in_channels;
  if (spec_.stem) {
    stem_ = conv("stem", channels, *spec_.stem, spec_.stem->kernel, spec_.stem->stride, "stem");
    channels = spec_.stem->out_channels;
  }
  for (std::size_t i = 0; i < spec_.stages.size(); ++i) {
    const auto& s = spec_.stages[i];
    const std::string prefix = "stage" + std::to_string(i + 1);
    BlockRef b;
    b.residual = s.residual;
    b.conv1 = conv(prefix + ".conv1", channels, s, s.kernel, s.stride, "conv");
    b.conv2 = conv(prefix + ".conv2", s.out_channels, s, s.kernel, 1, "conv");
    if (s.residual && (s.stride != 1 || s.out_channels != channels))
      b.proj = conv(prefix + ".proj", channels, s, 1, s.stride, "proj");
    blocks_.push_back(b);
    channels = s.out_channels;
  }
  fc_weight_ = add("fc.w", spec_.output_dim, channels, "fc");
  fc_bias_ = add("fc.b", spec_.output_dim, 1, "fc");
}

template <typename Scalar>
ModelParams<Scalar> Network<Scalar>::init(std::uint64_t seed) const {
  ModelParams<Scalar> p;
  p.names = names_;
  p.init_seed = seed;
  Rng rng(seed);
  for (std::size_t i = 0; i < names_.size(); ++i) {
    const auto [rows, cols] = shapes_[i];
    Mat<Scalar> m = Mat<Scalar>::Zero(rows, cols);
    if (names_[i].ends_with(".w")) {
      std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(cols)));
      for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = static_cast<Scalar>(normal(rng));
    }
    p.blocks.push_back(std::move(m));
  }
  return p;
}

template <typename Scalar>
std::vector<int> Network<Scalar>::blocks_of_kind(const std::string& kind) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < kinds_.size(); ++i)
    if (kinds_[i] == kind) out.push_back(static_cast<int>(i));
  return out;
}

template <typename Scalar>
void Network<Scalar>::check_params(const ModelParams<Scalar>& params) const {
  if (params.blocks.size() != names_.size()) throw ShapeError("model parameters do not match the model spec");
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (params.names[i] != names_[i] || params.blocks[i].rows() != shapes_[i].first ||
        params.blocks[i].cols() != shapes_[i].second) {
      std::ostringstream msg;
      msg << "parameter block " << names_[i] << " expected " << shapes_[i].first << " x " << shapes_[i].second;
      throw ShapeError(msg.str());
    }
  }
}

template <typename Scalar>
Mat<Scalar> Network<Scalar>::run(const ModelParams<Scalar>& params, const Activation<Scalar>& input, Mode mode,
                                 Rng* rng, Cache& cache) const {
  check_params(params);
  if (input.geom != Geometry{spec_.in_channels, spec_.in_height, spec_.in_width})
    throw ShapeError("input geometry does not match the model spec");
  if (!input.data.allFinite()) throw NumericError("non-finite classifier input");
  if (mode == Mode::Train && spec_.dropout_rate > 0.0 && rng == nullptr)
    throw ConfigError("train-mode forward needs an rng for dropout");

  const auto& P = params.blocks;
  cache.batch = input.batch;
  cache.blocks.resize(blocks_.size());

  Activation<Scalar> x;
  const Activation<Scalar>* cur = &input;
  if (stem_) {
    cache.stem.in = input.geom;
    x = conv2d_forward(input, P[stem_->weight], P[stem_->bias], stem_->geom, cache.stem.cols);
    relu_inplace(x);
    cache.stem_out = x;
    cur = &cache.stem_out;
  }
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const BlockRef& b = blocks_[i];
    BlockCache& bc = cache.blocks[i];
    const Activation<Scalar>& in = *cur;
    bc.c1.in = in.geom;
    bc.hidden = conv2d_forward(in, P[b.conv1.weight], P[b.conv1.bias], b.conv1.geom, bc.c1.cols);
    relu_inplace(bc.hidden);
    bc.c2.in = bc.hidden.geom;
    Activation<Scalar> z = conv2d_forward(bc.hidden, P[b.conv2.weight], P[b.conv2.bias], b.conv2.geom, bc.c2.cols);
    if (b.residual) {
      if (b.proj) {
        bc.proj.in = in.geom;
        z.data += conv2d_forward(in, P[b.proj->weight], P[b.proj->bias], b.proj->geom, bc.proj.cols).data;
      } else {
        z.data += in.data;
      }
    }
    relu_inplace(z);
    bc.out = std::move(z);
    cur = &bc.out;
  }

  cache.last = cur->geom;
  cache.pooled = global_avg_pool(*cur);
  cache.features = cache.pooled;
  cache.mask.resize(0, 0);
  if (mode == Mode::Train && spec_.dropout_rate > 0.0) {
    const double keep = 1.0 - spec_.dropout_rate;
    cache.mask.resize(cache.pooled.rows(), cache.pooled.cols());
    for (Eigen::Index k = 0; k < cache.mask.size(); ++k)
      cache.mask.data()[k] = uniform(*rng, 0.0, 1.0) < keep ? static_cast<Scalar>(1.0 / keep) : Scalar(0);
    cache.features = cache.features.cwiseProduct(cache.mask);
  }
  Mat<Scalar> logits = P[fc_weight_] * cache.features;
  logits.colwise() += P[fc_bias_].col(0);
  return logits;
}

template <typename Scalar>
Mat<Scalar> Network<Scalar>::forward(const ModelParams<Scalar>& params, const Activation<Scalar>& input, Mode mode,
                                     Rng* rng) const {
  Cache cache;
  Mat<Scalar> logits = run(params, input, mode, rng, cache);
  return logits.transpose();
}

template <typename Scalar>
LossAndGrad<Scalar> Network<Scalar>::loss_and_grad(const ModelParams<Scalar>& params,
                                                   const Activation<Scalar>& input, const std::vector<int>& labels,
                                                   Mode mode, Rng* rng) const {
  if (static_cast<int>(labels.size()) != input.batch) throw ShapeError("label count differs from batch size");
  for (int l : labels)
    if (l < 0 || l >= spec_.output_dim) throw ConfigError("label " + std::to_string(l) + " outside [0, 30)");

  Cache cache;
  const Mat<Scalar> logits = run(params, input, mode, rng, cache);
  LossAndGrad<Scalar> out;
  Mat<Scalar> dlogits;
  out.loss = softmax_cross_entropy(logits, labels, dlogits);
  out.grad = params.zeros_like();
  auto& G = out.grad.blocks;
  const auto& P = params.blocks;

  G[fc_weight_].noalias() += dlogits * cache.features.transpose();
  G[fc_bias_].col(0) += dlogits.rowwise().sum();
  Mat<Scalar> dpooled = P[fc_weight_].transpose() * dlogits;
  if (cache.mask.size() > 0) dpooled = dpooled.cwiseProduct(cache.mask);
  Activation<Scalar> dx = global_avg_pool_backward(dpooled, cache.last, cache.batch);

  for (std::size_t i = blocks_.size(); i-- > 0;) {
    const BlockRef& b = blocks_[i];
    BlockCache& bc = cache.blocks[i];
    relu_backward_inplace(dx, bc.out);  // dx now d(pre-activation sum)
    Activation<Scalar> dhidden = conv2d_backward(dx, P[b.conv2.weight], bc.c2.cols, bc.c2.in, b.conv2.geom,
                                                 G[b.conv2.weight], G[b.conv2.bias]);
    relu_backward_inplace(dhidden, bc.hidden);
    Activation<Scalar> din = conv2d_backward(dhidden, P[b.conv1.weight], bc.c1.cols, bc.c1.in, b.conv1.geom,
                                             G[b.conv1.weight], G[b.conv1.bias]);
    if (b.residual) {
      if (b.proj)
        din.data += conv2d_backward(dx, P[b.proj->weight], bc.proj.cols, bc.proj.in, b.proj->geom, G[b.proj->weight],
                                    G[b.proj->bias])
                        .data;
      else
        din.data += dx.data;
    }
    dx = std::move(din);
  }
  if (stem_) {
    relu_backward_inplace(dx, cache.stem_out);
    conv2d_backward(dx, P[stem_->weight], cache.stem.cols, cache.stem.in, stem_->geom, G[stem_->weight],
                    G[stem_->bias]);
  }
  return out;
}

template class Network<float>;
template class Network<double>;
template Activation<float> prepare_batch<float>(std::span<const EchoTensor* const>, bool);
template Activation<double> prepare_batch<double>(std::span<const EchoTensor* const>, bool);

}  // namespace echoforge::nn
