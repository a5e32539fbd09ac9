#pragma once

#include <cmath>
#include <vector>

#include "echoforge/nn/model.hpp"

namespace echoforge::nn {

template <typename Scalar>
class Adam {
 public:
  Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

  void step(ModelParams<Scalar>& params, const ModelParams<Scalar>& grad) {
    if (m_.empty()) {
      for (const auto& b : params.blocks) {
        m_.push_back(Mat<Scalar>::Zero(b.rows(), b.cols()));
        v_.push_back(Mat<Scalar>::Zero(b.rows(), b.cols()));
      }
    }
    ++t_;
    const auto b1 = static_cast<Scalar>(beta1_);
    const auto b2 = static_cast<Scalar>(beta2_);
    const auto step = static_cast<Scalar>(lr_ * std::sqrt(1.0 - std::pow(beta2_, t_)) / (1.0 - std::pow(beta1_, t_)));
    const auto eps = static_cast<Scalar>(eps_);
    for (std::size_t i = 0; i < params.blocks.size(); ++i) {
      const auto& g = grad.blocks[i];
      m_[i] = b1 * m_[i] + (Scalar(1) - b1) * g;
      v_[i] = b2 * v_[i] + (Scalar(1) - b2) * g.cwiseAbs2();
      params.blocks[i].array() -= step * m_[i].array() / (v_[i].array().sqrt() + eps);
    }
  }

  long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Mat<Scalar>> m_, v_;
};

}  // namespace echoforge::nn
