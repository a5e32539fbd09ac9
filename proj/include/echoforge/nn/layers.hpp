#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace echoforge::nn {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

struct Geometry {
  int channels = 0;
  int height = 0;
  int width = 0;
  int positions() const { return height * width; }
  friend bool operator==(const Geometry&, const Geometry&) = default;
};

/// Batched feature maps: one row per channel, columns ordered
/// (batch, y, x) with x fastest.
template <typename Scalar>
struct Activation {
  Geometry geom;
  int batch = 0;
  Mat<Scalar> data;
};

struct ConvGeometry {
  int kernel = 3;
  int stride = 1;
  int pad = 1;
  int out_size(int in) const { return (in + 2 * pad - kernel) / stride + 1; }
};

/// Output columns [lo, hi) whose input column ox*stride - pad + kx lies inside [0, W).
inline std::pair<int, int> valid_span(int W, int Wo, const ConvGeometry& g, int kx) {
  const int off = kx - g.pad;
  int lo = off >= 0 ? 0 : (-off + g.stride - 1) / g.stride;
  int hi = W - 1 - off < 0 ? 0 : (W - 1 - off) / g.stride + 1;
  lo = std::min(lo, Wo);
  hi = std::clamp(hi, lo, Wo);
  return {lo, hi};
}

template <typename Scalar>
void im2col(const Activation<Scalar>& x, const ConvGeometry& g, Mat<Scalar>& cols) {
  const int H = x.geom.height, W = x.geom.width, C = x.geom.channels;
  const int Ho = g.out_size(H), Wo = g.out_size(W);
  const int k = g.kernel, s = g.stride;
  const Eigen::Index n_out = static_cast<Eigen::Index>(x.batch) * Ho * Wo;
  cols.resize(static_cast<Eigen::Index>(C) * k * k, n_out);
  for (int c = 0; c < C; ++c) {
    const Scalar* src = x.data.row(c).data();
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        Scalar* dst = cols.row((static_cast<Eigen::Index>(c) * k + ky) * k + kx).data();
        const auto [lo, hi] = valid_span(W, Wo, g, kx);
        const int off = kx - g.pad;
        for (int b = 0; b < x.batch; ++b) {
          const Scalar* img = src + static_cast<Eigen::Index>(b) * H * W;
          for (int oy = 0; oy < Ho; ++oy) {
            const int iy = oy * s - g.pad + ky;
            Scalar* out = dst + (static_cast<Eigen::Index>(b) * Ho + oy) * Wo;
            if (iy < 0 || iy >= H) {
              std::fill(out, out + Wo, Scalar(0));
              continue;
            }
            const Scalar* row = img + static_cast<Eigen::Index>(iy) * W + off;
            std::fill(out, out + lo, Scalar(0));
            if (s == 1)
              std::copy(row + lo, row + hi, out + lo);
            else
              for (int ox = lo; ox < hi; ++ox) out[ox] = row[ox * s];
            std::fill(out + hi, out + Wo, Scalar(0));
          }
        }
      }
  }
}

template <typename Scalar>
void col2im(const Mat<Scalar>& cols, const Geometry& in, int batch, const ConvGeometry& g, Activation<Scalar>& dx) {
  const int H = in.height, W = in.width, C = in.channels;
  const int Ho = g.out_size(H), Wo = g.out_size(W);
  const int k = g.kernel, s = g.stride;
  dx.geom = in;
  dx.batch = batch;
  dx.data.setZero(C, static_cast<Eigen::Index>(batch) * H * W);
  for (int c = 0; c < C; ++c) {
    Scalar* dst = dx.data.row(c).data();
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        const Scalar* src = cols.row((static_cast<Eigen::Index>(c) * k + ky) * k + kx).data();
        const auto [lo, hi] = valid_span(W, Wo, g, kx);
        const int off = kx - g.pad;
        for (int b = 0; b < batch; ++b) {
          Scalar* img = dst + static_cast<Eigen::Index>(b) * H * W;
          for (int oy = 0; oy < Ho; ++oy) {
            const int iy = oy * s - g.pad + ky;
            if (iy < 0 || iy >= H) continue;
            const Scalar* in_row = src + (static_cast<Eigen::Index>(b) * Ho + oy) * Wo;
            Scalar* row = img + static_cast<Eigen::Index>(iy) * W + off;
            for (int ox = lo; ox < hi; ++ox) row[ox * s] += in_row[ox];
          }
        }
      }
  }
}

/// y = W * im2col(x) + b, W is (out_channels x in_channels*k*k).
template <typename Scalar>
Activation<Scalar> conv2d_forward(const Activation<Scalar>& x, const Mat<Scalar>& weight, const Mat<Scalar>& bias,
                                  const ConvGeometry& g, Mat<Scalar>& cols) {
  im2col(x, g, cols);
  Activation<Scalar> y;
  y.geom = {static_cast<int>(weight.rows()), g.out_size(x.geom.height), g.out_size(x.geom.width)};
  y.batch = x.batch;
  y.data.noalias() = weight * cols;
  y.data.colwise() += bias.col(0);
  return y;
}

/// Accumulates dW, db; returns dx.
template <typename Scalar>
Activation<Scalar> conv2d_backward(const Activation<Scalar>& dy, const Mat<Scalar>& weight, const Mat<Scalar>& cols,
                                   const Geometry& in, const ConvGeometry& g, Mat<Scalar>& dweight,
                                   Mat<Scalar>& dbias) {
  dweight.noalias() += dy.data * cols.transpose();
  dbias.col(0) += dy.data.rowwise().sum();
  const Mat<Scalar> dcols = weight.transpose() * dy.data;
  Activation<Scalar> dx;
  col2im(dcols, in, dy.batch, g, dx);
  return dx;
}

template <typename Scalar>
void relu_inplace(Activation<Scalar>& x) {
  x.data = x.data.cwiseMax(Scalar(0));
}

/// dy masked by the (post-activation) output being positive.
template <typename Scalar>
void relu_backward_inplace(Activation<Scalar>& dy, const Activation<Scalar>& y) {
  dy.data = (y.data.array() > Scalar(0)).select(dy.data, Scalar(0));
}

/// (C x B*HW) -> (C x B)
template <typename Scalar>
Mat<Scalar> global_avg_pool(const Activation<Scalar>& x) {
  const int hw = x.geom.positions();
  Mat<Scalar> out(x.geom.channels, x.batch);
  for (int b = 0; b < x.batch; ++b)
    out.col(b) = x.data.middleCols(static_cast<Eigen::Index>(b) * hw, hw).rowwise().sum() / Scalar(hw);
  return out;
}

template <typename Scalar>
Activation<Scalar> global_avg_pool_backward(const Mat<Scalar>& dpooled, const Geometry& geom, int batch) {
  const int hw = geom.positions();
  Activation<Scalar> dx;
  dx.geom = geom;
  dx.batch = batch;
  dx.data.resize(geom.channels, static_cast<Eigen::Index>(batch) * hw);
  for (int b = 0; b < batch; ++b)
    dx.data.middleCols(static_cast<Eigen::Index>(b) * hw, hw).colwise() = dpooled.col(b) / Scalar(hw);
  return dx;
}

/// Mean cross-entropy over the batch; logits are (classes x batch).
/// Writes d(loss)/d(logits) into dlogits.
template <typename Scalar>
Scalar softmax_cross_entropy(const Mat<Scalar>& logits, const std::vector<int>& labels, Mat<Scalar>& dlogits) {
  const Eigen::Index batch = logits.cols();
  dlogits.resize(logits.rows(), batch);
  Scalar loss = 0;
  for (Eigen::Index b = 0; b < batch; ++b) {
    const Scalar top = logits.col(b).maxCoeff();
    Vec<Scalar> e = (logits.col(b).array() - top).exp().matrix();
    const Scalar z = e.sum();
    loss += std::log(z) + top - logits(labels[b], b);
    dlogits.col(b) = e / z;
    dlogits(labels[b], b) -= Scalar(1);
  }
  dlogits /= Scalar(batch);
  return loss / Scalar(batch);
}

}  // namespace echoforge::nn
