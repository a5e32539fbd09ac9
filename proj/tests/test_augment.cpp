#include <gtest/gtest.h>

#include "echoforge/augment.hpp"
#include "echoforge/errors.hpp"

using namespace echoforge;

namespace {

EchoTensor ramp_tensor() {
  EchoTensor t = EchoTensor::zeros();
  for (int c = 0; c < EchoTensor::kChannels; ++c)
    for (int b = 0; b < EchoTensor::kBins; ++b)
      for (int f = 0; f < EchoTensor::kFrames; ++f) t.at(f, b, c) = static_cast<float>(1 + c * 100000 + b * 1000 + f);
  t.label = GestureLabel::from_index(4);
  return t;
}

}  // namespace

TEST(Shift, ZeroIsIdentity) {
  const EchoTensor t = ramp_tensor();
  const EchoTensor s = vertical_shift(t, 0);
  for (int c = 0; c < 8; ++c) EXPECT_EQ(s.planes[c], t.planes[c]);
  EXPECT_EQ(s.label, t.label);
}

TEST(Shift, RowMovesByK) {
  const EchoTensor t = ramp_tensor();
  const EchoTensor s = vertical_shift(t, 3);
  for (int c = 0; c < 8; ++c)
    for (int f = 0; f < EchoTensor::kFrames; ++f) {
      for (int r = 0; r < 3; ++r) EXPECT_EQ(s.at(f, r, c), 0.0f);
      for (int r = 3; r < EchoTensor::kBins; ++r) ASSERT_EQ(s.at(f, r, c), t.at(f, r - 3, c));
    }
  const EchoTensor n = vertical_shift(t, -2);
  for (int r = 0; r < EchoTensor::kBins - 2; ++r) EXPECT_EQ(n.at(7, r, 5), t.at(7, r + 2, 5));
  EXPECT_EQ(n.at(7, 68, 5), 0.0f);
  EXPECT_EQ(n.at(7, 69, 5), 0.0f);
}

TEST(Shift, ThereAndBackKeepsInterior) {
  const EchoTensor t = ramp_tensor();
  const EchoTensor back = vertical_shift(vertical_shift(t, 6), -6);
  for (int c = 0; c < 8; ++c) {
    EXPECT_EQ(back.planes[c].topRows(64), t.planes[c].topRows(64));
    EXPECT_TRUE(back.planes[c].bottomRows(6).isZero());
  }
}

TEST(Shift, RejectsLargeShift) {
  const EchoTensor t = ramp_tensor();
  EXPECT_THROW(vertical_shift(t, 7), ConfigError);
  EXPECT_THROW(vertical_shift(t, -7), ConfigError);
  EXPECT_NO_THROW(vertical_shift(t, 7, 10));
}

TEST(Jitter, FactorsStayInRange) {
  const EchoTensor t = ramp_tensor();
  AugmentPolicy p;
  p.jitter_prob = 1.0;
  Rng rng(11);
  const EchoTensor j = amplitude_jitter(t, p, rng);
  double lo = 10, hi = 0;
  for (int c = 0; c < 8; ++c) {
    const Eigen::ArrayXXf ratio = j.planes[c].array() / t.planes[c].array();
    lo = std::min(lo, static_cast<double>(ratio.minCoeff()));
    hi = std::max(hi, static_cast<double>(ratio.maxCoeff()));
  }
  // Ratios are recovered through float32 rounding of both operands.
  EXPECT_GE(lo, 0.95 - 1e-6);
  EXPECT_LE(hi, 1.05 + 1e-6);
  EXPECT_LT(lo, 0.951);
  EXPECT_GT(hi, 1.049);
}

TEST(Jitter, ProbabilityZeroIsIdentity) {
  const EchoTensor t = ramp_tensor();
  AugmentPolicy p;
  p.jitter_prob = 0.0;
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const EchoTensor j = amplitude_jitter(t, p, rng);
    for (int c = 0; c < 8; ++c) ASSERT_EQ(j.planes[c], t.planes[c]);
  }
}

TEST(Jitter, ApplicationRateFollowsProbability) {
  const EchoTensor t = ramp_tensor();
  AugmentPolicy p;
  Rng rng(13);
  int changed = 0;
  const int trials = 400;
  for (int trial = 0; trial < trials; ++trial)
    if (amplitude_jitter(t, p, rng).planes[0] != t.planes[0]) ++changed;
  EXPECT_NEAR(changed / static_cast<double>(trials), 0.8, 0.06);
}

TEST(Augment, ZeroTensorStaysZero) {
  AugmentPolicy p;
  p.jitter_prob = 1.0;
  Rng rng(14);
  const EchoTensor z = EchoTensor::zeros();
  for (int trial = 0; trial < 10; ++trial) {
    const EchoTensor a = augment(z, p, rng);
    for (int c = 0; c < 8; ++c) ASSERT_TRUE(a.planes[c].isZero(0));
  }
}

TEST(Augment, SeededDrawsRepeat) {
  const EchoTensor t = ramp_tensor();
  AugmentPolicy p;
  Rng a(15), b(15);
  for (int trial = 0; trial < 5; ++trial) {
    const EchoTensor x = augment(t, p, a), y = augment(t, p, b);
    for (int c = 0; c < 8; ++c) ASSERT_EQ(x.planes[c], y.planes[c]);
  }
}

TEST(Augment, PolicyValidation) {
  AugmentPolicy p;
  p.jitter_prob = 1.5;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.jitter_low = 1.1;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.max_shift = -1;
  EXPECT_THROW(p.validate(), ConfigError);
}
