#include <gtest/gtest.h>

#include <sstream>

#include "echoforge/eprf.hpp"
#include "echoforge/errors.hpp"
#include "echoforge/echo.hpp"
#include "echoforge/scene.hpp"
#include "test_util.hpp"

using namespace echoforge;
using namespace echoforge::testing;

namespace {

Eigen::VectorXd rotate(const Eigen::VectorXd& x, int k) {
  Eigen::VectorXd y(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) y[(i + k) % x.size()] = x[i];
  return y;
}

EchoProfile random_profile(Eigen::Index bins, Eigen::Index frames, EchoChannel ch, unsigned seed) {
  std::srand(seed);
  return EchoProfile{Eigen::MatrixXd::Random(bins, frames), ch};
}

}  // namespace

TEST(Correlate, MatchesDirectSum) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd a(600), b(600);
    for (int i = 0; i < 600; ++i) {
      a[i] = n01(rng);
      b[i] = n01(rng);
    }
    const Eigen::VectorXd direct = direct_correlation(a, b);
    EXPECT_LE((cross_correlate(a, b) - direct).cwiseAbs().maxCoeff() / direct.cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Correlate, AutocorrelationPeaksAtZero) {
  const Eigen::VectorXd ref = generate_sweep(speaker1_sweep()).samples;
  Eigen::Index lag;
  cross_correlate(ref, ref).maxCoeff(&lag);
  EXPECT_EQ(lag, 0);
}

TEST(Correlate, DelayOf29SamplesPeaksAt29) {
  const Eigen::VectorXd ref = generate_sweep(speaker2_sweep()).samples;
  Eigen::Index lag;
  cross_correlate(rotate(ref, 29), ref).maxCoeff(&lag);
  EXPECT_EQ(lag, 29);
}

TEST(Correlate, ShiftCovariance) {
  const Eigen::VectorXd ref = generate_sweep(speaker1_sweep()).samples;
  const Eigen::VectorXd frame = rotate(ref, 40);
  for (int k : {1, 7, 100, 599}) {
    Eigen::Index a, b;
    cross_correlate(frame, ref).maxCoeff(&a);
    cross_correlate(rotate(frame, k), ref).maxCoeff(&b);
    EXPECT_EQ(b, (a + k) % 600) << k;
  }
}

TEST(Correlate, ZerosGiveZeros) {
  const Eigen::VectorXd ref = generate_sweep(speaker1_sweep()).samples;
  EXPECT_EQ(cross_correlate(Eigen::VectorXd::Zero(600), ref).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Correlate, LengthMismatchThrows) {
  EXPECT_THROW(cross_correlate(Eigen::VectorXd::Zero(599), Eigen::VectorXd::Zero(600)), ShapeError);
}

TEST(Distance, BinScale) {
  EXPECT_NEAR(kMetersPerBin, 0.00343, 1e-12);
  EXPECT_NEAR(kSecondsPerFrame, 0.012, 1e-15);
  EXPECT_NEAR(70 * kMetersPerBin, 0.2401, 1e-9);
  EXPECT_EQ(distance_to_bin(0.10), 29);
  EXPECT_EQ(distance_to_bin(0.05), 15);
  EXPECT_EQ(distance_to_bin(0.20), 58);
}

TEST(Profile, ColumnsAreCorrelations) {
  const Eigen::VectorXd ref = generate_sweep(speaker1_sweep()).samples;
  std::vector<Eigen::VectorXd> frames{rotate(ref, 3), rotate(ref, 10), Eigen::VectorXd::Zero(600)};
  const EchoProfile ep = build_echo_profile(frames, ref, EchoChannel::DS2);
  EXPECT_EQ(ep.bins(), 600);
  EXPECT_EQ(ep.frames(), 3);
  EXPECT_EQ(ep.channel, EchoChannel::DS2);
  for (int t = 0; t < 3; ++t) {
    const Eigen::VectorXd d = direct_correlation(frames[t], ref);
    EXPECT_LE((ep.values.col(t) - d).cwiseAbs().maxCoeff(), 1e-9);
  }
  EXPECT_THROW(build_echo_profile({}, ref, EchoChannel::SS1), ShapeError);
}

TEST(Profile, SimulatedReflectorAtTenCentimetres) {
  Scene scene;
  scene.reflectors = {Reflector::fixed(0.10)};
  scene.duration = 0.12;
  const PcmStream rx = render_received(scene, speaker1_sweep(), 1);
  const auto frames = segment_frames(rx, 600);
  const EchoProfile ep = build_echo_profile(frames, generate_sweep(speaker1_sweep()).samples, EchoChannel::SS1);
  for (Eigen::Index t = 0; t < ep.frames(); ++t) {
    Eigen::Index row;
    ep.values.col(t).maxCoeff(&row);
    EXPECT_NEAR(static_cast<double>(row), 29.0, 1.0);
  }
}

TEST(Profile, LoopbackPeaksAtRowZero) {
  Scene scene;
  scene.reflectors = {Reflector::fixed(0.0)};
  scene.duration = 0.06;
  const PcmStream rx = render_received(scene, speaker2_sweep(), 1);
  const EchoProfile ep =
      build_echo_profile(segment_frames(rx, 600), generate_sweep(speaker2_sweep()).samples, EchoChannel::SS2);
  for (Eigen::Index t = 0; t < ep.frames(); ++t) {
    Eigen::Index row;
    ep.values.col(t).maxCoeff(&row);
    EXPECT_EQ(row, 0);
  }
}

TEST(Profile, TwoReflectorsGiveTwoPeaks) {
  Scene scene;
  scene.reflectors = {Reflector::fixed(0.05), Reflector::fixed(0.20)};
  scene.duration = 0.036;
  const PcmStream rx = render_received(scene, speaker1_sweep(), 1);
  const EchoProfile ep =
      build_echo_profile(segment_frames(rx, 600), generate_sweep(speaker1_sweep()).samples, EchoChannel::SS1);
  // Each expected row is a local maximum of the magnitude over one carrier
  // period (about 2.5 samples) either side.
  const Eigen::VectorXd mag = ep.values.col(1).cwiseAbs();
  const auto local_peak_near = [&](Eigen::Index expected) {
    for (Eigen::Index r = expected - 1; r <= expected + 1; ++r)
      if (mag[r] == mag.segment(r - 2, 5).maxCoeff()) return true;
    return false;
  };
  EXPECT_TRUE(local_peak_near(15));
  EXPECT_TRUE(local_peak_near(58));
  Eigen::Index strongest;
  mag.maxCoeff(&strongest);
  EXPECT_NEAR(static_cast<double>(strongest), 15.0, 1.0);

  // The far peak is the far echo itself, not a sidelobe of the near one.
  Scene far = scene;
  far.reflectors = {Reflector::fixed(0.20)};
  const EchoProfile alone = build_echo_profile(segment_frames(render_received(far, speaker1_sweep(), 1), 600),
                                               generate_sweep(speaker1_sweep()).samples, EchoChannel::SS1);
  EXPECT_NEAR(ep.values(58, 1), alone.values(58, 1), 0.01 * std::abs(alone.values(58, 1)));
}

TEST(Differential, ConstantColumnsGiveZero) {
  EchoProfile ep{Eigen::MatrixXd::Ones(5, 1) * Eigen::RowVectorXd::Constant(7, 3.0), EchoChannel::SS1};
  ep.values.col(0).setConstant(3.0);
  const EchoProfile d = differential_profile(ep);
  EXPECT_EQ(d.values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Differential, RampGivesOnes) {
  EchoProfile ep{Eigen::MatrixXd(4, 6), EchoChannel::DS1};
  for (int t = 0; t < 6; ++t) ep.values.col(t).setConstant(t);
  const EchoProfile d = differential_profile(ep);
  EXPECT_EQ(d.values.col(0).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_TRUE((d.values.rightCols(5).array() == 1.0).all());
  EXPECT_EQ(d.channel, EchoChannel::DS1);
}

TEST(Differential, SingleColumnThrows) {
  EXPECT_THROW(differential_profile(EchoProfile{Eigen::MatrixXd::Zero(3, 1)}), ShapeError);
}

TEST(Crop, TopLeftBlock) {
  const EchoProfile ep = random_profile(120, 200, EchoChannel::SS2, 1);
  const EchoProfile c = crop_window(ep, 0, 70, 0, 155);
  EXPECT_EQ(c.values, ep.values.topLeftCorner(70, 155));
  EXPECT_EQ(c.channel, EchoChannel::SS2);
}

TEST(Crop, OutOfBoundsReportsOverhang) {
  const EchoProfile ep = random_profile(80, 200, EchoChannel::SS1, 2);
  try {
    crop_window(ep, 50, 70, 0, 155);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("40"), std::string::npos) << e.what();
  }
  EXPECT_THROW(crop_window(ep, 0, 70, 100, 155), ShapeError);
}

TEST(Crop, Composes) {
  const EchoProfile ep = random_profile(120, 200, EchoChannel::SS1, 3);
  const EchoProfile twice = crop_window(crop_window(ep, 5, 100, 10, 180), 7, 70, 3, 155);
  EXPECT_EQ(twice.values, crop_window(ep, 12, 70, 13, 155).values);
}

namespace {

std::array<EchoProfile, 4> four(Eigen::Index bins, Eigen::Index frames, unsigned seed) {
  std::array<EchoProfile, 4> out;
  for (int c = 0; c < 4; ++c) out[c] = random_profile(bins, frames, static_cast<EchoChannel>(c), seed + c);
  return out;
}

}  // namespace

TEST(Stack, ShapeAndRoundTrip) {
  const auto p = four(70, 155, 10);
  const auto d = four(70, 155, 20);
  const EchoTensor t = stack_tensor(p, d);
  EXPECT_TRUE(t.has_valid_shape());
  const auto back = unstack_tensor(t);
  for (int c = 0; c < 4; ++c) {
    EXPECT_TRUE(back[c].values.isApprox(p[c].values.cast<float>().cast<double>()));
    EXPECT_TRUE(back[c + 4].values.isApprox(d[c].values.cast<float>().cast<double>()));
  }
  EXPECT_FLOAT_EQ(t.at(3, 5, 6), static_cast<float>(d[2].values(5, 3)));
}

TEST(Stack, WrongShapeOrOrderThrows) {
  auto p = four(70, 155, 1);
  const auto d = four(70, 155, 5);
  auto bad = p;
  bad[1] = random_profile(69, 155, EchoChannel::DS1, 9);
  EXPECT_THROW(stack_tensor(bad, d), ShapeError);
  std::swap(p[0], p[1]);
  EXPECT_THROW(stack_tensor(p, d), ShapeError);
}

TEST(Eprf, RecordRoundTripAndLayout) {
  const EchoProfile ep = random_profile(3, 4, EchoChannel::DS2, 4);
  std::stringstream ss;
  eprf::write(ss, ep, 6);
  const std::string bytes = ss.str();
  ASSERT_EQ(bytes.size(), 4u + 2 + 1 + 4 + 4 + 12 * 4);
  EXPECT_EQ(bytes.substr(0, 4), "EPRF");
  EXPECT_EQ(static_cast<unsigned char>(bytes[6]), 6);
  float first;
  std::memcpy(&first, bytes.data() + 15, 4);
  EXPECT_EQ(first, static_cast<float>(ep.values(0, 0)));
  float second;
  std::memcpy(&second, bytes.data() + 19, 4);
  EXPECT_EQ(second, static_cast<float>(ep.values(0, 1)));  // row-major
  const auto [back, code] = eprf::read(ss);
  EXPECT_EQ(code, 6);
  EXPECT_TRUE(back.values.isApprox(ep.values.cast<float>().cast<double>()));
}

TEST(Eprf, TensorFileRoundTrip) {
  const auto dir = scratch_dir("eprf");
  const EchoTensor t = stack_tensor(four(70, 155, 30), four(70, 155, 40));
  eprf::save_tensor(dir / "t.eprf", t);
  const EchoTensor back = eprf::load_tensor(dir / "t.eprf");
  for (int c = 0; c < 8; ++c) EXPECT_EQ(back.planes[c], t.planes[c]);
}

TEST(Eprf, CorruptInputThrows) {
  std::stringstream bad("EPRX\x01\x00");
  EXPECT_THROW(eprf::read(bad), IngestError);
  const EchoProfile ep = random_profile(3, 4, EchoChannel::SS1, 4);
  std::stringstream ss;
  eprf::write(ss, ep, 0);
  std::stringstream cut(ss.str().substr(0, 20));
  EXPECT_THROW(eprf::read(cut), IngestError);
}
