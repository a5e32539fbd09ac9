#include <gtest/gtest.h>

#include "echoforge/errors.hpp"
#include "echoforge/gestures.hpp"
#include "echoforge/scene.hpp"
#include "test_util.hpp"

using namespace echoforge;
using namespace echoforge::testing;

namespace {

EchoProfile ss1_profile(const Scene& scene, std::uint64_t seed = 1) {
  const PcmStream rx = render_received(scene, speaker1_sweep(), seed);
  return build_echo_profile(segment_frames(rx, 600), generate_sweep(speaker1_sweep()).samples, EchoChannel::SS1);
}

}  // namespace

TEST(Scene, LagAndInterpolation) {
  EXPECT_EQ(round_trip_lag(0.10), 29);
  EXPECT_EQ(round_trip_lag(0.0), 0);
  Reflector r{{{0.0, 0.05}, {1.0, 0.20}}, 1.0};
  EXPECT_DOUBLE_EQ(r.distance_at(-1.0), 0.05);
  EXPECT_DOUBLE_EQ(r.distance_at(0.5), 0.125);
  EXPECT_DOUBLE_EQ(r.distance_at(2.0), 0.20);
}

TEST(Scene, DurationMustBeWholeFrames) {
  Scene s;
  s.duration = 0.12;
  EXPECT_EQ(s.frames(), 10);
  s.duration = 0.013;
  EXPECT_THROW(s.validate(), ConfigError);
  s.duration = 0.12;
  s.noise_rms = -1;
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Scene, ReflectorValidation) {
  EXPECT_THROW(Reflector({}, 1.0).validate(), ConfigError);
  EXPECT_THROW(Reflector::fixed(1.5).validate(), ConfigError);
  EXPECT_THROW(Reflector::fixed(0.1, 0.0).validate(), ConfigError);
  EXPECT_THROW((Reflector{{{0.5, 0.1}, {0.5, 0.2}}, 1.0}).validate(), ConfigError);
}

TEST(Scene, EmptySilentSceneIsZero) {
  Scene s;
  s.duration = 0.06;
  const PcmStream rx = render_received(s, speaker1_sweep(), 5);
  EXPECT_EQ(rx.size(), 3000);
  EXPECT_EQ(rx.samples.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Scene, AnalyticEchoSample) {
  // One frame, reflector at lag 29: x[i] = refl / d^2 * chirp[(i - 29) mod 600].
  Scene s;
  s.duration = 0.012;
  s.reflectors = {Reflector::fixed(0.10, 0.5)};
  const Eigen::VectorXd chirp = generate_sweep(speaker1_sweep()).samples;
  const Eigen::VectorXd x = render_received(s, speaker1_sweep(), 0).samples;
  for (int i : {0, 28, 29, 300, 599})
    EXPECT_NEAR(x[i], 0.5 / 0.01 * chirp[((i - 29) % 600 + 600) % 600], 1e-12) << i;
}

TEST(Scene, MinimumDistanceClamp) {
  Scene s;
  s.duration = 0.012;
  s.reflectors = {Reflector::fixed(0.001)};
  const double peak = render_received(s, speaker1_sweep(), 0).samples.cwiseAbs().maxCoeff();
  const double chirp_peak = generate_sweep(speaker1_sweep()).samples.cwiseAbs().maxCoeff();
  EXPECT_NEAR(peak, chirp_peak / 1e-4, 1e-6 * peak);
}

TEST(Scene, DeterministicGivenSeed) {
  Scene s;
  s.duration = 0.12;
  s.noise_rms = 0.05;
  s.reflectors = {Reflector::fixed(0.07)};
  EXPECT_EQ(render_received(s, speaker1_sweep(), 11).samples, render_received(s, speaker1_sweep(), 11).samples);
  EXPECT_NE(render_received(s, speaker1_sweep(), 11).samples, render_received(s, speaker1_sweep(), 12).samples);
}

TEST(Scene, NoiseHasRequestedRms) {
  Scene s;
  s.duration = 1.2;
  s.noise_rms = 0.02;
  EXPECT_NEAR(rms(render_received(s, speaker2_sweep(), 3).samples), 0.02, 0.001);
}

TEST(Scene, Superposition) {
  Scene a, b, ab;
  a.duration = b.duration = ab.duration = 0.24;
  a.reflectors = {Reflector{{{0.0, 0.03}, {0.2, 0.12}}, 0.7}};
  b.reflectors = {Reflector::fixed(0.18, 0.4)};
  ab.reflectors = {a.reflectors[0], b.reflectors[0]};
  const Eigen::VectorXd sum = render_received(a, speaker1_sweep(), 0).samples + render_received(b, speaker1_sweep(), 0).samples;
  const Eigen::VectorXd both = render_received(ab, speaker1_sweep(), 0).samples;
  EXPECT_LE((both - sum).cwiseAbs().maxCoeff() / sum.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Scene, DoublingDistanceWeakensPeak) {
  for (double d : {0.03, 0.05, 0.08}) {
    Scene near, far;
    near.duration = far.duration = 0.036;
    near.reflectors = {Reflector::fixed(d)};
    far.reflectors = {Reflector::fixed(2 * d)};
    EXPECT_LT(ss1_profile(far).values.col(1).maxCoeff(), ss1_profile(near).values.col(1).maxCoeff()) << d;
  }
}

TEST(Scene, StaticReflectorsLocaliseAcrossRange) {
  for (double d = 0.02; d <= 0.22; d += 0.01) {
    Scene s;
    s.duration = 0.036;
    s.reflectors = {Reflector::fixed(d)};
    const EchoProfile ep = ss1_profile(s);
    for (Eigen::Index t = 0; t < ep.frames(); ++t) {
      Eigen::Index row;
      ep.values.col(t).maxCoeff(&row);
      EXPECT_LE(std::abs(static_cast<double>(row) - std::round(d / kMetersPerBin)), 1.0) << d;
    }
  }
}

TEST(Scene, MicrophonesMixPathsByGain) {
  Scene s;
  s.duration = 0.024;
  s.reflectors = {Reflector::fixed(0.06)};
  s.channel_gains = {1.0, 0.0, 0.0, 2.0};
  const SensingConfig sensing;
  const auto mics = render_microphones(s, sensing, 0);
  EXPECT_TRUE(mics[0].samples.isApprox(render_echoes(s, sensing.speaker1)));
  EXPECT_TRUE(mics[1].samples.isApprox(2.0 * render_echoes(s, sensing.speaker2)));
}

TEST(SceneFile, RoundTripAndMissingFile) {
  const auto dir = scratch_dir("scene");
  SceneFile f;
  f.scene.duration = 0.36;
  f.scene.noise_rms = 0.01;
  f.scene.reflectors = {Reflector{{{0.0, 0.05}, {0.2, 0.07}}, 0.6}};
  f.seed = 99;
  f.label = 4;
  save_scene(dir / "s.json", f);
  const SceneFile back = load_scene(dir / "s.json");
  EXPECT_EQ(back.seed, 99u);
  EXPECT_EQ(back.label, 4);
  ASSERT_EQ(back.scene.reflectors.size(), 1u);
  EXPECT_DOUBLE_EQ(back.scene.reflectors[0].keyframes[1].d, 0.07);
  try {
    load_scene(dir / "nope.json");
    FAIL();
  } catch (const IngestError& e) {
    EXPECT_NE(std::string(e.what()).find("nope.json"), std::string::npos);
  }
}

TEST(Gestures, SixDistinctCylindricalScripts) {
  const auto scripts = builtin_scripts();
  ASSERT_EQ(scripts.size(), 6u);
  for (std::size_t i = 0; i < scripts.size(); ++i) {
    EXPECT_EQ(scripts[i].label.class_index(), static_cast<int>(i));
    for (std::size_t j = 0; j < i; ++j) {
      bool differ = false;
      for (std::size_t r = 0; r < scripts[i].reflectors.size(); ++r) {
        const auto& a = scripts[i].reflectors[r].motion;
        const auto& b = scripts[j].reflectors[r].motion;
        differ |= a.size() != b.size();
        for (std::size_t k = 0; !differ && k < a.size(); ++k) differ = a[k].t != b[k].t || a[k].d != b[k].d;
      }
      EXPECT_TRUE(differ) << i << " vs " << j;
    }
  }
}

TEST(Gestures, SetBookkeeping) {
  SynthOptions quiet;
  quiet.noise_rms = 0.0;
  const auto set = synth_gesture_set(builtin_scripts(), 2, 4, quiet);
  ASSERT_EQ(set.size(), 12u);
  for (std::size_t n = 0; n < set.size(); ++n) {
    EXPECT_TRUE(set[n].tensor.has_valid_shape());
    EXPECT_EQ(set[n].tensor.label->class_index(), static_cast<int>(n / 2));
    EXPECT_EQ(set[n].index, static_cast<int>(n % 2));
  }
}

TEST(Gestures, ZeroJitterGivesIdenticalClassTensorsAndDistinctClasses) {
  SynthOptions quiet;
  quiet.noise_rms = 0.0;
  const auto set = synth_gesture_set(with_jitter(builtin_scripts(), {}), 2, 4, quiet);
  for (std::size_t c = 0; c < 6; ++c) {
    for (int p = 0; p < 8; ++p) EXPECT_EQ(set[2 * c].tensor.planes[p], set[2 * c + 1].tensor.planes[p]);
    for (std::size_t d = 0; d < c; ++d) {
      double dist = 0;
      for (int p = 0; p < 8; ++p) dist += (set[2 * c].tensor.planes[p] - set[2 * d].tensor.planes[p]).squaredNorm();
      EXPECT_GT(dist, 0.0) << c << " vs " << d;
    }
  }
}

TEST(Gestures, HoldHasZeroDifferentialWithoutNoise) {
  SynthOptions quiet;
  quiet.noise_rms = 0.0;
  const auto set = synth_gesture_set(builtin_scripts(), 1, 2, quiet);
  for (int p = 4; p < 8; ++p) EXPECT_EQ(set[0].tensor.planes[p].cwiseAbs().maxCoeff(), 0.0f);
  for (int p = 4; p < 8; ++p) EXPECT_GT(set[1].tensor.planes[p].cwiseAbs().maxCoeff(), 0.0f);
}

TEST(Gestures, SetRejectsBadInput) {
  auto scripts = builtin_scripts();
  EXPECT_THROW(synth_gesture_set({scripts[0]}, 1, 0), ConfigError);
  EXPECT_THROW(synth_gesture_set({scripts[0], scripts[0]}, 1, 0), ConfigError);
  EXPECT_THROW(synth_gesture_set(scripts, 0, 0), ConfigError);
}

TEST(Gestures, SessionHasShuffledBalancedMarkers) {
  SessionMeta meta;
  meta.participant_id = "P01";
  meta.object_name = "bottle";
  meta.session_index = 2;
  SynthOptions o;
  const auto rec = synth_session(builtin_scripts(), meta, 2, 8, o);
  ASSERT_EQ(rec.markers.size(), 12u);
  std::array<int, 6> counts{};
  for (const auto& m : rec.markers) ++counts[m.label.class_index()];
  for (int c : counts) EXPECT_EQ(c, 2);
  for (std::size_t i = 1; i < rec.markers.size(); ++i)
    EXPECT_EQ(rec.markers[i].sample - rec.markers[i - 1].sample, 100000);
  EXPECT_EQ(rec.mics[0].size(), rec.mics[1].size());
  EXPECT_GE(rec.mics[0].size(), rec.markers.back().sample + 100000);
}
