#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "echoforge/echo.hpp"
#include "echoforge/labels.hpp"
#include "echoforge/signal.hpp"

namespace echoforge {

struct Keyframe {
  double t = 0.0;  // seconds
  double d = 0.0;  // metres, one-way sensor-to-reflector distance
};

/// Point reflector on a piecewise-linear trajectory (held constant outside
/// the keyframe span).
struct Reflector {
  std::vector<Keyframe> keyframes;
  double reflectivity = 1.0;

  double distance_at(double t) const;
  void validate() const;

  static Reflector fixed(double distance, double reflectivity = 1.0);
};

struct Scene {
  std::vector<Reflector> reflectors;
  double noise_rms = 0.0;
  double duration = 0.012 * 10;
  /// Gain per propagation path, ordered SS1, DS1, DS2, SS2.
  std::array<double, 4> channel_gains{1.0, 1.0, 1.0, 1.0};

  int frames() const;
  void validate() const;
};

inline constexpr double kMinReflectorDistance = 0.01;

/// Round-trip lag in whole samples for a one-way distance.
int round_trip_lag(double distance, double sample_rate = kSampleRate);

/// Noise-free echoes of one speaker's sweep train: per frame, every reflector
/// adds reflectivity / max(d, 1 cm)^2 times the sweep circularly delayed by
/// its round-trip lag, with d sampled at the frame midpoint.
Eigen::VectorXd render_echoes(const Scene& scene, const SweepConfig& sweep, double gain = 1.0);

/// Single speaker path plus white Gaussian noise of scene.noise_rms.
PcmStream render_received(const Scene& scene, const SweepConfig& sweep, std::uint64_t seed);

/// Both microphones, each hearing both speakers through the four path gains.
std::array<PcmStream, 2> render_microphones(const Scene& scene, const SensingConfig& sensing, std::uint64_t seed);

/// Scene file: {"duration", "noise_rms", "seed", "channel_gains", "label",
///  "reflectors": [{"reflectivity", "keyframes": [{"t", "d"}]}]}
struct SceneFile {
  Scene scene;
  std::uint64_t seed = 0;
  std::optional<int> label;
};

SceneFile load_scene(const std::filesystem::path& path);
void save_scene(const std::filesystem::path& path, const SceneFile& file);

}  // namespace echoforge
