#include "echoforge/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "echoforge/errors.hpp"
#include "echoforge/rng.hpp"

namespace echoforge {

using nlohmann::json;

double Reflector::distance_at(double t) const {
  if (keyframes.empty()) throw ConfigError("reflector has no keyframes");
  if (t <= keyframes.front().t) return keyframes.front().d;
  if (t >= keyframes.back().t) return keyframes.back().d;
  const auto hi = std::upper_bound(keyframes.begin(), keyframes.end(), t,
                                   [](double v, const Keyframe& k) { return v < k.t; });
  const auto lo = hi - 1;
  const double f = (t - lo->t) / (hi->t - lo->t);
  return lo->d + f * (hi->d - lo->d);
}

void Reflector::validate() const {
  if (keyframes.empty()) throw ConfigError("reflector has no keyframes");
  if (!(reflectivity > 0.0 && reflectivity <= 1.0)) throw ConfigError("reflectivity must be in (0, 1]");
  for (std::size_t i = 0; i < keyframes.size(); ++i) {
    if (!(keyframes[i].d >= 0.0 && keyframes[i].d <= 1.0))
      throw ConfigError("reflector distance " + std::to_string(keyframes[i].d) + " m outside [0, 1] m");
    if (i > 0 && !(keyframes[i].t > keyframes[i - 1].t))
      throw ConfigError("reflector keyframe times must be strictly increasing");
  }
}

Reflector Reflector::fixed(double distance, double reflectivity) {
  return Reflector{{Keyframe{0.0, distance}}, reflectivity};
}

int Scene::frames() const {
  const double n = duration / kSecondsPerFrame;
  const double rounded = std::round(n);
  if (std::abs(n - rounded) > 1e-6 || rounded < 1.0) {
    std::ostringstream msg;
    msg << "scene duration " << duration << " s is not a whole number of 12 ms frames";
    throw ConfigError(msg.str());
  }
  return static_cast<int>(rounded);
}

void Scene::validate() const {
  frames();
  if (!(noise_rms >= 0.0) || !std::isfinite(noise_rms)) throw ConfigError("noise_rms must be >= 0");
  for (const auto& r : reflectors) r.validate();
  for (double g : channel_gains)
    if (!std::isfinite(g)) throw ConfigError("channel gains must be finite");
}

int round_trip_lag(double distance, double sample_rate) {
  return static_cast<int>(std::lround(2.0 * distance * sample_rate / kSpeedOfSound));
}

Eigen::VectorXd render_echoes(const Scene& scene, const SweepConfig& sweep, double gain) {
  scene.validate();
  const Eigen::VectorXd chirp = generate_sweep(sweep).samples;
  const Eigen::Index n = chirp.size();
  const int frames = scene.frames();
  if (n != kSweepSamples) throw ConfigError("scene rendering assumes 12 ms sweeps at 50 kHz");

  Eigen::VectorXd out = Eigen::VectorXd::Zero(n * frames);
  for (int f = 0; f < frames; ++f) {
    const double t_mid = (f + 0.5) * kSecondsPerFrame;
    auto frame = out.segment(f * n, n);
    for (const auto& r : scene.reflectors) {
      const double d = r.distance_at(t_mid);
      const double amp = gain * r.reflectivity / std::pow(std::max(d, kMinReflectorDistance), 2);
      const Eigen::Index lag = round_trip_lag(d) % n;
      // frame[i] += amp * chirp[(i - lag) mod n]
      frame.tail(n - lag) += amp * chirp.head(n - lag);
      frame.head(lag) += amp * chirp.tail(lag);
    }
  }
  return out;
}

namespace {

void add_noise(Eigen::VectorXd& x, double rms, std::uint64_t seed) {
  if (rms <= 0.0) return;
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, rms);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += normal(rng);
}

}  // namespace

PcmStream render_received(const Scene& scene, const SweepConfig& sweep, std::uint64_t seed) {
  PcmStream s;
  s.samples = render_echoes(scene, sweep);
  add_noise(s.samples, scene.noise_rms, derive_seed(seed, 0));
  return s;
}

std::array<PcmStream, 2> render_microphones(const Scene& scene, const SensingConfig& sensing, std::uint64_t seed) {
  const auto& g = scene.channel_gains;
  const Eigen::VectorXd s1 = render_echoes(scene, sensing.speaker1);
  const Eigen::VectorXd s2 = render_echoes(scene, sensing.speaker2);
  std::array<PcmStream, 2> mics;
  mics[0].channel_id = MicId::Mic1;
  mics[0].samples = g[0] * s1 + g[1] * s2;
  mics[1].channel_id = MicId::Mic2;
  mics[1].samples = g[2] * s1 + g[3] * s2;
  add_noise(mics[0].samples, scene.noise_rms, derive_seed(seed, 0));
  add_noise(mics[1].samples, scene.noise_rms, derive_seed(seed, 1));
  return mics;
}

SceneFile load_scene(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IngestError("cannot open scene file " + path.string());
  json j;
  try {
    is >> j;
    SceneFile out;
    out.scene.duration = j.at("duration").get<double>();
    out.scene.noise_rms = j.value("noise_rms", 0.0);
    out.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("channel_gains")) out.scene.channel_gains = j.at("channel_gains").get<std::array<double, 4>>();
    if (j.contains("label")) out.label = j.at("label").get<int>();
    for (const auto& jr : j.at("reflectors")) {
      Reflector r;
      r.reflectivity = jr.value("reflectivity", 1.0);
      for (const auto& k : jr.at("keyframes")) r.keyframes.push_back({k.at("t").get<double>(), k.at("d").get<double>()});
      out.scene.reflectors.push_back(std::move(r));
    }
    out.scene.validate();
    return out;
  } catch (const json::exception& e) {
    throw IngestError(path.string() + ": invalid scene file: " + e.what());
  }
}

void save_scene(const std::filesystem::path& path, const SceneFile& file) {
  json j;
  j["duration"] = file.scene.duration;
  j["noise_rms"] = file.scene.noise_rms;
  j["seed"] = file.seed;
  j["channel_gains"] = file.scene.channel_gains;
  if (file.label) j["label"] = *file.label;
  j["reflectors"] = json::array();
  for (const auto& r : file.scene.reflectors) {
    json jr;
    jr["reflectivity"] = r.reflectivity;
    jr["keyframes"] = json::array();
    for (const auto& k : r.keyframes) jr["keyframes"].push_back({{"t", k.t}, {"d", k.d}});
    j["reflectors"].push_back(std::move(jr));
  }
  std::ofstream os(path);
  if (!os) throw IngestError("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

}  // namespace echoforge
