#include "echoforge/gestures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "echoforge/errors.hpp"
#include "echoforge/parallel.hpp"
#include "echoforge/rng.hpp"

namespace echoforge {

namespace {

constexpr double kPalm = 0.035;
constexpr double kPointer = 0.07;
constexpr double kMiddle = 0.095;
constexpr double kObject = 0.15;

std::vector<ReflectorTemplate> hand() {
  return {{"palm", kPalm, 0.8, {}}, {"pointer", kPointer, 0.6, {}}, {"middle", kMiddle, 0.6, {}},
          {"object", kObject, 0.5, {}}};
}

SyntheticGestureScript script(int gesture) {
  SyntheticGestureScript s;
  s.label = GestureLabel::from_parts(Grasp::Cylindrical, gesture);
  s.reflectors = hand();
  s.onset = 0.4;
  s.jitter = {0.003, 0.1, 0.15};
  return s;
}

}  // namespace

std::vector<SyntheticGestureScript> builtin_scripts() {
  std::vector<SyntheticGestureScript> out;

  out.push_back(script(0));  // Hold

  auto pointer_in = script(1);
  pointer_in.reflectors[1].motion = {{0.0, 0.0}, {0.4, -0.04}, {0.55, -0.04}, {0.95, 0.0}};
  out.push_back(pointer_in);

  auto pointer_tap = script(2);
  pointer_tap.reflectors[1].motion = {{0.0, 0.0}, {0.1, 0.02}, {0.2, 0.0}};
  out.push_back(pointer_tap);

  auto middle_tap = script(3);
  middle_tap.reflectors[2].motion = {{0.0, 0.0}, {0.1, 0.02}, {0.2, 0.0}};
  out.push_back(middle_tap);

  auto wrist_right = script(4);
  for (auto& r : wrist_right.reflectors) r.motion = {{0.0, 0.0}, {0.3, 0.015}, {0.7, 0.015}, {1.0, 0.0}};
  out.push_back(wrist_right);

  auto wrist_left = script(5);
  for (auto& r : wrist_left.reflectors) r.motion = {{0.0, 0.0}, {0.3, -0.012}, {0.7, -0.012}, {1.0, 0.0}};
  out.push_back(wrist_left);

  return out;
}

std::vector<SyntheticGestureScript> with_jitter(std::vector<SyntheticGestureScript> scripts, ScriptJitter jitter) {
  for (auto& s : scripts) s.jitter = jitter;
  return scripts;
}

std::vector<Reflector> realise_script(const SyntheticGestureScript& script, const SynthOptions& opts,
                                      double window_start, double window_end, std::uint64_t seed) {
  Rng rng(seed);
  const auto& j = script.jitter;
  const double speed = 1.0 + uniform(rng, -j.speed, j.speed);
  const double onset = window_start + script.onset + uniform(rng, -j.onset, j.onset);

  std::vector<Reflector> out;
  out.reserve(script.reflectors.size());
  for (std::size_t i = 0; i < script.reflectors.size(); ++i) {
    const auto& tpl = script.reflectors[i];
    const double role = i < opts.role_offsets.size() ? opts.role_offsets[i] : 0.0;
    const double base = tpl.base_distance + opts.distance_offset + role + uniform(rng, -j.distance, j.distance);
    const auto clamp_d = [](double d) { return std::clamp(d, 0.0, 1.0); };

    Reflector r;
    r.reflectivity = tpl.reflectivity;
    r.keyframes.push_back({window_start, clamp_d(base)});
    for (const auto& k : tpl.motion) {
      const double t = onset + k.t / speed;
      if (t <= r.keyframes.back().t || t >= window_end) continue;
      r.keyframes.push_back({t, clamp_d(base + k.d)});
    }
    r.keyframes.push_back({window_end, clamp_d(base)});
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SyntheticInstance> synth_gesture_set(const std::vector<SyntheticGestureScript>& scripts, int n_per_class,
                                                 std::uint64_t seed, const SynthOptions& opts) {
  if (scripts.size() < 2) throw ConfigError("synth_gesture_set: need at least 2 scripts");
  if (n_per_class < 1) throw ConfigError("synth_gesture_set: n_per_class must be >= 1");
  std::set<int> labels;
  for (const auto& s : scripts)
    if (!labels.insert(s.label.class_index()).second)
      throw ConfigError("synth_gesture_set: duplicate script label " + s.label.name());

  const EchoPipeline pipeline(opts.sensing);
  const int total_frames = EchoTensor::kFrames + 2;
  const double window_start = kSecondsPerFrame;
  const double window_end = window_start + EchoTensor::kFrames * kSecondsPerFrame;

  std::vector<SyntheticInstance> out(scripts.size() * static_cast<std::size_t>(n_per_class));
  parallel_for(out.size(), [&](std::size_t n) {
    const auto& script = scripts[n / n_per_class];
    const std::uint64_t instance_seed = derive_seed(seed, n);
    Scene scene;
    scene.duration = total_frames * kSecondsPerFrame;
    scene.noise_rms = opts.noise_rms;
    scene.channel_gains = opts.channel_gains;
    scene.reflectors = realise_script(script, opts, window_start, window_end, instance_seed);
    const auto mics = render_microphones(scene, opts.sensing, derive_seed(instance_seed, 1));
    SyntheticInstance inst;
    inst.tensor = pipeline.tensor(pipeline.profiles(mics[0], mics[1]), 1);
    inst.tensor.label = script.label;
    inst.seed = instance_seed;
    inst.index = static_cast<int>(n % n_per_class);
    out[n] = std::move(inst);
  });
  return out;
}

SessionRecording synth_session(const std::vector<SyntheticGestureScript>& scripts, const SessionMeta& meta,
                               int repetitions, std::uint64_t seed, const SynthOptions& opts) {
  if (scripts.empty()) throw ConfigError("synth_session: no scripts");
  const std::size_t roles = scripts.front().reflectors.size();
  for (const auto& s : scripts) {
    if (s.reflectors.size() != roles) throw ConfigError("synth_session: scripts must share one reflector layout");
    if (s.label.grasp() != meta.grasp) throw ConfigError("synth_session: script grasp differs from session grasp");
  }
  meta.validate();

  struct Slot {
    std::size_t script;
    int repetition;
  };
  std::vector<Slot> order;
  for (int rep = 1; rep <= repetitions; ++rep) {
    std::vector<Slot> block;
    for (std::size_t s = 0; s < scripts.size(); ++s) block.push_back({s, rep});
    Rng shuffle_rng(derive_seed(seed, 1000 + rep));
    for (std::size_t i = block.size(); i > 1; --i) std::swap(block[i - 1], block[shuffle_rng() % i]);
    order.insert(order.end(), block.begin(), block.end());
  }

  const double lead = 0.5;
  const double total = lead + kCueWindowSeconds * static_cast<double>(order.size()) + lead;
  Scene scene;
  scene.duration = std::ceil(total / kSecondsPerFrame - 1e-9) * kSecondsPerFrame;
  scene.noise_rms = opts.noise_rms;
  scene.channel_gains = opts.channel_gains;
  scene.reflectors.resize(roles);
  for (std::size_t r = 0; r < roles; ++r) scene.reflectors[r].reflectivity = scripts.front().reflectors[r].reflectivity;

  SessionRecording rec;
  rec.meta = meta;
  for (std::size_t w = 0; w < order.size(); ++w) {
    const double cue = lead + kCueWindowSeconds * static_cast<double>(w);
    const double start = cue + kWindowOffsetSeconds;
    const double end = start + EchoTensor::kFrames * kSecondsPerFrame;
    const auto parts = realise_script(scripts[order[w].script], opts, start, end, derive_seed(seed, w));
    for (std::size_t r = 0; r < roles; ++r) {
      auto& kf = scene.reflectors[r].keyframes;
      for (const auto& k : parts[r].keyframes)
        if (kf.empty() || k.t > kf.back().t) kf.push_back(k);
    }
    rec.markers.push_back(
        {static_cast<std::int64_t>(std::llround(cue * kSampleRate)), scripts[order[w].script].label, order[w].repetition});
  }
  auto mics = render_microphones(scene, opts.sensing, derive_seed(seed, 7777));
  rec.mics = std::move(mics);
  return rec;
}

SynthOptions participant_options(std::uint64_t participant_seed, double spread) {
  Rng rng(participant_seed);
  SynthOptions o;
  o.distance_offset = uniform(rng, -spread, spread);
  o.role_offsets.resize(4);
  for (auto& r : o.role_offsets) r = uniform(rng, -spread, spread);
  for (auto& g : o.channel_gains) g *= uniform(rng, 0.8, 1.2);
  return o;
}

SynthOptions session_options(const SynthOptions& participant, std::uint64_t session_seed, double spread) {
  Rng rng(session_seed);
  SynthOptions o = participant;
  o.distance_offset += uniform(rng, -spread, spread);
  for (auto& g : o.channel_gains) g *= uniform(rng, 0.95, 1.05);
  return o;
}

}  // namespace echoforge
