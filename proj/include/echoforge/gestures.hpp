#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "echoforge/dataset.hpp"
#include "echoforge/echo.hpp"
#include "echoforge/scene.hpp"

namespace echoforge {

/// One body part in a gesture script. Motion keyframes are offsets (metres)
/// from base_distance at times (seconds) relative to gesture onset.
struct ReflectorTemplate {
  std::string role;
  double base_distance = 0.05;
  double reflectivity = 0.5;
  std::vector<Keyframe> motion;
};

struct ScriptJitter {
  double distance = 0.0;  // +/- metres on every base distance
  double speed = 0.0;     // +/- relative change of motion speed
  double onset = 0.0;     // +/- seconds on the onset time
};

struct SyntheticGestureScript {
  GestureLabel label = GestureLabel::from_index(0);
  std::vector<ReflectorTemplate> reflectors;
  double onset = 0.5;  // seconds after the model-window start
  ScriptJitter jitter;
};

/// The six Cylindrical-grasp stand-ins: Hold (static), PointerIn (4 cm slide
/// in and back), PointerTap and MiddleTap (2 cm out-and-back in 200 ms on
/// different fingers), WristRight / WristLeft (whole-hand shift).
std::vector<SyntheticGestureScript> builtin_scripts();

/// Sets every script's jitter to the given values.
std::vector<SyntheticGestureScript> with_jitter(std::vector<SyntheticGestureScript> scripts, ScriptJitter jitter);

/// Per-"participant" / per-"session" perturbations of the hand geometry.
struct SynthOptions {
  double noise_rms = 0.01;
  double distance_offset = 0.0;  // added to every reflector
  /// Extra offset per reflector role (e.g. longer fingers); matched by index
  /// to the script's reflector list.
  std::vector<double> role_offsets;
  std::array<double, 4> channel_gains{1.0, 0.6, 0.6, 1.0};
  SensingConfig sensing;
};

struct SyntheticInstance {
  EchoTensor tensor;  // labelled
  std::uint64_t seed = 0;
  int index = 0;  // position within its class, 0-based
};

/// Realises the scripts' reflectors for one instance as absolute-time
/// trajectories whose model window begins at window_start.
std::vector<Reflector> realise_script(const SyntheticGestureScript& script, const SynthOptions& opts,
                                      double window_start, double window_end, std::uint64_t seed);

/// Renders each script n_per_class times (class-major order), with a guard
/// frame either side of the 155-frame window.
std::vector<SyntheticInstance> synth_gesture_set(const std::vector<SyntheticGestureScript>& scripts, int n_per_class,
                                                 std::uint64_t seed, const SynthOptions& opts = {});

/// One continuous session recording: every script performed `repetitions`
/// times in shuffled order, one per 2 s cue window, with markers.
SessionRecording synth_session(const std::vector<SyntheticGestureScript>& scripts, const SessionMeta& meta,
                               int repetitions, std::uint64_t seed, const SynthOptions& opts = {});

/// Participant-level geometry drawn from a seed: global offset, per-role
/// offsets and path gains. Session-level remount offsets are drawn separately.
SynthOptions participant_options(std::uint64_t participant_seed, double spread);
SynthOptions session_options(const SynthOptions& participant, std::uint64_t session_seed, double spread);

}  // namespace echoforge
