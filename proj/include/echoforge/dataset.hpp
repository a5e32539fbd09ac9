#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "echoforge/echo.hpp"
#include "echoforge/labels.hpp"
#include "echoforge/signal.hpp"

namespace echoforge {

inline constexpr int kSessionsPerGrasp = 6;
inline constexpr int kRepetitions = 4;
/// 1.86 s model window centred in the 2 s performance window.
inline constexpr double kCueWindowSeconds = 2.0;
inline constexpr double kWindowOffsetSeconds = 0.07;

struct SessionMeta {
  std::string participant_id;
  Grasp grasp = Grasp::Cylindrical;
  std::string object_name;
  int session_index = 1;  // 1..6
  bool device_remounted = false;

  void validate() const;
};

/// Start of one 2 s performance window.
struct Marker {
  std::int64_t sample = 0;
  GestureLabel label = GestureLabel::from_index(0);
  int repetition = 1;  // 1..4
};

/// exclusions.csv overlay row: drop an instance or replace its label.
struct Exclusion {
  int marker_index = 0;
  bool exclude = true;
  std::optional<int> relabel_to;
};

/// One on-disk container: manifest.json, mic1.wav, mic2.wav, optional exclusions.csv.
struct SessionRecording {
  std::array<PcmStream, 2> mics;
  SessionMeta meta;
  std::vector<Marker> markers;
  std::vector<Exclusion> exclusions;
};

SessionRecording load_session(const std::filesystem::path& dir);
void save_session(const std::filesystem::path& dir, const SessionRecording& rec);

struct LabeledInstance {
  std::string id;
  EchoTensor tensor;
  GestureLabel label = GestureLabel::from_index(0);
  SessionMeta meta;
  int repetition = 1;
};

struct SliceResult {
  std::vector<LabeledInstance> instances;
  std::vector<std::string> skipped;  // one human-readable reason per skipped marker
};

/// Runs the echo pipeline over the whole recording, then crops one 155-frame
/// window per marker. Markers whose window runs past the usable frames are
/// skipped and reported; the exclusion overlay is applied here.
SliceResult slice_instances(const SessionRecording& rec, const EchoPipeline& pipeline);

/// Loads every container below root (directories holding manifest.json), in
/// lexicographic path order.
SliceResult load_dataset(const std::filesystem::path& root, const EchoPipeline& pipeline);

struct SplitScheme {
  enum class Kind { LOPO, LOSO, ObjectIndependent, FineTuneBudget };
  Kind kind = Kind::LOPO;
  std::string participant;
  int session = 0;
  std::string object;
  int budget = 0;

  static SplitScheme lopo(std::string participant);
  static SplitScheme loso(std::string participant, int session);
  static SplitScheme object_independent(std::string object);
  /// Train on the first `sessions` sessions of `participant` (held-out excluded), test on `heldout`.
  static SplitScheme finetune_budget(std::string participant, int sessions, int heldout);
};

struct SplitPlan {
  std::string name;
  std::vector<std::size_t> train;  // indices into the instance list
  std::vector<std::size_t> test;
};

SplitPlan make_split(const std::vector<LabeledInstance>& instances, const SplitScheme& scheme);

std::vector<std::string> participants(const std::vector<LabeledInstance>& instances);
std::vector<int> sessions_of(const std::vector<LabeledInstance>& instances, const std::string& participant);
std::vector<std::string> objects_of(const std::vector<LabeledInstance>& instances, Grasp grasp);

/// instance_id, participant, grasp, object, session, repetition, gesture, class_index
void write_labels_csv(const std::filesystem::path& path, const std::vector<LabeledInstance>& instances);

/// Tensor cache: one EPRF tensor file per instance plus index.csv.
void write_tensor_cache(const std::filesystem::path& dir, const std::vector<LabeledInstance>& instances);
std::vector<LabeledInstance> read_tensor_cache(const std::filesystem::path& dir);

}  // namespace echoforge
