#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include <json.hpp>

#include "echoforge/dataset.hpp"
#include "echoforge/errors.hpp"
#include "echoforge/gestures.hpp"
#include "echoforge/wav.hpp"
#include "test_util.hpp"

using namespace echoforge;
using namespace echoforge::testing;
namespace fs = std::filesystem;

TEST(Labels, ThirtyBijectiveClasses) {
  std::set<std::string> names;
  for (int c = 0; c < kNumClasses; ++c) {
    const auto l = GestureLabel::from_index(c);
    EXPECT_EQ(l.class_index(), c);
    EXPECT_EQ(GestureLabel::from_parts(l.grasp(), l.gesture_index()), l);
    EXPECT_EQ(GestureLabel::parse(l.grasp_name(), l.gesture_name()), l);
    names.insert(l.name());
  }
  EXPECT_EQ(names.size(), 30u);
  EXPECT_EQ(GestureLabel::from_index(3).name(), "Cylindrical/MiddleTap");
  EXPECT_EQ(GestureLabel::from_index(29).name(), "Hook/Rotate");
  EXPECT_THROW(GestureLabel::from_index(30), ConfigError);
  EXPECT_THROW(GestureLabel::parse("Cylindrical", "ThumbTap"), ConfigError);
}

namespace {

SessionMeta meta(const std::string& p, int session, const std::string& object = "bottle",
                 Grasp g = Grasp::Cylindrical) {
  SessionMeta m;
  m.participant_id = p;
  m.grasp = g;
  m.object_name = object;
  m.session_index = session;
  m.device_remounted = session > 1;
  return m;
}

// Label-only instances for split planning; tensors are never touched.
std::vector<LabeledInstance> fake_corpus(int participants, int sessions, const std::vector<std::string>& objects) {
  std::vector<LabeledInstance> out;
  for (int p = 1; p <= participants; ++p)
    for (int s = 1; s <= sessions; ++s)
      for (const auto& o : objects)
        for (int g = 0; g < 6; ++g)
          for (int r = 1; r <= 4; ++r) {
            LabeledInstance i;
            i.meta = meta("P" + std::to_string(p), s, o);
            i.label = GestureLabel::from_index(g);
            i.repetition = r;
            i.id = i.meta.participant_id + "/" + o + "/" + std::to_string(s) + "/" + std::to_string(g) + "/" +
                   std::to_string(r);
            out.push_back(std::move(i));
          }
  return out;
}

void expect_disjoint(const SplitPlan& p) {
  EXPECT_FALSE(p.train.empty());
  EXPECT_FALSE(p.test.empty());
  std::set<std::size_t> train(p.train.begin(), p.train.end());
  for (auto t : p.test) EXPECT_FALSE(train.contains(t)) << p.name;
}

}  // namespace

TEST(Split, LoSoCountsAndCover) {
  const auto inst = fake_corpus(2, 6, {"bottle", "mug"});
  std::vector<int> seen(inst.size(), 0);
  for (int s = 1; s <= 6; ++s) {
    const SplitPlan p = make_split(inst, SplitScheme::loso("P1", s));
    expect_disjoint(p);
    EXPECT_EQ(p.test.size(), 48u);  // 2 objects x 24
    EXPECT_EQ(p.train.size(), 240u);
    for (auto t : p.test) {
      ++seen[t];
      EXPECT_EQ(inst[t].meta.session_index, s);
    }
    for (auto t : p.train) EXPECT_EQ(inst[t].meta.participant_id, "P1");
  }
  for (std::size_t i = 0; i < inst.size(); ++i) EXPECT_EQ(seen[i], inst[i].meta.participant_id == "P1" ? 1 : 0);
}

TEST(Split, LopoHoldsOutOneParticipant) {
  const auto inst = fake_corpus(10, 1, {"bottle"});
  const SplitPlan p = make_split(inst, SplitScheme::lopo("P7"));
  expect_disjoint(p);
  std::set<std::string> train_people;
  for (auto t : p.train) train_people.insert(inst[t].meta.participant_id);
  EXPECT_EQ(train_people.size(), 9u);
  EXPECT_FALSE(train_people.contains("P7"));
  EXPECT_EQ(p.train.size() + p.test.size(), inst.size());
}

TEST(Split, ObjectIndependentCoversEachObjectOnce) {
  const std::vector<std::string> objects{"a", "b", "c", "d", "e"};
  const auto inst = fake_corpus(2, 1, objects);
  std::vector<int> tested(inst.size(), 0);
  for (const auto& o : objects) {
    const SplitPlan p = make_split(inst, SplitScheme::object_independent(o));
    expect_disjoint(p);
    for (auto t : p.test) {
      ++tested[t];
      EXPECT_EQ(inst[t].meta.object_name, o);
    }
    EXPECT_EQ(p.train.size() + p.test.size(), inst.size());
  }
  for (int n : tested) EXPECT_EQ(n, 1);
}

TEST(Split, FineTuneBudgetUsesFirstSessions) {
  const auto inst = fake_corpus(1, 6, {"bottle"});
  const SplitPlan p = make_split(inst, SplitScheme::finetune_budget("P1", 2, 6));
  expect_disjoint(p);
  std::set<int> train_sessions;
  for (auto t : p.train) train_sessions.insert(inst[t].meta.session_index);
  EXPECT_EQ(train_sessions, (std::set<int>{1, 2}));
  for (auto t : p.test) EXPECT_EQ(inst[t].meta.session_index, 6);
  const SplitPlan all = make_split(inst, SplitScheme::finetune_budget("P1", 5, 6));
  const SplitPlan loso = make_split(inst, SplitScheme::loso("P1", 6));
  EXPECT_EQ(all.train, loso.train);
  EXPECT_EQ(all.test, loso.test);
  EXPECT_THROW(make_split(inst, SplitScheme::finetune_budget("P1", 6, 6)), ConfigError);
}

TEST(Split, UnknownUnitsThrow) {
  const auto inst = fake_corpus(2, 2, {"bottle"});
  EXPECT_THROW(make_split(inst, SplitScheme::lopo("P9")), ConfigError);
  EXPECT_THROW(make_split(inst, SplitScheme::loso("P1", 5)), ConfigError);
  EXPECT_THROW(make_split(inst, SplitScheme::object_independent("vase")), ConfigError);
  // A single-participant corpus has nothing to train on under LOPO.
  EXPECT_THROW(make_split(fake_corpus(1, 1, {"bottle"}), SplitScheme::lopo("P1")), ConfigError);
}

namespace {

SessionRecording small_session(int session, int reps, std::uint64_t seed) {
  SynthOptions o;
  return synth_session(builtin_scripts(), meta("P01", session), reps, seed, o);
}

}  // namespace

TEST(Session, SaveLoadSliceRoundTrip) {
  const auto dir = scratch_dir("session");
  const SessionRecording rec = small_session(1, 4, 3);
  save_session(dir / "s1", rec);
  const SessionRecording back = load_session(dir / "s1");
  EXPECT_EQ(back.markers.size(), 24u);
  EXPECT_EQ(back.meta.participant_id, "P01");
  EXPECT_EQ(back.meta.object_name, "bottle");
  for (std::size_t i = 0; i < rec.markers.size(); ++i) {
    EXPECT_EQ(back.markers[i].sample, rec.markers[i].sample);
    EXPECT_EQ(back.markers[i].label, rec.markers[i].label);
    EXPECT_EQ(back.markers[i].repetition, rec.markers[i].repetition);
  }
  const EchoPipeline pipeline;
  const SliceResult r = slice_instances(back, pipeline);
  EXPECT_EQ(r.instances.size(), 24u);
  EXPECT_TRUE(r.skipped.empty());
  std::array<int, 6> per_class{};
  for (const auto& i : r.instances) {
    EXPECT_TRUE(i.tensor.has_valid_shape());
    ++per_class[i.label.class_index()];
  }
  for (int n : per_class) EXPECT_EQ(n, 4);
  // Re-loading is bitwise deterministic.
  const SliceResult again = slice_instances(load_session(dir / "s1"), pipeline);
  for (std::size_t i = 0; i < r.instances.size(); ++i)
    for (int c = 0; c < 8; ++c) EXPECT_EQ(again.instances[i].tensor.planes[c], r.instances[i].tensor.planes[c]);
}

TEST(Session, NoMarkersGiveNoInstances) {
  SessionRecording rec = small_session(1, 1, 4);
  rec.markers.clear();
  EXPECT_TRUE(slice_instances(rec, EchoPipeline{}).instances.empty());
}

TEST(Session, MarkerNearEndIsSkippedAndReported) {
  SessionRecording rec = small_session(1, 1, 5);
  Marker late = rec.markers.back();
  late.sample = rec.mics[0].size() - 25000;  // 0.5 s before the end
  rec.markers.push_back(late);
  const SliceResult r = slice_instances(rec, EchoPipeline{});
  EXPECT_EQ(r.instances.size(), 6u);
  ASSERT_EQ(r.skipped.size(), 1u);
  EXPECT_NE(r.skipped[0].find("m006"), std::string::npos) << r.skipped[0];
}

TEST(Session, ExclusionOverlay) {
  const auto dir = scratch_dir("overlay");
  SessionRecording rec = small_session(2, 1, 6);
  rec.exclusions = {{0, true, std::nullopt}, {1, false, 5}};
  save_session(dir / "s", rec);
  const SliceResult r = slice_instances(load_session(dir / "s"), EchoPipeline{});
  EXPECT_EQ(r.instances.size(), 5u);
  EXPECT_EQ(r.skipped.size(), 1u);
  EXPECT_EQ(r.instances[0].label.class_index(), 5);
}

namespace {

void edit_manifest(const fs::path& dir, const std::function<void(nlohmann::json&)>& edit) {
  nlohmann::json j;
  std::ifstream(dir / "manifest.json") >> j;
  edit(j);
  std::ofstream(dir / "manifest.json") << j.dump();
}

}  // namespace

TEST(Session, IngestErrors) {
  const auto root = scratch_dir("ingest");
  const SessionRecording rec = small_session(1, 1, 7);

  save_session(root / "rate", rec);
  edit_manifest(root / "rate", [](auto& j) { j["sample_rate"] = 44100; });
  EXPECT_THROW(load_session(root / "rate"), IngestError);

  save_session(root / "schema", rec);
  edit_manifest(root / "schema", [](auto& j) { j.erase("participant"); });
  EXPECT_THROW(load_session(root / "schema"), IngestError);

  save_session(root / "missing", rec);
  fs::remove(root / "missing" / "mic2.wav");
  try {
    load_session(root / "missing");
    FAIL();
  } catch (const IngestError& e) {
    EXPECT_NE(std::string(e.what()).find("mic2.wav"), std::string::npos);
  }

  save_session(root / "short", rec);
  wav::write(root / "short" / "mic1.wav", {rec.mics[0].samples.head(1000)}, 50000, wav::SampleFormat::Float32);
  try {
    load_session(root / "short");
    FAIL();
  } catch (const IngestError& e) {
    EXPECT_NE(std::string(e.what()).find("mic1.wav"), std::string::npos) << e.what();
  }

  save_session(root / "wavrate", rec);
  wav::write(root / "wavrate" / "mic1.wav", {rec.mics[0].samples}, 44100, wav::SampleFormat::Float32);
  EXPECT_THROW(load_session(root / "wavrate"), IngestError);

  EXPECT_THROW(load_session(root / "nowhere"), IngestError);
}

TEST(Dataset, LoadAndCacheRoundTrip) {
  const auto root = scratch_dir("dataset");
  save_session(root / "P01" / "s1", small_session(1, 1, 8));
  save_session(root / "P01" / "s2", small_session(2, 1, 9));
  const SliceResult r = load_dataset(root, EchoPipeline{});
  ASSERT_EQ(r.instances.size(), 12u);
  EXPECT_EQ(sessions_of(r.instances, "P01"), (std::vector<int>{1, 2}));

  write_tensor_cache(root / "cache", r.instances);
  const auto back = read_tensor_cache(root / "cache");
  ASSERT_EQ(back.size(), r.instances.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].id, r.instances[i].id);
    EXPECT_EQ(back[i].label, r.instances[i].label);
    EXPECT_EQ(back[i].meta.session_index, r.instances[i].meta.session_index);
    EXPECT_EQ(back[i].meta.device_remounted, r.instances[i].meta.device_remounted);
    for (int c = 0; c < 8; ++c) EXPECT_EQ(back[i].tensor.planes[c], r.instances[i].tensor.planes[c]);
  }

  write_labels_csv(root / "labels.csv", r.instances);
  std::ifstream is(root / "labels.csv");
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "instance_id,participant,grasp,object,session,repetition,gesture,class_index");
}
