#include "echoforge/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <map>
#include <sstream>

#include "echoforge/eprf.hpp"
#include "echoforge/errors.hpp"
#include "echoforge/wav.hpp"

namespace echoforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifestFormat = "echoforge-session";
constexpr int kManifestVersion = 1;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<Exclusion> read_exclusions(const fs::path& path) {
  std::vector<Exclusion> out;
  std::ifstream is(path);
  if (!is) throw IngestError("cannot open " + path.string());
  std::string line;
  std::getline(is, line);  // header
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() < 2) throw IngestError(path.string() + ":" + std::to_string(lineno) + ": expected marker_index,action");
    Exclusion e;
    e.marker_index = std::stoi(f[0]);
    if (f[1] == "exclude") {
      e.exclude = true;
    } else if (f[1] == "relabel") {
      if (f.size() < 3 || f[2].empty())
        throw IngestError(path.string() + ":" + std::to_string(lineno) + ": relabel needs class_index");
      e.exclude = false;
      e.relabel_to = std::stoi(f[2]);
    } else {
      throw IngestError(path.string() + ":" + std::to_string(lineno) + ": unknown action '" + f[1] + "'");
    }
    out.push_back(e);
  }
  return out;
}

std::string instance_id(const SessionMeta& m, int marker_index) {
  std::ostringstream id;
  id << m.participant_id << '/' << grasp_name(m.grasp) << '/' << m.object_name << "/s" << m.session_index << "/m"
     << std::setw(3) << std::setfill('0') << marker_index;
  return id.str();
}

}  // namespace

void SessionMeta::validate() const {
  if (participant_id.empty()) throw IngestError("session metadata: empty participant id");
  if (object_name.empty()) throw IngestError("session metadata: empty object name");
  if (participant_id.find(',') != std::string::npos || object_name.find(',') != std::string::npos)
    throw IngestError("session metadata: participant/object names may not contain commas");
  if (session_index < 1 || session_index > kSessionsPerGrasp)
    throw IngestError("session index " + std::to_string(session_index) + " outside [1, 6]");
}

SessionRecording load_session(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  std::ifstream is(manifest_path);
  if (!is) throw IngestError("missing manifest: " + manifest_path.string());

  SessionRecording rec;
  std::int64_t declared_samples = -1;
  try {
    json j;
    is >> j;
    if (j.at("format").get<std::string>() != kManifestFormat)
      throw IngestError(manifest_path.string() + ": unknown format tag");
    if (j.at("version").get<int>() != kManifestVersion)
      throw IngestError(manifest_path.string() + ": unsupported manifest version");
    const int rate = j.at("sample_rate").get<int>();
    if (rate != static_cast<int>(kSampleRate))
      throw IngestError(manifest_path.string() + ": sample rate " + std::to_string(rate) + " Hz, expected 50000 Hz");
    rec.meta.participant_id = j.at("participant").get<std::string>();
    const auto grasp = GestureLabel::parse_grasp(j.at("grasp").get<std::string>());
    if (!grasp) throw IngestError(manifest_path.string() + ": unknown grasp " + j.at("grasp").dump());
    rec.meta.grasp = *grasp;
    rec.meta.object_name = j.at("object").get<std::string>();
    rec.meta.session_index = j.at("session").get<int>();
    rec.meta.device_remounted = j.value("device_remounted", false);
    declared_samples = j.at("num_samples").get<std::int64_t>();
    for (const auto& jm : j.at("markers")) {
      Marker m;
      m.sample = jm.at("sample").get<std::int64_t>();
      if (jm.contains("class_index")) {
        m.label = GestureLabel::from_index(jm.at("class_index").get<int>());
        if (m.label.grasp() != rec.meta.grasp)
          throw IngestError(manifest_path.string() + ": marker class outside the session's grasp");
      } else {
        m.label = GestureLabel::parse(grasp_name(rec.meta.grasp), jm.at("gesture").get<std::string>());
      }
      m.repetition = jm.value("repetition", 1);
      if (m.repetition < 1 || m.repetition > kRepetitions)
        throw IngestError(manifest_path.string() + ": repetition outside [1, 4]");
      rec.markers.push_back(m);
    }
  } catch (const json::exception& e) {
    throw IngestError(manifest_path.string() + ": schema violation: " + e.what());
  } catch (const ConfigError& e) {
    throw IngestError(manifest_path.string() + ": " + e.what());
  }
  rec.meta.validate();
  for (std::size_t i = 1; i < rec.markers.size(); ++i)
    if (rec.markers[i].sample <= rec.markers[i - 1].sample)
      throw IngestError(manifest_path.string() + ": markers must be strictly increasing");

  const std::array<const char*, 2> names{"mic1.wav", "mic2.wav"};
  for (int m = 0; m < 2; ++m) {
    const fs::path wav_path = dir / names[m];
    if (!fs::exists(wav_path)) throw IngestError(dir.string() + ": missing channel " + names[m]);
    rec.mics[m] = wav::read_stream(wav_path, static_cast<MicId>(m));
    if (rec.mics[m].size() != declared_samples)
      throw IngestError(wav_path.string() + ": channel " + names[m] + " is short: " +
                        std::to_string(rec.mics[m].size()) + " samples, manifest declares " +
                        std::to_string(declared_samples));
  }
  if (fs::exists(dir / "exclusions.csv")) rec.exclusions = read_exclusions(dir / "exclusions.csv");
  return rec;
}

void save_session(const fs::path& dir, const SessionRecording& rec) {
  rec.meta.validate();
  if (rec.mics[0].size() != rec.mics[1].size()) throw ShapeError("save_session: microphone lengths differ");
  fs::create_directories(dir);
  json j;
  j["format"] = kManifestFormat;
  j["version"] = kManifestVersion;
  j["participant"] = rec.meta.participant_id;
  j["grasp"] = grasp_name(rec.meta.grasp);
  j["object"] = rec.meta.object_name;
  j["session"] = rec.meta.session_index;
  j["device_remounted"] = rec.meta.device_remounted;
  j["sample_rate"] = static_cast<int>(kSampleRate);
  j["num_samples"] = rec.mics[0].size();
  j["markers"] = json::array();
  for (const auto& m : rec.markers)
    j["markers"].push_back({{"sample", m.sample}, {"gesture", m.label.gesture_name()}, {"repetition", m.repetition}});
  std::ofstream os(dir / "manifest.json");
  os << j.dump(2) << '\n';
  for (int m = 0; m < 2; ++m)
    wav::write(dir / (m == 0 ? "mic1.wav" : "mic2.wav"), {rec.mics[m].samples}, static_cast<int>(kSampleRate),
               wav::SampleFormat::Float32);
  if (!rec.exclusions.empty()) {
    std::ofstream ex(dir / "exclusions.csv");
    ex << "marker_index,action,class_index\n";
    for (const auto& e : rec.exclusions)
      ex << e.marker_index << ',' << (e.exclude ? "exclude" : "relabel") << ','
         << (e.relabel_to ? std::to_string(*e.relabel_to) : "") << '\n';
  }
}

SliceResult slice_instances(const SessionRecording& rec, const EchoPipeline& pipeline) {
  SliceResult out;
  if (rec.markers.empty()) return out;
  const auto full = pipeline.profiles(rec.mics[0], rec.mics[1]);
  const Eigen::Index frames = full[0].frames();

  std::map<int, Exclusion> overlay;
  for (const auto& e : rec.exclusions) overlay[e.marker_index] = e;

  const double offset_samples = kWindowOffsetSeconds * kSampleRate;
  for (std::size_t i = 0; i < rec.markers.size(); ++i) {
    const Marker& m = rec.markers[i];
    const int idx = static_cast<int>(i);
    if (const auto it = overlay.find(idx); it != overlay.end() && it->second.exclude) {
      out.skipped.push_back(instance_id(rec.meta, idx) + ": excluded by overlay");
      continue;
    }
    const auto start_frame =
        static_cast<Eigen::Index>(std::llround((static_cast<double>(m.sample) + offset_samples) / kSweepSamples));
    // Frames 0 and frames-1 carry filter edge transients.
    if (start_frame < 1 || start_frame + EchoTensor::kFrames > frames - 1) {
      std::ostringstream why;
      why << instance_id(rec.meta, idx) << ": window frames [" << start_frame << ", "
          << start_frame + EchoTensor::kFrames << ") outside usable range [1, " << frames - 1 << ")";
      out.skipped.push_back(why.str());
      continue;
    }
    LabeledInstance inst;
    inst.id = instance_id(rec.meta, idx);
    inst.label = m.label;
    if (const auto it = overlay.find(idx); it != overlay.end() && it->second.relabel_to)
      inst.label = GestureLabel::from_index(*it->second.relabel_to);
    inst.meta = rec.meta;
    inst.repetition = m.repetition;
    inst.tensor = pipeline.tensor(full, start_frame);
    inst.tensor.label = inst.label;
    out.instances.push_back(std::move(inst));
  }
  return out;
}

SliceResult load_dataset(const fs::path& root, const EchoPipeline& pipeline) {
  if (!fs::is_directory(root)) throw IngestError("dataset directory not found: " + root.string());
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.is_regular_file() && entry.path().filename() == "manifest.json") dirs.push_back(entry.path().parent_path());
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw IngestError("no session containers (manifest.json) under " + root.string());
  SliceResult all;
  for (const auto& d : dirs) {
    auto part = slice_instances(load_session(d), pipeline);
    for (auto& inst : part.instances) all.instances.push_back(std::move(inst));
    for (auto& s : part.skipped) all.skipped.push_back(std::move(s));
  }
  return all;
}

SplitScheme SplitScheme::lopo(std::string participant) {
  SplitScheme s;
  s.kind = Kind::LOPO;
  s.participant = std::move(participant);
  return s;
}

SplitScheme SplitScheme::loso(std::string participant, int session) {
  SplitScheme s;
  s.kind = Kind::LOSO;
  s.participant = std::move(participant);
  s.session = session;
  return s;
}

SplitScheme SplitScheme::object_independent(std::string object) {
  SplitScheme s;
  s.kind = Kind::ObjectIndependent;
  s.object = std::move(object);
  return s;
}

SplitScheme SplitScheme::finetune_budget(std::string participant, int sessions, int heldout) {
  SplitScheme s;
  s.kind = Kind::FineTuneBudget;
  s.participant = std::move(participant);
  s.budget = sessions;
  s.session = heldout;
  return s;
}

std::vector<std::string> participants(const std::vector<LabeledInstance>& instances) {
  std::set<std::string> ids;
  for (const auto& i : instances) ids.insert(i.meta.participant_id);
  return {ids.begin(), ids.end()};
}

std::vector<int> sessions_of(const std::vector<LabeledInstance>& instances, const std::string& participant) {
  std::set<int> s;
  for (const auto& i : instances)
    if (i.meta.participant_id == participant) s.insert(i.meta.session_index);
  return {s.begin(), s.end()};
}

std::vector<std::string> objects_of(const std::vector<LabeledInstance>& instances, Grasp grasp) {
  std::set<std::string> s;
  for (const auto& i : instances)
    if (i.meta.grasp == grasp) s.insert(i.meta.object_name);
  return {s.begin(), s.end()};
}

SplitPlan make_split(const std::vector<LabeledInstance>& instances, const SplitScheme& scheme) {
  using Kind = SplitScheme::Kind;
  SplitPlan plan;
  const auto require_participant = [&] {
    const auto ps = participants(instances);
    if (std::find(ps.begin(), ps.end(), scheme.participant) == ps.end())
      throw ConfigError("unknown participant '" + scheme.participant + "'");
  };
  const auto require_session = [&](int session) {
    const auto ss = sessions_of(instances, scheme.participant);
    if (std::find(ss.begin(), ss.end(), session) == ss.end())
      throw ConfigError("participant '" + scheme.participant + "' has no session " + std::to_string(session));
  };

  switch (scheme.kind) {
    case Kind::LOPO: {
      require_participant();
      plan.name = "lopo-" + scheme.participant;
      for (std::size_t i = 0; i < instances.size(); ++i)
        (instances[i].meta.participant_id == scheme.participant ? plan.test : plan.train).push_back(i);
      break;
    }
    case Kind::LOSO: {
      require_participant();
      require_session(scheme.session);
      plan.name = "loso-" + scheme.participant + "-s" + std::to_string(scheme.session);
      for (std::size_t i = 0; i < instances.size(); ++i) {
        if (instances[i].meta.participant_id != scheme.participant) continue;
        (instances[i].meta.session_index == scheme.session ? plan.test : plan.train).push_back(i);
      }
      break;
    }
    case Kind::ObjectIndependent: {
      std::optional<Grasp> grasp;
      for (const auto& inst : instances)
        if (inst.meta.object_name == scheme.object) grasp = inst.meta.grasp;
      if (!grasp) throw ConfigError("unknown object '" + scheme.object + "'");
      plan.name = "object-" + scheme.object;
      for (std::size_t i = 0; i < instances.size(); ++i) {
        if (instances[i].meta.grasp != *grasp) continue;
        (instances[i].meta.object_name == scheme.object ? plan.test : plan.train).push_back(i);
      }
      break;
    }
    case Kind::FineTuneBudget: {
      require_participant();
      require_session(scheme.session);
      std::vector<int> pool;
      for (int s : sessions_of(instances, scheme.participant))
        if (s != scheme.session) pool.push_back(s);
      if (scheme.budget < 1 || scheme.budget > static_cast<int>(pool.size()))
        throw ConfigError("fine-tune budget " + std::to_string(scheme.budget) + " outside [1, " +
                          std::to_string(pool.size()) + "] available sessions");
      const std::set<int> chosen(pool.begin(), pool.begin() + scheme.budget);
      plan.name = "finetune-" + scheme.participant + "-n" + std::to_string(scheme.budget) + "-s" +
                  std::to_string(scheme.session);
      for (std::size_t i = 0; i < instances.size(); ++i) {
        const auto& m = instances[i].meta;
        if (m.participant_id != scheme.participant) continue;
        if (m.session_index == scheme.session)
          plan.test.push_back(i);
        else if (chosen.contains(m.session_index))
          plan.train.push_back(i);
      }
      break;
    }
  }
  if (plan.train.empty() || plan.test.empty())
    throw ConfigError("split " + plan.name + " leaves an empty train or test set");
  return plan;
}

void write_labels_csv(const fs::path& path, const std::vector<LabeledInstance>& instances) {
  std::ofstream os(path);
  if (!os) throw IngestError("cannot write " + path.string());
  os << "instance_id,participant,grasp,object,session,repetition,gesture,class_index\n";
  for (const auto& i : instances)
    os << i.id << ',' << i.meta.participant_id << ',' << grasp_name(i.meta.grasp) << ',' << i.meta.object_name << ','
       << i.meta.session_index << ',' << i.repetition << ',' << i.label.gesture_name() << ',' << i.label.class_index()
       << '\n';
}

void write_tensor_cache(const fs::path& dir, const std::vector<LabeledInstance>& instances) {
  fs::create_directories(dir / "tensors");
  std::ofstream index(dir / "index.csv");
  if (!index) throw IngestError("cannot write " + (dir / "index.csv").string());
  index << "file,instance_id,participant,grasp,object,session,repetition,class_index,remounted\n";
  for (std::size_t n = 0; n < instances.size(); ++n) {
    const auto& i = instances[n];
    std::ostringstream file;
    file << "tensors/" << std::setw(6) << std::setfill('0') << n << ".eprf";
    eprf::save_tensor(dir / file.str(), i.tensor);
    index << file.str() << ',' << i.id << ',' << i.meta.participant_id << ',' << grasp_name(i.meta.grasp) << ','
          << i.meta.object_name << ',' << i.meta.session_index << ',' << i.repetition << ',' << i.label.class_index()
          << ',' << (i.meta.device_remounted ? 1 : 0) << '\n';
  }
}

std::vector<LabeledInstance> read_tensor_cache(const fs::path& dir) {
  std::ifstream index(dir / "index.csv");
  if (!index) throw IngestError("missing tensor cache index in " + dir.string());
  std::vector<LabeledInstance> out;
  std::string line;
  std::getline(index, line);
  while (std::getline(index, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 9) throw IngestError("tensor cache index: malformed row '" + line + "'");
    LabeledInstance i;
    i.id = f[1];
    i.meta.participant_id = f[2];
    const auto grasp = GestureLabel::parse_grasp(f[3]);
    if (!grasp) throw IngestError("tensor cache index: unknown grasp " + f[3]);
    i.meta.grasp = *grasp;
    i.meta.object_name = f[4];
    i.meta.session_index = std::stoi(f[5]);
    i.repetition = std::stoi(f[6]);
    i.label = GestureLabel::from_index(std::stoi(f[7]));
    i.meta.device_remounted = f[8] == "1";
    i.tensor = eprf::load_tensor(dir / f[0]);
    i.tensor.label = i.label;
    out.push_back(std::move(i));
  }
  return out;
}

}  // namespace echoforge
