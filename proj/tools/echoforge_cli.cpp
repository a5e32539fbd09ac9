// echoforge command-line entry point: simulate, profile, synth-corpus, train, eval.
#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "echoforge/dataset.hpp"
#include "echoforge/echo.hpp"
#include "echoforge/eprf.hpp"
#include "echoforge/errors.hpp"
#include "echoforge/gestures.hpp"
#include "echoforge/image.hpp"
#include "echoforge/metrics.hpp"
#include "echoforge/nn/checkpoint.hpp"
#include "echoforge/nn/train.hpp"
#include "echoforge/parallel.hpp"
#include "echoforge/report.hpp"
#include "echoforge/run_config.hpp"
#include "echoforge/scene.hpp"
#include "echoforge/wav.hpp"

namespace fs = std::filesystem;
using namespace echoforge;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAssert = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIngest = 3;
constexpr int kExitNumeric = 4;

class AssertionFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void log(const std::string& msg) { std::cerr << msg << '\n'; }

// Flags shared by every subcommand. `*_opt` pointers tell whether the flag
// was given explicitly, which decides precedence over --config.
struct Common {
  std::string out;
  std::string config;
  std::uint64_t seed = 42;
  CLI::Option* seed_opt = nullptr;
  std::vector<std::string> inputs;
};

void add_common(CLI::App* cmd, Common& c, const std::string& inputs_help) {
  cmd->add_option("inputs", c.inputs, inputs_help);
  cmd->add_option("--out", c.out, "Output directory")->required();
  cmd->add_option("--config", c.config, "JSON run config (a previous config.json works)");
  c.seed_opt = cmd->add_option("--seed", c.seed, "Random seed");
}

RunConfig resolve(const Common& c, const std::string& subcommand) {
  RunConfig rc = c.config.empty() ? RunConfig{} : load_run_config(c.config);
  if (!rc.subcommand.empty() && rc.subcommand != subcommand)
    log("note: config was written by '" + rc.subcommand + "', reusing its shared sections");
  if (rc.subcommand != subcommand) rc.options = json::object();
  rc.subcommand = subcommand;
  if (!c.inputs.empty()) rc.inputs = c.inputs;
  if (c.seed_opt->count() > 0 || c.config.empty()) rc.seed = c.seed;
  return rc;
}

// Explicit flag, then config option, then default.
template <typename T>
T pick(const CLI::Option* opt, const T& flag, const json& options, const std::string& key) {
  if (opt->count() > 0 || !options.contains(key)) return flag;
  return options.at(key).get<T>();
}

fs::path prepare_out(const std::string& out) {
  const fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  Common c;
  double duration = 0.0;
  CLI::Option* duration_opt = nullptr;
};

void run_simulate(const SimulateArgs& a) {
  RunConfig rc = resolve(a.c, "simulate");
  if (rc.inputs.size() != 1) throw ConfigError("simulate takes exactly one scene file");
  SceneFile sf = load_scene(rc.inputs[0]);
  if (a.c.seed_opt->count() == 0 && a.c.config.empty()) rc.seed = sf.seed;
  if (a.duration_opt->count() > 0) rc.options["duration"] = a.duration;
  if (rc.options.contains("duration")) sf.scene.duration = rc.options["duration"].get<double>();
  sf.scene.validate();

  const fs::path out = prepare_out(a.c.out);
  const auto mics = render_microphones(sf.scene, rc.sensing, rc.seed);
  wav::write(out / "mic1.wav", {mics[0].samples}, static_cast<int>(kSampleRate), wav::SampleFormat::Float32);
  wav::write(out / "mic2.wav", {mics[1].samples}, static_cast<int>(kSampleRate), wav::SampleFormat::Float32);

  std::ofstream labels(out / "labels.csv");
  labels << "start_sample,end_sample,class_index,label\n";
  if (sf.label) {
    const auto g = GestureLabel::from_index(*sf.label);
    labels << 0 << ',' << mics[0].samples.size() << ',' << *sf.label << ',' << g.name() << '\n';
  }
  save_run_config(out / "config.json", rc);
  log("simulate: " + std::to_string(sf.scene.frames()) + " frames, seed " + std::to_string(rc.seed) + " -> " +
      out.string());
}

// ---------------------------------------------------------------- profile

struct ProfileArgs {
  Common c;
  bool png = false;
  CLI::Option* png_opt = nullptr;
  int assert_row = -1;
  CLI::Option* assert_opt = nullptr;
  std::string assert_channel = "SS1";
  CLI::Option* assert_channel_opt = nullptr;
  int start_bin = 0;
  CLI::Option* start_bin_opt = nullptr;
  int bins = EchoTensor::kBins;
  CLI::Option* bins_opt = nullptr;
};

EchoChannel parse_channel(const std::string& name) {
  for (int c = 0; c < 4; ++c)
    if (channel_name(static_cast<EchoChannel>(c)) == name) return static_cast<EchoChannel>(c);
  throw ConfigError("unknown channel '" + name + "' (expected SS1, DS1, DS2 or SS2)");
}

void run_profile(const ProfileArgs& a) {
  RunConfig rc = resolve(a.c, "profile");
  if (rc.inputs.empty() || rc.inputs.size() > 2)
    throw ConfigError("profile takes one WAV (used for both microphones) or two WAVs (mic1 mic2)");
  auto& o = rc.options;
  o["png"] = pick(a.png_opt, a.png, o, "png");
  o["start_bin"] = pick(a.start_bin_opt, a.start_bin, o, "start_bin");
  o["bins"] = pick(a.bins_opt, a.bins, o, "bins");
  if (a.assert_opt->count() > 0) o["assert_row"] = a.assert_row;
  o["assert_channel"] = pick(a.assert_channel_opt, a.assert_channel, o, "assert_channel");

  const PcmStream mic1 = wav::read_stream(rc.inputs[0], MicId::Mic1);
  const PcmStream mic2 = wav::read_stream(rc.inputs.size() == 2 ? rc.inputs[1] : rc.inputs[0], MicId::Mic2);
  const EchoPipeline pipeline(rc.sensing);
  const auto full = pipeline.profiles(mic1, mic2);
  const int start_bin = o["start_bin"].get<int>();
  const int bins = o["bins"].get<int>();
  const Eigen::Index frames = full[0].values.cols();

  const fs::path out = prepare_out(a.c.out);
  std::array<EchoProfile, 4> crops;
  for (int c = 0; c < 4; ++c) {
    crops[c] = crop_window(full[c], start_bin, bins, 0, frames);
    const EchoProfile diff = differential_profile(crops[c]);
    const std::string name(channel_name(crops[c].channel));
    eprf::save(out / (name + ".eprf"), crops[c], static_cast<std::uint8_t>(c));
    eprf::save(out / ("d" + name + ".eprf"), diff, static_cast<std::uint8_t>(c + 4));
    if (o["png"].get<bool>()) {
      image::write_png(out / (name + ".png"), image::heatmap(crops[c].values.cwiseAbs(), image::Colormap::Viridis, 2));
      image::write_png(out / ("d" + name + ".png"), image::heatmap(diff.values, image::Colormap::Viridis, 2));
    }
  }
  save_run_config(out / "config.json", rc);
  log("profile: " + std::to_string(frames) + " frames x " + std::to_string(bins) + " bins from bin " +
      std::to_string(start_bin) + " -> " + out.string());

  if (o.contains("assert_row")) {
    const int want = o["assert_row"].get<int>();
    const auto ch = parse_channel(o["assert_channel"].get<std::string>());
    const auto& values = crops[static_cast<int>(ch)].values;
    // Edge frames carry filter start-up transients.
    int hits = 0, total = 0;
    for (Eigen::Index f = 1; f + 1 < values.cols(); ++f) {
      Eigen::Index row;
      values.col(f).maxCoeff(&row);
      hits += std::abs(static_cast<int>(row) + start_bin - want) <= 1 ? 1 : 0;
      ++total;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "assert-row %d on %s: %d/%d interior columns within +/-1 bin", want,
                  std::string(channel_name(ch)).c_str(), hits, total);
    if (total == 0 || hits != total) throw AssertionFailed(buf);
    log(buf);
  }
}

// ---------------------------------------------------------------- synth-corpus

struct SynthArgs {
  Common c;
  int participants = 2;
  int sessions = kSessionsPerGrasp;
  int repetitions = kRepetitions;
  double spread = 0.003;
  double noise = 0.01;
  std::string object = "bottle";
};

void run_synth(const SynthArgs& a) {
  RunConfig rc = resolve(a.c, "synth-corpus");
  auto& o = rc.options;
  o["participants"] = a.participants;
  o["sessions"] = a.sessions;
  o["repetitions"] = a.repetitions;
  o["spread"] = a.spread;
  o["noise_rms"] = a.noise;
  o["object"] = a.object;
  if (a.participants < 1 || a.sessions < 1 || a.sessions > kSessionsPerGrasp || a.repetitions < 1 ||
      a.repetitions > kRepetitions)
    throw ConfigError("need participants >= 1, sessions in [1, 6] and repetitions in [1, 4]");

  const fs::path out = prepare_out(a.c.out);
  const auto scripts = builtin_scripts();
  for (int p = 1; p <= a.participants; ++p) {
    char pid[16];
    std::snprintf(pid, sizeof pid, "P%02d", p);
    SynthOptions popts = participant_options(derive_seed(rc.seed, 1000 + p), a.spread);
    popts.noise_rms = a.noise;
    popts.sensing = rc.sensing;
    for (int s = 1; s <= a.sessions; ++s) {
      SessionMeta meta;
      meta.participant_id = pid;
      meta.grasp = scripts.front().label.grasp();
      meta.object_name = a.object;
      meta.session_index = s;
      meta.device_remounted = s > 1;
      const SynthOptions sopts = session_options(popts, derive_seed(rc.seed, 100000 + 100 * p + s), a.spread);
      const auto rec = synth_session(scripts, meta, a.repetitions, derive_seed(rc.seed, 200000 + 100 * p + s), sopts);
      const fs::path dir = out / pid / ("session" + std::to_string(s));
      save_session(dir, rec);
      log("synth-corpus: wrote " + dir.string());
    }
  }
  save_run_config(out / "config.json", rc);
}

// ---------------------------------------------------------------- train / eval

struct TrainArgs {
  Common c;
  std::string split = "loso";
  CLI::Option* split_opt = nullptr;
  std::string participant;
  CLI::Option* participant_opt = nullptr;
  int session = 0;
  CLI::Option* session_opt = nullptr;
  std::string object;
  CLI::Option* object_opt = nullptr;
  int epochs = -1;
  CLI::Option* epochs_opt = nullptr;
  std::string base_checkpoint;
  CLI::Option* base_opt = nullptr;
  bool save_cache = false;
};

constexpr const char* kSplitHelp = "lopo | loso | object-independent | finetune-budget=N";

struct ParsedSplit {
  SplitScheme::Kind kind;
  int budget = 0;
};

ParsedSplit parse_split(const std::string& s) {
  if (s == "lopo") return {SplitScheme::Kind::LOPO};
  if (s == "loso") return {SplitScheme::Kind::LOSO};
  if (s == "object-independent") return {SplitScheme::Kind::ObjectIndependent};
  const std::string prefix = "finetune-budget=";
  if (s.rfind(prefix, 0) == 0) {
    try {
      std::size_t used = 0;
      const int n = std::stoi(s.substr(prefix.size()), &used);
      if (used == s.size() - prefix.size() && n >= 1) return {SplitScheme::Kind::FineTuneBudget, n};
    } catch (const std::exception&) {
    }
    throw ConfigError("bad fine-tune budget in '" + s + "': expected finetune-budget=N with N >= 1");
  }
  throw ConfigError("unknown split '" + s + "'; valid schemes: " + kSplitHelp);
}

std::vector<LabeledInstance> load_instances(const fs::path& root, const SensingConfig& sensing) {
  if (fs::exists(root / "index.csv")) return read_tensor_cache(root);
  const EchoPipeline pipeline(sensing);
  SliceResult r = load_dataset(root, pipeline);
  for (const auto& s : r.skipped) log("skipped: " + s);
  return std::move(r.instances);
}

std::vector<SplitScheme> fold_schemes(const std::vector<LabeledInstance>& inst, const ParsedSplit& split,
                                      const json& o) {
  const std::string participant = o.value("participant", std::string());
  const int session = o.value("session", 0);
  const std::vector<std::string> people = participant.empty() ? participants(inst) : std::vector{participant};
  std::vector<SplitScheme> out;
  switch (split.kind) {
    case SplitScheme::Kind::LOPO:
      for (const auto& p : people) out.push_back(SplitScheme::lopo(p));
      break;
    case SplitScheme::Kind::LOSO:
      for (const auto& p : people) {
        if (session > 0) {
          out.push_back(SplitScheme::loso(p, session));
          continue;
        }
        for (int s : sessions_of(inst, p)) out.push_back(SplitScheme::loso(p, s));
      }
      break;
    case SplitScheme::Kind::ObjectIndependent: {
      const std::string object = o.value("object", std::string());
      std::set<std::string> objects;
      for (const auto& i : inst) objects.insert(i.meta.object_name);
      if (!object.empty()) objects = {object};
      for (const auto& obj : objects) out.push_back(SplitScheme::object_independent(obj));
      break;
    }
    case SplitScheme::Kind::FineTuneBudget:
      for (const auto& p : people) {
        const auto sessions = sessions_of(inst, p);
        if (sessions.empty()) throw ConfigError("participant '" + p + "' has no sessions");
        out.push_back(SplitScheme::finetune_budget(p, split.budget, session > 0 ? session : sessions.back()));
      }
      break;
  }
  return out;
}

void run_train(const TrainArgs& a, bool eval_only) {
  RunConfig rc = resolve(a.c, eval_only ? "eval" : "train");
  if (rc.inputs.size() != 1) throw ConfigError("expected exactly one dataset directory");
  auto& o = rc.options;
  o["split"] = pick(a.split_opt, a.split, o, "split");
  o["participant"] = pick(a.participant_opt, a.participant, o, "participant");
  o["session"] = pick(a.session_opt, a.session, o, "session");
  o["object"] = pick(a.object_opt, a.object, o, "object");
  o["base_checkpoint"] = pick(a.base_opt, a.base_checkpoint, o, "base_checkpoint");
  const std::string base_path = o["base_checkpoint"].get<std::string>();
  int epochs = pick(a.epochs_opt, a.epochs, o, "epochs");
  if (eval_only) epochs = 0;
  if (epochs < 0) epochs = base_path.empty() ? rc.train.epochs_base : rc.train.epochs_finetune;
  o["epochs"] = epochs;
  if (epochs == 0 && base_path.empty()) throw ConfigError("evaluation without training needs --base-checkpoint");
  const ParsedSplit split = parse_split(o["split"].get<std::string>());
  rc.train.seed = rc.seed;
  rc.train.validate();

  const auto instances = load_instances(rc.inputs[0], rc.sensing);
  if (instances.empty()) throw IngestError("no instances found under " + rc.inputs[0]);
  log("loaded " + std::to_string(instances.size()) + " instances");

  const fs::path out = prepare_out(a.c.out);
  save_run_config(out / "config.json", rc);
  if (a.save_cache) write_tensor_cache(out / "cache", instances);

  const nn::Network<float> net(rc.model);
  std::optional<nn::ModelParams<float>> base;
  if (!base_path.empty()) base = nn::load_checkpoint(base_path);

  const auto schemes = fold_schemes(instances, split, o);
  std::vector<FoldResult> folds;
  for (std::size_t k = 0; k < schemes.size(); ++k) {
    const SplitPlan plan = make_split(instances, schemes[k]);
    log("fold " + plan.name + ": " + std::to_string(plan.train.size()) + " train / " +
        std::to_string(plan.test.size()) + " test");
    nn::TrainConfig cfg = rc.train;
    cfg.seed = derive_seed(rc.seed, k);
    auto params = base ? *base : net.init(rc.seed);
    const fs::path fold_dir = out / "folds" / plan.name;
    fs::create_directories(fold_dir);
    if (epochs > 0) {
      auto result = nn::train(rc.model, std::move(params), nn::refs_of(instances, plan.train), cfg, epochs,
                              nn::refs_of(instances, plan.test), [&](const nn::EpochMetrics& m) {
                                char buf[128];
                                std::snprintf(buf, sizeof buf, "  epoch %d loss %.4f train %s val %s", m.epoch,
                                              m.train_loss, report::percent(m.train_acc).c_str(),
                                              report::percent(m.val_acc.value_or(0.0)).c_str());
                                log(buf);
                              });
      params = std::move(result.params);
      nn::write_metrics_csv(fold_dir / "metrics.csv", result.log);
    }
    nn::save_checkpoint(fold_dir / "checkpoint.efck", params);
    folds.push_back(evaluate_fold(rc.model, params, instances, plan));
    log("fold " + plan.name + " accuracy " + report::percent(folds.back().accuracy));
  }

  const FoldSummary summary = fold_average(folds);
  report::write_folds_csv(out / "folds.csv", summary);
  report::write_per_class_csv(out / "per_class.csv", summary.total);
  report::write_json(out / "summary.json", report::summary_json(summary));
  report::write_confusion_png(out / "confusion.png", summary.total);
  log("mean accuracy over " + std::to_string(folds.size()) + " fold(s): " + report::percent(summary.mean_accuracy));
}

void add_train_flags(CLI::App* cmd, TrainArgs& a, bool eval_only) {
  add_common(cmd, a.c, "Dataset directory (session containers or a tensor cache)");
  a.split_opt = cmd->add_option("--split", a.split, kSplitHelp);
  a.participant_opt = cmd->add_option("--participant", a.participant, "Target participant (default: every one)");
  a.session_opt = cmd->add_option("--session", a.session, "Held-out session (default: every one)");
  a.object_opt = cmd->add_option("--object", a.object, "Held-out object (default: every one)");
  a.base_opt = cmd->add_option("--base-checkpoint", a.base_checkpoint, "Start from this checkpoint");
  if (!eval_only) {
    a.epochs_opt = cmd->add_option("--epochs", a.epochs, "Epochs (0 evaluates the base checkpoint)");
    cmd->add_flag("--save-cache", a.save_cache, "Write the sliced tensors as a cache under <out>/cache");
  } else {
    a.epochs_opt = cmd->add_option("--epochs", a.epochs, "Ignored; eval never trains");
  }
}

}  // namespace

int main(int argc, char** argv) {
  echoforge::retain_freed_memory();
  CLI::App app{"echoforge: acoustic echo-profile microgesture toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Render microphone WAVs from a scene file");
  add_common(simulate, sim.c, "Scene JSON file");
  sim.duration_opt = simulate->add_option("--duration", sim.duration, "Override duration (multiple of 0.012 s)");

  ProfileArgs prof;
  auto* profile = app.add_subcommand("profile", "Compute echo and differential profiles from WAVs");
  add_common(profile, prof.c, "mic1.wav [mic2.wav]");
  prof.png_opt = profile->add_flag("--png", prof.png, "Also render heatmap PNGs");
  prof.assert_opt = profile->add_option("--assert-row", prof.assert_row,
                                        "Fail unless every interior column peaks within 1 bin of this distance bin");
  prof.assert_channel_opt = profile->add_option("--assert-channel", prof.assert_channel, "Channel for --assert-row");
  prof.start_bin_opt = profile->add_option("--start-bin", prof.start_bin, "First distance bin kept");
  prof.bins_opt = profile->add_option("--bins", prof.bins, "Number of distance bins kept");

  SynthArgs syn;
  auto* synth = app.add_subcommand("synth-corpus", "Write a synthetic multi-participant session corpus");
  add_common(synth, syn.c, "(unused)");
  synth->add_option("--participants", syn.participants, "Number of participants");
  synth->add_option("--sessions", syn.sessions, "Sessions per participant");
  synth->add_option("--repetitions", syn.repetitions, "Repetitions of each gesture per session");
  synth->add_option("--spread", syn.spread, "Geometry spread in metres");
  synth->add_option("--noise", syn.noise, "Noise RMS");
  synth->add_option("--object", syn.object, "Object name recorded in the manifests");

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train and evaluate over the folds of a split");
  add_train_flags(train, tr, false);
  TrainArgs ev;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint over the folds of a split");
  add_train_flags(eval, ev, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*simulate) run_simulate(sim);
    if (*profile) run_profile(prof);
    if (*synth) run_synth(syn);
    if (*train) run_train(tr, false);
    if (*eval) run_train(ev, true);
  } catch (const AssertionFailed& e) {
    log(std::string("assertion failed: ") + e.what());
    return kExitAssert;
  } catch (const ConfigError& e) {
    log(std::string("usage error: ") + e.what());
    return kExitUsage;
  } catch (const IngestError& e) {
    log(std::string("data error: ") + e.what());
    return kExitIngest;
  } catch (const NumericError& e) {
    log(std::string("numeric error: ") + e.what());
    return kExitNumeric;
  } catch (const DesignError& e) {
    log(std::string("filter design error: ") + e.what());
    return kExitUsage;
  } catch (const ShapeError& e) {
    log(std::string("shape error: ") + e.what());
    return kExitIngest;
  } catch (const fs::filesystem_error& e) {
    log(std::string("file error: ") + e.what());
    return kExitIngest;
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return 1;
  }
  return kExitOk;
}
