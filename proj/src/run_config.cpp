#include "echoforge/run_config.hpp"

#include <fstream>

#include "echoforge/errors.hpp"

namespace echoforge {

using nlohmann::json;

namespace {

json sweep_json(const SweepConfig& s) {
  return {{"f_start", s.f_start}, {"f_end", s.f_end},         {"duration", s.duration},
          {"sample_rate", s.sample_rate}, {"amplitude", s.amplitude}, {"taper", s.taper}};
}

SweepConfig sweep_from(const json& j, SweepConfig s) {
  s.f_start = j.value("f_start", s.f_start);
  s.f_end = j.value("f_end", s.f_end);
  s.duration = j.value("duration", s.duration);
  s.sample_rate = j.value("sample_rate", s.sample_rate);
  s.amplitude = j.value("amplitude", s.amplitude);
  s.taper = j.value("taper", s.taper);
  return s;
}

json filter_json(const FilterSpec& f) {
  return {{"pass_low", f.pass_low},
          {"pass_high", f.pass_high},
          {"transition_width", f.transition_width},
          {"stop_attenuation", f.stop_attenuation},
          {"tap_count", f.tap_count}};
}

FilterSpec filter_from(const json& j, FilterSpec f) {
  f.pass_low = j.value("pass_low", f.pass_low);
  f.pass_high = j.value("pass_high", f.pass_high);
  f.transition_width = j.value("transition_width", f.transition_width);
  f.stop_attenuation = j.value("stop_attenuation", f.stop_attenuation);
  f.tap_count = j.value("tap_count", f.tap_count);
  return f;
}

}  // namespace

json to_json(const SensingConfig& s) {
  return {{"speaker1", sweep_json(s.speaker1)},
          {"speaker2", sweep_json(s.speaker2)},
          {"filter1", filter_json(s.filter1)},
          {"filter2", filter_json(s.filter2)},
          {"start_bin", s.start_bin}};
}

SensingConfig sensing_from_json(const json& j) {
  SensingConfig s;
  if (j.contains("speaker1")) s.speaker1 = sweep_from(j.at("speaker1"), s.speaker1);
  if (j.contains("speaker2")) s.speaker2 = sweep_from(j.at("speaker2"), s.speaker2);
  if (j.contains("filter1")) s.filter1 = filter_from(j.at("filter1"), s.filter1);
  if (j.contains("filter2")) s.filter2 = filter_from(j.at("filter2"), s.filter2);
  s.start_bin = j.value("start_bin", s.start_bin);
  return s;
}

json to_json(const RunConfig& rc) {
  return {{"format", "echoforge-run"},
          {"version", 1},
          {"subcommand", rc.subcommand},
          {"inputs", rc.inputs},
          {"seed", rc.seed},
          {"sensing", to_json(rc.sensing)},
          {"model", nn::to_json(rc.model)},
          {"train", nn::to_json(rc.train)},
          {"options", rc.options}};
}

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  RunConfig rc;
  try {
    rc.subcommand = j.value("subcommand", rc.subcommand);
    rc.inputs = j.value("inputs", rc.inputs);
    rc.seed = j.value("seed", rc.seed);
    if (j.contains("sensing")) rc.sensing = sensing_from_json(j.at("sensing"));
    if (j.contains("model")) rc.model = nn::model_spec_from_json(j.at("model"));
    if (j.contains("train")) rc.train = nn::train_config_from_json(j.at("train"));
    if (j.contains("options")) rc.options = j.at("options");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed run config: ") + e.what());
  }
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return run_config_from_json(j);
}

void save_run_config(const std::filesystem::path& path, const RunConfig& rc) {
  std::ofstream os(path);
  if (!os) throw IngestError("cannot write " + path.string());
  os << to_json(rc).dump(2) << '\n';
}

}  // namespace echoforge
