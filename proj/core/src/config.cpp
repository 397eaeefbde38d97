#include "hieract/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "hieract/error.hpp"
#include "json.hpp"

namespace hieract {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& msg) { fail(ErrorCategory::kConfig, "config: " + msg); }

/// Reads keys from one JSON object and rejects anything it was not asked for.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) config_error("'" + where_ + "' must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      config_error("'" + path(key) + "' has the wrong type");
    }
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    static const json kEmpty = json::object();
    return Section(j_.contains(key) ? j_.at(key) : kEmpty, path(key));
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string path(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) config_error("unknown key '" + path(key) + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

SamplingMode parse_mode(const std::string& s, const std::string& where) {
  if (s == "train_random") return SamplingMode::kTrainRandom;
  if (s == "test_center") return SamplingMode::kTestCenter;
  if (s == "test_multi") return SamplingMode::kTestMulti;
  config_error("'" + where + "' must be train_random, test_center or test_multi");
}

json triple_json(const ops::Triple& t) { return json::array({t[0], t[1], t[2]}); }

template <typename T>
json per_level(const std::array<T, 3>& values) {
  json j = json::object();
  for (Level l : kAllLevels) j[std::string(level_name(l))] = values[level_index(l)];
  return j;
}

template <typename T>
void read_per_level(Section& parent, const std::string& key, std::array<T, 3>& out) {
  Section s = parent.child(key);
  for (Level l : kAllLevels) s.get(std::string(level_name(l)), out[level_index(l)]);
  s.finish();
}

json optim_json(const OptimizerConfig& o) {
  return {{"learning_rate", o.learning_rate}, {"momentum", o.momentum},
          {"weight_decay", o.weight_decay},   {"grad_clip_norm", o.grad_clip_norm},
          {"lr_decay_epochs", o.lr_decay_epochs}, {"lr_decay_factor", o.lr_decay_factor},
          {"epochs", o.epochs},               {"batch_size", o.batch_size}};
}

void read_optim(Section s, OptimizerConfig& o) {
  s.get("learning_rate", o.learning_rate);
  s.get("momentum", o.momentum);
  s.get("weight_decay", o.weight_decay);
  s.get("grad_clip_norm", o.grad_clip_norm);
  s.get("lr_decay_epochs", o.lr_decay_epochs);
  s.get("lr_decay_factor", o.lr_decay_factor);
  s.get("epochs", o.epochs);
  s.get("batch_size", o.batch_size);
  s.finish();
}

std::string resolve(const std::string& p, const fs::path& base) {
  if (p.empty() || base.empty()) return p;
  fs::path path(p);
  return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

}  // namespace

std::string_view sampling_mode_name(SamplingMode mode) {
  switch (mode) {
    case SamplingMode::kTrainRandom: return "train_random";
    case SamplingMode::kTestCenter: return "test_center";
    case SamplingMode::kTestMulti: return "test_multi";
  }
  return "?";
}

PathwayConfig RunConfig::pathway_config(Level level) const {
  const auto& s = sampling[level_index(level)];
  const auto& p = pathways[level_index(level)];
  PathwayConfig c;
  c.num_frames = s.num_frames;
  c.spatial_size = s.crop_size;
  c.base_channels = p.base_channels;
  c.feature_dim = p.feature_dim;
  c.first_kernel = p.first_kernel;
  c.preset = p.preset;
  c.temporal_stride = p.temporal_stride;
  c.tiny_stages = p.tiny_stages;
  return c;
}

void RunConfig::validate() const {
  auto wrap = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      if (e.category() == ErrorCategory::kConfig) throw;
      config_error(e.what());
    }
  };
  for (Level l : kAllLevels) {
    wrap([&] { sampling[level_index(l)].validate(); });
    wrap([&] { pathway_config(l).validate(); });
    if (sampling[level_index(l)].level != l) config_error("sampling level mismatch");
    if (sampling[level_index(l)].crop_size > preprocess.scale)
      config_error("crop_size for " + std::string(level_name(l)) + " exceeds preprocess.scale");
  }
  if (preprocess.scale < 1) config_error("preprocess.scale must be >= 1");
  for (double s : preprocess.normalization.stddev)
    if (!(s > 0)) config_error("preprocess.std entries must be > 0");
  wrap([&] { head.validate(); });
  base_optim.validate();
  joint_optim.validate();
  wrap([&] { loss_weights.validate(); });
  if (joint.train_mode == SamplingMode::kTestMulti) config_error("joint.train_mode must be train_random or test_center");
  if (eval.base_clips < 1 || eval.joint_clips < 1) config_error("eval clip counts must be >= 1");
}

RunConfig paper_run_config() {
  RunConfig c;
  for (Level l : kAllLevels) {
    auto& p = c.pathways[level_index(l)];
    p.preset = DepthPreset::kPaperResnet50;
    p.base_channels = 64;
    p.feature_dim = 2048;
    p.temporal_stride = 1;
  }
  c.head = JointHeadConfig{};
  return c;
}

RunConfig desk_run_config() {
  RunConfig c;
  c.seed = 2024;
  c.preprocess.scale = 32;
  c.sampling = {SamplingSpec{4, 16, 28, Level::kEvent}, SamplingSpec{8, 8, 28, Level::kSet},
                SamplingSpec{32, 2, 28, Level::kElement}};
  for (auto& p : c.pathways) p = PathwaySettings{};
  c.head.encoder_dims = {16, 32, 64};
  c.head.fusion_dim = 64;
  c.head.input_dims = {64, 64, 64};
  c.base_optim.epochs = 30;
  c.base_optim.lr_decay_epochs = {22, 27};
  c.base_optim.batch_size = 8;
  c.joint_optim.epochs = 60;
  c.joint_optim.lr_decay_epochs = {};
  c.joint_optim.batch_size = 8;
  return c;
}

RunConfig parse_run_config(std::string_view text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    config_error(std::string("not valid JSON: ") + e.what());
  }
  RunConfig c = desk_run_config();
  Section root(j, "");
  root.get("seed", c.seed);
  {
    Section p = root.child("paths");
    p.get("taxonomy", c.paths.taxonomy);
    p.get("train_manifest", c.paths.train_manifest);
    p.get("eval_manifest", c.paths.eval_manifest);
    p.get("output_dir", c.paths.output_dir);
    p.get("joint_checkpoint", c.paths.joint_checkpoint);
    read_per_level(p, "base_checkpoints", c.paths.base_checkpoints);
    p.finish();
    for (auto* s : {&c.paths.taxonomy, &c.paths.train_manifest, &c.paths.eval_manifest, &c.paths.output_dir,
                    &c.paths.joint_checkpoint, &c.paths.base_checkpoints[0], &c.paths.base_checkpoints[1],
                    &c.paths.base_checkpoints[2]})
      *s = resolve(*s, base_dir);
  }
  {
    Section p = root.child("preprocess");
    p.get("scale", c.preprocess.scale);
    p.get("mean", c.preprocess.normalization.mean);
    p.get("std", c.preprocess.normalization.stddev);
    p.finish();
  }
  {
    Section s = root.child("sampling");
    for (Level l : kAllLevels) {
      Section e = s.child(std::string(level_name(l)));
      auto& spec = c.sampling[level_index(l)];
      e.get("num_frames", spec.num_frames);
      e.get("interval", spec.interval);
      e.get("crop_size", spec.crop_size);
      spec.level = l;
      e.finish();
    }
    s.finish();
  }
  {
    Section s = root.child("pathways");
    for (Level l : kAllLevels) {
      Section e = s.child(std::string(level_name(l)));
      auto& p = c.pathways[level_index(l)];
      std::string preset(depth_preset_name(p.preset));
      e.get("preset", preset);
      try {
        p.preset = parse_depth_preset(preset);
      } catch (const Error&) {
        config_error("'" + e.path("preset") + "' must be tiny or paper_resnet50");
      }
      e.get("base_channels", p.base_channels);
      e.get("feature_dim", p.feature_dim);
      e.get("first_kernel", p.first_kernel);
      e.get("temporal_stride", p.temporal_stride);
      e.get("tiny_stages", p.tiny_stages);
      e.finish();
    }
    s.finish();
  }
  {
    Section h = root.child("head");
    read_per_level(h, "encoder_dims", c.head.encoder_dims);
    h.get("fusion_dim", c.head.fusion_dim);
    h.get("encoder_activation", c.head.encoder_activation);
    h.get("fusion_activation", c.head.fusion_activation);
    h.get("dropout", c.head.dropout);
    h.finish();
  }
  {
    Section o = root.child("optim");
    read_optim(o.child("base"), c.base_optim);
    read_optim(o.child("joint"), c.joint_optim);
    o.finish();
  }
  {
    Section w = root.child("loss_weights");
    w.get("event", c.loss_weights.event);
    w.get("set", c.loss_weights.set);
    w.get("element", c.loss_weights.element);
    w.finish();
  }
  {
    Section s = root.child("joint");
    std::string mode(sampling_mode_name(c.joint.train_mode));
    s.get("train_mode", mode);
    c.joint.train_mode = parse_mode(mode, s.path("train_mode"));
    s.get("cache_features", c.joint.cache_features);
    s.finish();
  }
  {
    Section s = root.child("eval");
    s.get("base_clips", c.eval.base_clips);
    s.get("joint_clips", c.eval.joint_clips);
    std::string agg = c.eval.aggregation == ScoreAggregation::kProbability ? "probability" : "logit";
    s.get("aggregation", agg);
    if (agg == "probability") c.eval.aggregation = ScoreAggregation::kProbability;
    else if (agg == "logit") c.eval.aggregation = ScoreAggregation::kLogit;
    else config_error("'eval.aggregation' must be probability or logit");
    s.finish();
  }
  {
    Section s = root.child("synth");
    auto& sp = c.synth;
    s.get("events", sp.events);
    s.get("sets", sp.sets);
    s.get("elements", sp.elements);
    s.get("set_parents", sp.set_parents);
    s.get("element_parents", sp.element_parents);
    s.get("clips_per_element", sp.clips_per_element);
    s.get("frames_per_clip", sp.frames_per_clip);
    s.get("frame_size", sp.frame_size);
    s.get("noise_level", sp.noise_level);
    s.get("seed", sp.seed);
    s.get("train_fraction", sp.train_fraction);
    std::string storage = sp.storage == ClipStorage::kY4m ? "y4m" : "frames";
    s.get("storage", storage);
    if (storage == "frames") sp.storage = ClipStorage::kFrameDirectory;
    else if (storage == "y4m") sp.storage = ClipStorage::kY4m;
    else config_error("'synth.storage' must be frames or y4m");
    s.finish();
  }
  root.finish();
  for (Level l : kAllLevels) c.head.input_dims[level_index(l)] = c.pathways[level_index(l)].feature_dim;
  c.validate();
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), fs::absolute(path).parent_path());
}

std::string run_config_to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["paths"] = {{"taxonomy", c.paths.taxonomy},
                {"train_manifest", c.paths.train_manifest},
                {"eval_manifest", c.paths.eval_manifest},
                {"output_dir", c.paths.output_dir},
                {"base_checkpoints", per_level(c.paths.base_checkpoints)},
                {"joint_checkpoint", c.paths.joint_checkpoint}};
  j["preprocess"] = {{"scale", c.preprocess.scale},
                     {"mean", c.preprocess.normalization.mean},
                     {"std", c.preprocess.normalization.stddev}};
  json sampling = json::object(), pathways = json::object();
  for (Level l : kAllLevels) {
    const auto& s = c.sampling[level_index(l)];
    sampling[std::string(level_name(l))] = {
        {"num_frames", s.num_frames}, {"interval", s.interval}, {"crop_size", s.crop_size}};
    const auto& p = c.pathways[level_index(l)];
    pathways[std::string(level_name(l))] = {{"preset", depth_preset_name(p.preset)},
                                            {"base_channels", p.base_channels},
                                            {"feature_dim", p.feature_dim},
                                            {"first_kernel", triple_json(p.first_kernel)},
                                            {"temporal_stride", p.temporal_stride},
                                            {"tiny_stages", p.tiny_stages}};
  }
  j["sampling"] = sampling;
  j["pathways"] = pathways;
  j["head"] = {{"encoder_dims", per_level(c.head.encoder_dims)},
               {"fusion_dim", c.head.fusion_dim},
               {"encoder_activation", c.head.encoder_activation},
               {"fusion_activation", c.head.fusion_activation},
               {"dropout", c.head.dropout}};
  j["optim"] = {{"base", optim_json(c.base_optim)}, {"joint", optim_json(c.joint_optim)}};
  j["loss_weights"] = {{"event", c.loss_weights.event}, {"set", c.loss_weights.set}, {"element", c.loss_weights.element}};
  j["joint"] = {{"train_mode", sampling_mode_name(c.joint.train_mode)}, {"cache_features", c.joint.cache_features}};
  j["eval"] = {{"base_clips", c.eval.base_clips},
               {"joint_clips", c.eval.joint_clips},
               {"aggregation", c.eval.aggregation == ScoreAggregation::kProbability ? "probability" : "logit"}};
  const auto& sp = c.synth;
  j["synth"] = {{"events", sp.events},
                {"sets", sp.sets},
                {"elements", sp.elements},
                {"set_parents", sp.set_parents},
                {"element_parents", sp.element_parents},
                {"clips_per_element", sp.clips_per_element},
                {"frames_per_clip", sp.frames_per_clip},
                {"frame_size", sp.frame_size},
                {"noise_level", sp.noise_level},
                {"seed", sp.seed},
                {"train_fraction", sp.train_fraction},
                {"storage", sp.storage == ClipStorage::kY4m ? "y4m" : "frames"}};
  return j.dump(2);
}

}  // namespace hieract
