#include "hieract/training.hpp"

#include <cmath>
#include <map>
#include <numeric>

#include "hieract/error.hpp"
#include "hieract/rng.hpp"
#include "json.hpp"

namespace hieract {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kBaseTag = 0xB45E;
constexpr std::uint64_t kJointTag = 0x1012;
constexpr std::uint64_t kOrderStream = 0x0D;
constexpr std::uint64_t kDropoutStream = 0xD0;

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::uint64_t tag, int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, {tag, kOrderStream, static_cast<std::uint64_t>(epoch)}));
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

json triple_json(const ops::Triple& t) { return json::array({t[0], t[1], t[2]}); }

json pathway_json(const PathwayConfig& c) {
  return {{"preset", depth_preset_name(c.preset)}, {"num_frames", c.num_frames},
          {"spatial_size", c.spatial_size},        {"base_channels", c.base_channels},
          {"feature_dim", c.feature_dim},          {"first_kernel", triple_json(c.first_kernel)},
          {"temporal_stride", c.temporal_stride},  {"tiny_stages", c.tiny_stages}};
}

PathwayConfig pathway_from_json(const json& j) {
  PathwayConfig c;
  c.preset = parse_depth_preset(j.at("preset").get<std::string>());
  c.num_frames = j.at("num_frames").get<int>();
  c.spatial_size = j.at("spatial_size").get<int>();
  c.base_channels = j.at("base_channels").get<int>();
  c.feature_dim = j.at("feature_dim").get<int>();
  const auto k = j.at("first_kernel").get<std::vector<int>>();
  require(k.size() == 3, ErrorCategory::kCheckpoint, "checkpoint: first_kernel must have 3 extents");
  c.first_kernel = {k[0], k[1], k[2]};
  c.temporal_stride = j.at("temporal_stride").get<int>();
  c.tiny_stages = j.at("tiny_stages").get<int>();
  return c;
}

json head_json(const JointHeadConfig& c) {
  return {{"encoder_dims", c.encoder_dims},
          {"fusion_dim", c.fusion_dim},
          {"class_counts", c.class_counts},
          {"input_dims", c.input_dims},
          {"encoder_activation", c.encoder_activation},
          {"fusion_activation", c.fusion_activation},
          {"dropout", c.dropout}};
}

JointHeadConfig head_from_json(const json& j) {
  JointHeadConfig c;
  c.encoder_dims = j.at("encoder_dims").get<std::array<int, 3>>();
  c.fusion_dim = j.at("fusion_dim").get<int>();
  c.class_counts = j.at("class_counts").get<std::array<int, 3>>();
  c.input_dims = j.at("input_dims").get<std::array<int, 3>>();
  c.encoder_activation = j.at("encoder_activation").get<bool>();
  c.fusion_activation = j.at("fusion_activation").get<bool>();
  c.dropout = j.at("dropout").get<double>();
  return c;
}

json state_json(const TrainState& s) {
  return {{"epoch", s.epoch},
          {"step", s.step},
          {"rng_seed", s.rng_seed},
          {"best_metric", s.best_metric},
          {"frozen_digests", s.frozen_digests}};
}

void dump_state(const fs::path& dir, const std::string& stage, const TrainState& state,
                const std::vector<const ParamStore*>& stores, const std::string& reason) {
  if (dir.empty()) return;
  try {
    fs::create_directories(dir);
    Checkpoint dump;
    dump.kind = "divergence";
    dump.metadata_json = json{{"stage", stage}, {"state", state_json(state)}, {"reason", reason}}.dump();
    for (const ParamStore* s : stores) append_params(dump, *s);
    write_checkpoint(dir / (stage + "_divergence_state.ckpt"), dump);
  } catch (const std::exception&) {
    // The divergence error is what the caller must see; a failed dump is secondary.
  }
}

void check_trainable_split(const ClipStore& store, const Taxonomy& taxonomy) {
  require(store.size() > 0, ErrorCategory::kData, "empty dataset");
  validate_manifest(store.manifest(), taxonomy);
}

std::vector<double> to_scores(std::vector<double> logits, ScoreAggregation aggregation) {
  return aggregation == ScoreAggregation::kProbability ? softmax(logits) : logits;
}

std::vector<double> combine(const std::vector<std::vector<double>>& per_clip, ScoreAggregation aggregation) {
  return aggregation == ScoreAggregation::kProbability ? aggregate_clips(per_clip) : aggregate_logits(per_clip);
}

SamplingMode test_mode(int clips) { return clips == 1 ? SamplingMode::kTestCenter : SamplingMode::kTestMulti; }

}  // namespace

std::string metrics_to_json_line(const MetricsRecord& r) {
  json j;
  j["stage"] = r.stage;
  j["step"] = r.step;
  j["epoch"] = r.epoch;
  j["lr"] = r.lr;
  json loss = json::object(), acc = json::object();
  for (Level l : kAllLevels) {
    const std::string key(level_name(l));
    if (r.loss[level_index(l)]) loss[key] = *r.loss[level_index(l)];
    if (r.accuracy[level_index(l)]) acc[key] = *r.accuracy[level_index(l)];
  }
  j["loss"] = loss;
  j["accuracy"] = acc;
  j["total_loss"] = r.total_loss;
  j["grad_norm"] = r.grad_norm;
  return j.dump();
}

MetricsRecord metrics_from_json_line(const std::string& line) {
  MetricsRecord r;
  try {
    const json j = json::parse(line);
    r.stage = j.at("stage").get<std::string>();
    r.step = j.at("step").get<std::int64_t>();
    r.epoch = j.at("epoch").get<int>();
    r.lr = j.at("lr").get<double>();
    for (Level l : kAllLevels) {
      const std::string key(level_name(l));
      if (j.at("loss").contains(key)) r.loss[level_index(l)] = j["loss"][key].get<double>();
      if (j.at("accuracy").contains(key)) r.accuracy[level_index(l)] = j["accuracy"][key].get<double>();
    }
    r.total_loss = j.at("total_loss").get<double>();
    r.grad_norm = j.at("grad_norm").get<double>();
  } catch (const json::exception& e) {
    fail(ErrorCategory::kData, std::string("malformed metrics line: ") + e.what());
  }
  return r;
}

std::uint64_t sample_seed(std::uint64_t run_seed, std::uint64_t stage_tag, int epoch, std::size_t index) {
  return derive_seed(run_seed, {stage_tag, static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(index)});
}

ClipView sample_view(const ClipStore& store, std::size_t index, const SamplingSpec& spec,
                     const PreprocessConfig& preprocess, SamplingMode mode, std::uint64_t seed, int clip_slot,
                     int clips) {
  const int n = store.frame_count(index);
  ClipSelection selection = ClipSelection::test_center();
  if (mode == SamplingMode::kTrainRandom) selection = ClipSelection::train_random();
  if (mode == SamplingMode::kTestMulti) selection = ClipSelection::test_multi(clips);
  const FrameIndexPlan plan = plan_indices(n, spec, selection, seed);
  const auto slot = static_cast<std::size_t>(mode == SamplingMode::kTestMulti ? clip_slot : 0);
  require(slot < plan.clips.size(), ErrorCategory::kInvalidArgument, "sample_view: clip slot out of range");

  const auto& frames = store.frames(index);
  std::vector<Frame> picked;
  picked.reserve(plan.clips[slot].size());
  for (int f : plan.clips[slot]) picked.push_back(frames.at(static_cast<std::size_t>(f)));

  ClipView view;
  view.start = plan.starts[slot];
  const CropMode crop = mode == SamplingMode::kTrainRandom ? CropMode::kRandom : CropMode::kCenter;
  view.clip = crop_and_scale(picked, spec.crop_size, preprocess, crop, seed, &view.crop);
  return view;
}

// ---------------------------------------------------------------- stage 1

BaseModel::BaseModel(Level level, const PathwayConfig& config, const SamplingSpec& sampling,
                     const PreprocessConfig& preprocess, int class_count, std::uint64_t seed)
    : level(level),
      sampling(sampling),
      preprocess(preprocess),
      seed(seed),
      pathway(config, level, derive_seed(seed, {kBaseTag, 1})),
      classifier(config.feature_dim, class_count, derive_seed(seed, {kBaseTag, 2})) {}

std::string BaseModel::digest() const {
  std::map<std::string, const Tensor*> named;
  for (const auto& p : pathway.params().entries()) named.emplace(p.name, &p.value);
  for (const auto& p : classifier.params().entries()) named.emplace(p.name, &p.value);
  return digest_named_tensors(named);
}

BaseTrainResult train_base(const ClipStore& train, const Taxonomy& taxonomy, const BaseTrainOptions& o) {
  check_trainable_split(train, taxonomy);
  o.optim.validate();
  o.pathway.validate();
  o.sampling.validate();
  require(o.pathway.num_frames == o.sampling.num_frames && o.pathway.spatial_size == o.sampling.crop_size,
          ErrorCategory::kConfig, "train_base: pathway shape does not match the sampling spec");
  const int classes = taxonomy.count(o.level);
  for (const auto& r : train.manifest().records) {
    const int y = r.labels.at(o.level);
    require(y >= 0 && y < classes, ErrorCategory::kData,
            "label out of range: " + std::string(level_name(o.level)) + " id " + std::to_string(y));
  }

  BaseTrainResult result{BaseModel(o.level, o.pathway, o.sampling, o.preprocess, classes, o.seed), {}, 0.0, {}};
  BaseModel& model = result.model;
  TrainState& state = result.state;
  state.rng_seed = o.seed;
  SgdMomentum opt({&model.pathway.params(), &model.classifier.params()}, o.optim);
  auto cache = model.pathway.make_cache();
  const std::size_t n = train.size();
  const auto batch_size = static_cast<std::size_t>(o.optim.batch_size);
  double last_loss = 0.0;

  try {
    for (int epoch = 0; epoch < o.optim.epochs; ++epoch) {
      state.epoch = epoch;
      const double lr = o.optim.lr_at(epoch);
      const auto order = epoch_order(n, o.seed, kBaseTag, epoch);
      for (std::size_t begin = 0; begin < n; begin += batch_size) {
        const std::size_t end = std::min(n, begin + batch_size);
        const double inv_b = 1.0 / static_cast<double>(end - begin);
        opt.zero_grad();
        double loss_sum = 0.0;
        int correct = 0;
        for (std::size_t k = begin; k < end; ++k) {
          const std::size_t i = order[k];
          const ClipView view = sample_view(train, i, o.sampling, o.preprocess, SamplingMode::kTrainRandom,
                                            sample_seed(o.seed, kBaseTag, epoch, i));
          const FeatureVector feature = model.pathway.forward(view.clip, cache.get());
          const std::vector<double> logits = model.classifier.logits(feature.values);
          const int target = train.record(i).labels.at(o.level);
          loss_sum += cross_entropy(logits, target);
          if (argmax(logits) == target) ++correct;
          std::vector<double> g = cross_entropy_grad(logits, target);
          for (double& v : g) v *= inv_b;
          const std::vector<double> g_feature = model.classifier.backward(feature.values, g);
          model.pathway.backward(*cache, g_feature);
        }
        const double loss = loss_sum * inv_b;
        require(std::isfinite(loss), ErrorCategory::kDivergence,
                "non-finite loss at step " + std::to_string(state.step));
        const double norm = opt.step(lr);
        require(std::isfinite(norm), ErrorCategory::kDivergence,
                "non-finite gradient at step " + std::to_string(state.step));
        last_loss = loss;
        if (o.sink) {
          MetricsRecord m;
          m.stage = "base";
          m.step = state.step;
          m.epoch = epoch;
          m.lr = lr;
          m.loss[level_index(o.level)] = loss;
          m.accuracy[level_index(o.level)] = correct * inv_b;
          m.total_loss = loss;
          m.grad_norm = norm;
          o.sink(m);
        }
        ++state.step;
      }
    }
  } catch (const Error& e) {
    if (e.category() == ErrorCategory::kDivergence)
      dump_state(o.dump_dir, "base_" + std::string(level_name(o.level)), state,
                 {&model.pathway.params(), &model.classifier.params()}, e.what());
    throw;
  }

  const auto train_pred = predict_base(model, train, 1, ScoreAggregation::kProbability);
  result.train_top1 = top_k_accuracy(train_pred, o.level, 1);
  json metrics = {{"epochs", o.optim.epochs}, {"steps", state.step}, {"final_loss", last_loss},
                  {"train_top1", result.train_top1}};
  if (o.validation && o.validation->size() > 0) {
    const auto val_pred = predict_base(model, *o.validation, o.eval_clips, ScoreAggregation::kProbability);
    result.val_top1 = top_k_accuracy(val_pred, o.level, 1);
    metrics["val_top1"] = *result.val_top1;
  }
  state.best_metric = result.val_top1.value_or(result.train_top1);
  model.metrics_json = metrics.dump();
  return result;
}

Checkpoint base_to_checkpoint(const BaseModel& m) {
  Checkpoint c;
  c.kind = "base";
  const auto& n = m.preprocess.normalization;
  json meta = {{"level", level_name(m.level)},
               {"class_count", m.classifier.class_count()},
               {"seed", m.seed},
               {"pathway", pathway_json(m.pathway.config())},
               {"sampling",
                {{"num_frames", m.sampling.num_frames},
                 {"interval", m.sampling.interval},
                 {"crop_size", m.sampling.crop_size}}},
               {"preprocess", {{"scale", m.preprocess.scale}, {"mean", n.mean}, {"std", n.stddev}}},
               {"metrics", json::parse(m.metrics_json)}};
  c.metadata_json = meta.dump();
  append_params(c, m.pathway.params());
  append_params(c, m.classifier.params());
  return c;
}

BaseModel base_from_checkpoint(const Checkpoint& c) {
  require(c.kind == "base", ErrorCategory::kCheckpoint, "expected a base checkpoint, found kind '" + c.kind + "'");
  try {
    const json meta = json::parse(c.metadata_json);
    const Level level = parse_level(meta.at("level").get<std::string>());
    SamplingSpec spec;
    spec.level = level;
    spec.num_frames = meta.at("sampling").at("num_frames").get<int>();
    spec.interval = meta.at("sampling").at("interval").get<int>();
    spec.crop_size = meta.at("sampling").at("crop_size").get<int>();
    PreprocessConfig pre;
    pre.scale = meta.at("preprocess").at("scale").get<int>();
    pre.normalization.mean = meta.at("preprocess").at("mean").get<std::array<double, 3>>();
    pre.normalization.stddev = meta.at("preprocess").at("std").get<std::array<double, 3>>();
    BaseModel m(level, pathway_from_json(meta.at("pathway")), spec, pre, meta.at("class_count").get<int>(),
                meta.at("seed").get<std::uint64_t>());
    load_params(c, m.pathway.params());
    load_params(c, m.classifier.params());
    m.metrics_json = meta.at("metrics").dump();
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCategory::kCheckpoint, std::string("base checkpoint metadata: ") + e.what());
  }
}

void save_base(const fs::path& path, const BaseModel& model) { write_checkpoint(path, base_to_checkpoint(model)); }

BaseModel load_base(const fs::path& path) { return base_from_checkpoint(read_checkpoint(path)); }

// ---------------------------------------------------------------- stage 2

const BaseModel& JointModel::base(Level level) const {
  const auto& b = bases[level_index(level)];
  require(b.has_value(), ErrorCategory::kInvalidArgument,
          "joint model has no " + std::string(level_name(level)) + " base");
  return *b;
}

std::array<std::vector<double>, 3> per_clip_forward_pipeline(const std::array<const BaseModel*, 3>& bases,
                                                             const ClipStore& store, std::size_t index,
                                                             SamplingMode mode, std::uint64_t seed, int clip_slot,
                                                             int clips) {
  std::array<std::vector<double>, 3> out;
  for (Level l : kAllLevels) {
    const BaseModel* b = bases[level_index(l)];
    require(b != nullptr, ErrorCategory::kInvalidArgument, "missing pathway clip for " + std::string(level_name(l)));
    const ClipView view = sample_view(store, index, b->sampling, b->preprocess, mode, seed, clip_slot, clips);
    out[level_index(l)] = b->pathway.forward(view.clip).values;
  }
  return out;
}

JointTrainResult train_joint(const std::array<const BaseModel*, 3>& bases, const ClipStore& train,
                             const Taxonomy& taxonomy, const JointTrainOptions& o) {
  for (Level l : kAllLevels) {
    const BaseModel* b = bases[level_index(l)];
    require(b != nullptr, ErrorCategory::kInvalidArgument, "train_joint: missing " + std::string(level_name(l)) + " base");
    require(b->level == l, ErrorCategory::kInvalidArgument,
            "train_joint: base for " + std::string(level_name(l)) + " was trained on " + std::string(level_name(b->level)));
  }
  check_trainable_split(train, taxonomy);
  o.optim.validate();
  o.loss_weights.validate();
  require(o.train_mode == SamplingMode::kTrainRandom || o.train_mode == SamplingMode::kTestCenter,
          ErrorCategory::kConfig, "train_joint: train_mode must be train_random or test_center");

  JointTrainResult result;
  result.head_config = o.head;
  for (Level l : kAllLevels) result.head_config.input_dims[level_index(l)] = bases[level_index(l)]->pathway.config().feature_dim;
  result.head_config.class_counts = taxonomy.counts();
  result.head_config.validate();
  for (Level l : kAllLevels) result.digests_before[level_index(l)] = bases[level_index(l)]->digest();

  result.head.emplace(result.head_config, derive_seed(o.seed, {kJointTag, 1}));
  JointHead& head = *result.head;
  TrainState& state = result.state;
  state.rng_seed = o.seed;
  state.frozen_digests = result.digests_before;
  SgdMomentum opt({&head.params()}, o.optim);
  const std::array<double, 3> weights{o.loss_weights.event, o.loss_weights.set, o.loss_weights.element};

  // Keyed by the exact view (sample, start and crop per pathway), so a hit is bit-identical to recomputation.
  std::map<std::array<std::int64_t, 10>, std::array<std::vector<double>, 3>> cache;
  const std::size_t n = train.size();
  const auto batch_size = static_cast<std::size_t>(o.optim.batch_size);

  try {
    for (int epoch = 0; epoch < o.optim.epochs; ++epoch) {
      state.epoch = epoch;
      const double lr = o.optim.lr_at(epoch);
      const auto order = epoch_order(n, o.seed, kJointTag, epoch);
      for (std::size_t begin = 0; begin < n; begin += batch_size) {
        const std::size_t end = std::min(n, begin + batch_size);
        const double inv_b = 1.0 / static_cast<double>(end - begin);
        opt.zero_grad();
        std::array<double, 3> loss_sum{}, correct{};
        for (std::size_t k = begin; k < end; ++k) {
          const std::size_t i = order[k];
          const std::uint64_t s = sample_seed(o.seed, kJointTag, epoch, i);
          std::array<ClipView, 3> views;
          std::array<std::int64_t, 10> key{static_cast<std::int64_t>(i)};
          for (Level l : kAllLevels) {
            const BaseModel& b = *bases[level_index(l)];
            views[level_index(l)] = sample_view(train, i, b.sampling, b.preprocess, o.train_mode, s);
            key[1 + 3 * level_index(l)] = views[level_index(l)].start;
            key[2 + 3 * level_index(l)] = views[level_index(l)].crop.y;
            key[3 + 3 * level_index(l)] = views[level_index(l)].crop.x;
          }
          std::array<std::vector<double>, 3> features;
          auto hit = o.cache_features ? cache.find(key) : cache.end();
          if (hit != cache.end()) {
            features = hit->second;
            ++result.feature_cache_hits;
          } else {
            for (Level l : kAllLevels)
              features[level_index(l)] = bases[level_index(l)]->pathway.forward(views[level_index(l)].clip).values;
            if (o.cache_features) cache.emplace(key, features);
          }

          Rng dropout_rng(derive_seed(s, {kDropoutStream}));
          JointHeadCache hc;
          const JointLogits logits =
              head.forward({features[0], features[1], features[2]}, &hc,
                           result.head_config.dropout > 0.0 ? &dropout_rng : nullptr);
          const LabelTriple& y = train.record(i).labels;
          JointLogits grads;
          for (Level l : kAllLevels) {
            const std::size_t li = level_index(l);
            loss_sum[li] += cross_entropy(logits.at(l), y.at(l));
            if (argmax(logits.at(l)) == y.at(l)) correct[li] += 1.0;
            grads.at(l) = cross_entropy_grad(logits.at(l), y.at(l));
            for (double& v : grads.at(l)) v *= weights[li] * inv_b;
          }
          head.backward(hc, grads);
        }
        MetricsRecord m;
        m.stage = "joint";
        m.step = state.step;
        m.epoch = epoch;
        m.lr = lr;
        for (std::size_t li = 0; li < 3; ++li) {
          m.loss[li] = loss_sum[li] * inv_b;
          m.accuracy[li] = correct[li] * inv_b;
        }
        m.total_loss = total_loss(*m.loss[0], *m.loss[1], *m.loss[2], o.loss_weights);
        require(std::isfinite(m.total_loss), ErrorCategory::kDivergence,
                "non-finite loss at step " + std::to_string(state.step));
        m.grad_norm = opt.step(lr);
        require(std::isfinite(m.grad_norm), ErrorCategory::kDivergence,
                "non-finite gradient at step " + std::to_string(state.step));
        if (o.sink) o.sink(m);
        ++state.step;
      }
    }
  } catch (const Error& e) {
    if (e.category() == ErrorCategory::kDivergence) dump_state(o.dump_dir, "joint", state, {&head.params()}, e.what());
    throw;
  }

  for (Level l : kAllLevels) result.digests_after[level_index(l)] = bases[level_index(l)]->digest();
  require(result.digests_after == result.digests_before, ErrorCategory::kInvalidArgument,
          "train_joint: base parameters changed during stage 2");

  std::array<std::size_t, 3> hits{};
  for (std::size_t i = 0; i < n; ++i) {
    const auto f = per_clip_forward_pipeline(bases, train, i, SamplingMode::kTestCenter, 0);
    const JointLogits logits = head.forward({f[0], f[1], f[2]});
    for (Level l : kAllLevels)
      if (argmax(logits.at(l)) == train.record(i).labels.at(l)) ++hits[level_index(l)];
  }
  for (std::size_t li = 0; li < 3; ++li) result.train_top1[li] = static_cast<double>(hits[li]) / static_cast<double>(n);
  state.best_metric = result.train_top1[level_index(Level::kElement)];
  return result;
}

Checkpoint joint_to_checkpoint(const JointModel& m) {
  Checkpoint c;
  c.kind = "joint";
  json refs = json::array();
  for (Level l : kAllLevels)
    refs.push_back({{"level", level_name(l)}, {"path", m.base_paths[level_index(l)]}, {"digest", m.base_digests[level_index(l)]}});
  json meta = {{"head", head_json(m.head.config())},
               {"loss_weights", {m.loss_weights.event, m.loss_weights.set, m.loss_weights.element}},
               {"seed", m.seed},
               {"bases", refs},
               {"metrics", json::parse(m.metrics_json)}};
  c.metadata_json = meta.dump();
  append_params(c, m.head.params());
  return c;
}

void save_joint(const fs::path& path, const JointModel& model) { write_checkpoint(path, joint_to_checkpoint(model)); }

JointModel load_joint(const fs::path& path) {
  const Checkpoint c = read_checkpoint(path);
  require(c.kind == "joint", ErrorCategory::kCheckpoint, "expected a joint checkpoint, found kind '" + c.kind + "'");
  json meta;
  try {
    meta = json::parse(c.metadata_json);
    JointModel m(head_from_json(meta.at("head")), meta.at("seed").get<std::uint64_t>());
    const auto w = meta.at("loss_weights").get<std::array<double, 3>>();
    m.loss_weights = {w[0], w[1], w[2]};
    m.metrics_json = meta.at("metrics").dump();
    load_params(c, m.head.params());
    for (const auto& ref : meta.at("bases")) {
      const Level l = parse_level(ref.at("level").get<std::string>());
      const std::size_t li = level_index(l);
      fs::path base_path = ref.at("path").get<std::string>();
      if (base_path.is_relative()) base_path = path.parent_path() / base_path;
      BaseModel base = load_base(base_path);
      const std::string expected = ref.at("digest").get<std::string>();
      require(base.digest() == expected, ErrorCategory::kCheckpoint,
              "digest mismatch: base checkpoint " + base_path.string() + " differs from the one the joint head was trained on");
      require(base.level == l, ErrorCategory::kCheckpoint, "base checkpoint " + base_path.string() + " has the wrong level");
      require(base.pathway.config().feature_dim == m.head.config().input_dims[li], ErrorCategory::kCheckpoint,
              "base checkpoint " + base_path.string() + " feature dim does not match the joint head");
      m.base_paths[li] = ref.at("path").get<std::string>();
      m.base_digests[li] = expected;
      m.bases[li].emplace(std::move(base));
    }
    for (Level l : kAllLevels) (void)m.base(l);
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCategory::kCheckpoint, std::string("joint checkpoint metadata: ") + e.what());
  }
}

std::vector<PredictionRecord> predict_base(const BaseModel& model, const ClipStore& store, int clips,
                                           ScoreAggregation aggregation) {
  require(clips >= 1, ErrorCategory::kInvalidArgument, "predict: clips must be >= 1");
  std::vector<PredictionRecord> out;
  out.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    std::vector<std::vector<double>> per_clip;
    for (int slot = 0; slot < clips; ++slot) {
      const ClipView view = sample_view(store, i, model.sampling, model.preprocess, test_mode(clips), 0, slot, clips);
      per_clip.push_back(to_scores(model.classifier.logits(model.pathway.forward(view.clip).values), aggregation));
    }
    PredictionRecord r;
    r.clip_id = store.record(i).clip_path;
    r.truth = store.record(i).labels;
    r.scores[level_index(model.level)] = combine(per_clip, aggregation);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<PredictionRecord> predict_joint(const JointModel& model, const ClipStore& store, int clips,
                                            ScoreAggregation aggregation) {
  require(clips >= 1, ErrorCategory::kInvalidArgument, "predict: clips must be >= 1");
  const std::array<const BaseModel*, 3> bases{&model.base(Level::kEvent), &model.base(Level::kSet),
                                              &model.base(Level::kElement)};
  std::vector<PredictionRecord> out;
  out.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    std::array<std::vector<std::vector<double>>, 3> per_clip;
    for (int slot = 0; slot < clips; ++slot) {
      const auto f = per_clip_forward_pipeline(bases, store, i, test_mode(clips), 0, slot, clips);
      const JointLogits logits = model.head.forward({f[0], f[1], f[2]});
      for (Level l : kAllLevels) per_clip[level_index(l)].push_back(to_scores(logits.at(l), aggregation));
    }
    PredictionRecord r;
    r.clip_id = store.record(i).clip_path;
    r.truth = store.record(i).labels;
    for (Level l : kAllLevels) r.scores[level_index(l)] = combine(per_clip[level_index(l)], aggregation);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace hieract
