#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hieract/checkpoint.hpp"
#include "hieract/dataset.hpp"
#include "hieract/evaluation.hpp"
#include "hieract/fusion_head.hpp"
#include "hieract/loss.hpp"
#include "hieract/optim.hpp"
#include "hieract/pathway.hpp"
#include "hieract/sampling.hpp"

namespace hieract {

/// One line of the metrics stream. Levels not trained in a stage are absent.
struct MetricsRecord {
  std::string stage;  // "base" or "joint"
  std::int64_t step = 0;
  int epoch = 0;
  double lr = 0.0;
  std::array<std::optional<double>, 3> loss;      // batch mean per level
  std::array<std::optional<double>, 3> accuracy;  // batch top-1 per level
  double total_loss = 0.0;
  double grad_norm = 0.0;  // before clipping
};

using MetricsSink = std::function<void(const MetricsRecord&)>;

std::string metrics_to_json_line(const MetricsRecord& record);
MetricsRecord metrics_from_json_line(const std::string& line);

/// Optimiser bookkeeping; frozen digests are only populated in stage 2.
struct TrainState {
  int epoch = 0;
  std::int64_t step = 0;
  std::uint64_t rng_seed = 0;
  double best_metric = 0.0;
  std::array<std::string, 3> frozen_digests;
};

/// Input tensor for one pathway view of one sample.
struct ClipView {
  int start = 0;
  CropOffset crop;
  Tensor clip;  // [T, crop, crop, 3]
};

/// Per-sample seed shared by the three pathways: the temporal start of every
/// pathway derives from the same anchor, and the crop from a sibling stream.
std::uint64_t sample_seed(std::uint64_t run_seed, std::uint64_t stage_tag, int epoch, std::size_t index);

/// Builds the view of `index` for one pathway. In train mode `seed` drives the
/// shared start anchor and a random crop; test modes use the centred crop and
/// the `clip_slot`-th of `clips` evenly spaced starts.
ClipView sample_view(const ClipStore& store, std::size_t index, const SamplingSpec& spec,
                     const PreprocessConfig& preprocess, SamplingMode mode, std::uint64_t seed,
                     int clip_slot = 0, int clips = 1);

/// A trained (or loaded) stage-1 model.
struct BaseModel {
  Level level = Level::kEvent;
  SamplingSpec sampling;
  PreprocessConfig preprocess;
  std::uint64_t seed = 0;
  Pathway pathway;
  ClassifierHead classifier;
  std::string metrics_json = "{}";

  BaseModel(Level level, const PathwayConfig& config, const SamplingSpec& sampling,
            const PreprocessConfig& preprocess, int class_count, std::uint64_t seed);
  /// Digest of "pathway/" and "classifier/" tensors as stored in the checkpoint.
  std::string digest() const;
};

struct BaseTrainOptions {
  Level level = Level::kEvent;
  PathwayConfig pathway;
  SamplingSpec sampling;
  PreprocessConfig preprocess;
  OptimizerConfig optim = OptimizerConfig::base_defaults();
  std::uint64_t seed = 0;
  MetricsSink sink;
  std::filesystem::path dump_dir;    // divergence state goes here when set
  const ClipStore* validation = nullptr;
  int eval_clips = 1;
};

struct BaseTrainResult {
  BaseModel model;
  TrainState state;
  double train_top1 = 0.0;
  std::optional<double> val_top1;
};

BaseTrainResult train_base(const ClipStore& train, const Taxonomy& taxonomy, const BaseTrainOptions& options);

Checkpoint base_to_checkpoint(const BaseModel& model);
BaseModel base_from_checkpoint(const Checkpoint& checkpoint);
void save_base(const std::filesystem::path& path, const BaseModel& model);
BaseModel load_base(const std::filesystem::path& path);

/// Stage-2 model: frozen bases plus the trained joint head.
struct JointModel {
  std::array<std::optional<BaseModel>, 3> bases;
  std::array<std::string, 3> base_paths;
  std::array<std::string, 3> base_digests;
  LossWeights loss_weights;
  std::uint64_t seed = 0;
  JointHead head;
  std::string metrics_json = "{}";

  explicit JointModel(const JointHeadConfig& config, std::uint64_t seed = 0) : seed(seed), head(config, seed) {}
  const BaseModel& base(Level level) const;
};

struct JointTrainOptions {
  JointHeadConfig head;  // input_dims and class_counts are taken from the bases/taxonomy
  OptimizerConfig optim = OptimizerConfig::joint_defaults();
  LossWeights loss_weights;
  std::uint64_t seed = 0;
  SamplingMode train_mode = SamplingMode::kTrainRandom;
  bool cache_features = false;
  MetricsSink sink;
  std::filesystem::path dump_dir;
};

struct JointTrainResult {
  JointHeadConfig head_config;
  std::optional<JointHead> head;
  TrainState state;
  std::array<std::string, 3> digests_before;
  std::array<std::string, 3> digests_after;
  std::array<double, 3> train_top1{};
  std::size_t feature_cache_hits = 0;
};

/// Bases are read-only inputs; their digests are checked before and after.
JointTrainResult train_joint(const std::array<const BaseModel*, 3>& bases, const ClipStore& train,
                             const Taxonomy& taxonomy, const JointTrainOptions& options);

/// Features of one sample for the three pathways (all aligned on one anchor
/// in train mode, or on shared centre/multi starts in test modes).
std::array<std::vector<double>, 3> per_clip_forward_pipeline(const std::array<const BaseModel*, 3>& bases,
                                                             const ClipStore& store, std::size_t index,
                                                             SamplingMode mode, std::uint64_t seed,
                                                             int clip_slot = 0, int clips = 1);

Checkpoint joint_to_checkpoint(const JointModel& model);
void save_joint(const std::filesystem::path& path, const JointModel& model);
/// Loads the head and re-reads each referenced base, verifying its digest.
JointModel load_joint(const std::filesystem::path& path);

/// Scores for a base model on its own level; other levels are left empty.
std::vector<PredictionRecord> predict_base(const BaseModel& model, const ClipStore& store, int clips,
                                           ScoreAggregation aggregation);
std::vector<PredictionRecord> predict_joint(const JointModel& model, const ClipStore& store, int clips,
                                            ScoreAggregation aggregation);

}  // namespace hieract
