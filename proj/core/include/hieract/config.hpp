#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "hieract/evaluation.hpp"
#include "hieract/fusion_head.hpp"
#include "hieract/loss.hpp"
#include "hieract/optim.hpp"
#include "hieract/pathway.hpp"
#include "hieract/sampling.hpp"
#include "hieract/synthetic.hpp"

namespace hieract {


struct RunPaths {
  std::string taxonomy;
  std::string train_manifest;
  std::string eval_manifest;
  std::string output_dir;
  std::array<std::string, 3> base_checkpoints;  // per level
  std::string joint_checkpoint;

  friend bool operator==(const RunPaths&, const RunPaths&) = default;
};

/// Backbone fields not implied by the sampling spec (T and S come from it).
struct PathwaySettings {
  DepthPreset preset = DepthPreset::kTiny;
  int base_channels = 8;
  int feature_dim = 64;
  ops::Triple first_kernel{1, 7, 7};
  int temporal_stride = 2;
  int tiny_stages = 2;

  friend bool operator==(const PathwaySettings&, const PathwaySettings&) = default;
};

struct JointTrainSettings {
  SamplingMode train_mode = SamplingMode::kTrainRandom;  // kTrainRandom or kTestCenter
  bool cache_features = false;

  friend bool operator==(const JointTrainSettings&, const JointTrainSettings&) = default;
};

struct EvalSettings {
  int base_clips = 6;   // base models: multi-clip testing
  int joint_clips = 1;  // joint network: single centre clip
  ScoreAggregation aggregation = ScoreAggregation::kProbability;

  friend bool operator==(const EvalSettings&, const EvalSettings&) = default;
};

/// Everything a command needs. Serialises to JSON with strict key checking.
struct RunConfig {
  std::uint64_t seed = 0;
  RunPaths paths;
  PreprocessConfig preprocess;
  std::array<SamplingSpec, 3> sampling{default_sampling_spec(Level::kEvent),
                                       default_sampling_spec(Level::kSet),
                                       default_sampling_spec(Level::kElement)};
  std::array<PathwaySettings, 3> pathways{};
  JointHeadConfig head;  // class_counts/input_dims are derived at run time
  OptimizerConfig base_optim = OptimizerConfig::base_defaults();
  OptimizerConfig joint_optim = OptimizerConfig::joint_defaults();
  LossWeights loss_weights;
  JointTrainSettings joint;
  EvalSettings eval;
  SynthSpec synth;

  PathwayConfig pathway_config(Level level) const;
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Paper-scale defaults (ResNet-50 depth, 224 crops).
RunConfig paper_run_config();
/// Desk-scale defaults used by the bundled synthetic workflow.
RunConfig desk_run_config();

/// Relative paths are resolved against `base_dir` when it is non-empty.
/// Unknown keys and type errors raise kConfig.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
std::string run_config_to_json(const RunConfig& config);

std::string_view sampling_mode_name(SamplingMode mode);

}  // namespace hieract
