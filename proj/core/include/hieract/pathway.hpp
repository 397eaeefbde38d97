#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hieract/layers.hpp"
#include "hieract/ops.hpp"
#include "hieract/params.hpp"
#include "hieract/taxonomy.hpp"

namespace hieract {

enum class DepthPreset { kTiny, kPaperResnet50 };

std::string_view depth_preset_name(DepthPreset preset);
DepthPreset parse_depth_preset(std::string_view text);

/// Backbone shape {T, S^2, C} plus output feature dimension D.
struct PathwayConfig {
  int num_frames = 4;        // T
  int spatial_size = 224;    // S
  int base_channels = 64;    // C
  int feature_dim = 2048;    // D
  ops::Triple first_kernel{1, 7, 7};
  DepthPreset preset = DepthPreset::kPaperResnet50;
  int temporal_stride = 1;   // applied by the last stage
  int tiny_stages = 2;       // residual stages for the tiny preset

  void validate() const;

  /// ResNet-50-depth SlowOnly-style pathway (C=64, D=2048, stem (1,7,7)).
  static PathwayConfig paper_resnet50(int num_frames, int spatial_size = 224);
  /// Desk-scale pathway: stem + `stages` basic residual blocks.
  static PathwayConfig tiny(int num_frames, int spatial_size, int base_channels = 8,
                            int feature_dim = 64, int stages = 2);

  friend bool operator==(const PathwayConfig&, const PathwayConfig&) = default;
};

/// Pooled per-clip feature.
struct FeatureVector {
  std::vector<double> values;
  Level level = Level::kEvent;
};

struct PathwayCache;
struct PathwayCacheDeleter {
  void operator()(PathwayCache* cache) const;
};
using PathwayCachePtr = std::unique_ptr<PathwayCache, PathwayCacheDeleter>;

/// Single-level backbone: clip [T, S, S, 3] -> D-dim global-average-pooled feature.
/// Forward is a pure function of (clip, parameters).
class Pathway {
 public:
  Pathway(const PathwayConfig& config, Level level, std::uint64_t init_seed);
  ~Pathway();
  Pathway(Pathway&&) noexcept;
  Pathway& operator=(Pathway&&) noexcept;

  const PathwayConfig& config() const noexcept { return config_; }
  Level level() const noexcept { return level_; }
  ParamStore& params() noexcept { return params_; }
  const ParamStore& params() const noexcept { return params_; }

  /// Pass a cache to enable `backward`.
  FeatureVector forward(const Tensor& clip, PathwayCache* cache = nullptr) const;
  std::vector<FeatureVector> forward_batch(std::span<const Tensor> clips) const;
  /// Accumulates parameter gradients for dLoss/dfeature.
  void backward(const PathwayCache& cache, std::span<const double> grad_feature);

  PathwayCachePtr make_cache() const;

 private:
  struct Block {
    ConvLayer a;
    ConvLayer b;
    std::optional<ConvLayer> c;         // bottleneck expansion
    std::optional<ConvLayer> shortcut;  // projection when shape changes
  };

  void build(std::uint64_t init_seed);

  PathwayConfig config_;
  Level level_;
  ParamStore params_;
  ConvLayer stem_;
  std::optional<ops::MaxPool3dGeometry> stem_pool_;
  std::vector<Block> blocks_;
  std::optional<ConvLayer> projection_;
};

/// Single-level linear classifier used during base training.
class ClassifierHead {
 public:
  ClassifierHead(int input_dim, int class_count, std::uint64_t init_seed);

  int input_dim() const noexcept { return layer_.in_dim; }
  int class_count() const noexcept { return layer_.out_dim; }
  ParamStore& params() noexcept { return params_; }
  const ParamStore& params() const noexcept { return params_; }

  std::vector<double> logits(std::span<const double> feature) const;
  /// Accumulates parameter gradients; returns dLoss/dfeature.
  std::vector<double> backward(std::span<const double> feature, std::span<const double> grad_logits);

 private:
  ParamStore params_;
  LinearLayer layer_;
};

std::vector<double> single_level_logits(const FeatureVector& feature, const ClassifierHead& head);

/// Converts [T, H, W, 3] to [3, T, H, W].
Tensor clip_to_channels_first(const Tensor& clip);

}  // namespace hieract
