#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "hieract/layers.hpp"
#include "hieract/pathway.hpp"
#include "hieract/rng.hpp"

namespace hieract {

/// Dimensions of the joint prediction layers. Arrays are indexed by level
/// (event, set, element).
struct JointHeadConfig {
  std::array<int, 3> encoder_dims{128, 256, 1024};
  int fusion_dim = 1024;
  std::array<int, 3> class_counts{4, 15, 99};
  std::array<int, 3> input_dims{2048, 2048, 2048};
  bool encoder_activation = true;
  bool fusion_activation = true;
  double dropout = 0.0;  // on the fused vector, training only

  int concat_dim() const { return encoder_dims[0] + encoder_dims[1] + encoder_dims[2]; }
  void validate() const;

  friend bool operator==(const JointHeadConfig&, const JointHeadConfig&) = default;
};

struct JointLogits {
  std::vector<double> event_logits;
  std::vector<double> set_logits;
  std::vector<double> element_logits;

  std::vector<double>& at(Level level);
  const std::vector<double>& at(Level level) const;
};

/// Intermediate values retained for backward.
struct JointHeadCache {
  std::array<Tensor, 3> features;
  std::array<Tensor, 3> encoder_pre;
  Tensor concat;
  Tensor fusion_pre;
  Tensor joint;
  std::vector<double> dropout_mask;
};

/// encode (per level) -> concatenate (event, set, element) -> fuse -> three classifiers.
class JointHead {
 public:
  JointHead(const JointHeadConfig& config, std::uint64_t init_seed);

  const JointHeadConfig& config() const noexcept { return config_; }
  ParamStore& params() noexcept { return params_; }
  const ParamStore& params() const noexcept { return params_; }

  std::vector<double> encode(Level level, std::span<const double> feature) const;
  std::vector<double> fuse(std::span<const double> event, std::span<const double> set,
                           std::span<const double> element) const;
  JointLogits classify(std::span<const double> joint) const;

  /// Full head. `dropout_rng` enables training-mode dropout when config.dropout > 0.
  JointLogits forward(const std::array<std::span<const double>, 3>& features,
                      JointHeadCache* cache = nullptr, Rng* dropout_rng = nullptr) const;
  /// Accumulates parameter gradients for dLoss/dlogits.
  void backward(const JointHeadCache& cache, const JointLogits& grad_logits);

 private:
  Tensor activate(const Tensor& pre, bool enabled) const;

  JointHeadConfig config_;
  ParamStore params_;
  std::array<LinearLayer, 3> encoders_;
  LinearLayer fusion_;
  std::array<LinearLayer, 3> classifiers_;
};

/// Requires all three levels to be present.
JointLogits joint_forward(const std::map<Level, FeatureVector>& features, const JointHead& head);

}  // namespace hieract
