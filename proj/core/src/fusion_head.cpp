#include "hieract/fusion_head.hpp"

#include <algorithm>
#include <cmath>

#include "hieract/error.hpp"

namespace hieract {

void JointHeadConfig::validate() const {
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string lname(level_name(kAllLevels[i]));
    require(encoder_dims[i] >= 1, ErrorCategory::kInvalidArgument, "head: encoder dim for " + lname + " must be >= 1");
    require(input_dims[i] >= 1, ErrorCategory::kInvalidArgument, "head: input dim for " + lname + " must be >= 1");
    require(class_counts[i] >= 1, ErrorCategory::kInvalidArgument, "head: class count for " + lname + " must be >= 1");
  }
  require(fusion_dim >= 1, ErrorCategory::kInvalidArgument, "head: fusion_dim must be >= 1");
  require(dropout >= 0.0 && dropout < 1.0, ErrorCategory::kInvalidArgument, "head: dropout must be in [0, 1)");
}

std::vector<double>& JointLogits::at(Level level) {
  switch (level) {
    case Level::kEvent: return event_logits;
    case Level::kSet: return set_logits;
    default: return element_logits;
  }
}

const std::vector<double>& JointLogits::at(Level level) const {
  return const_cast<JointLogits*>(this)->at(level);
}

JointHead::JointHead(const JointHeadConfig& config, std::uint64_t init_seed) : config_(config) {
  config_.validate();
  Rng rng(init_seed);
  for (Level level : kAllLevels) {
    const auto i = level_index(level);
    encoders_[i] = LinearLayer::create(params_, "head/encoder_" + std::string(level_name(level)),
                                       config_.input_dims[i], config_.encoder_dims[i], rng);
  }
  fusion_ = LinearLayer::create(params_, "head/fusion", config_.concat_dim(), config_.fusion_dim, rng);
  for (Level level : kAllLevels) {
    const auto i = level_index(level);
    classifiers_[i] = LinearLayer::create(params_, "head/classifier_" + std::string(level_name(level)),
                                          config_.fusion_dim, config_.class_counts[i], rng, 0.01);
  }
}

Tensor JointHead::activate(const Tensor& pre, bool enabled) const {
  Tensor out = pre;
  if (enabled) ops::relu_inplace(out, nullptr);
  return out;
}

std::vector<double> JointHead::encode(Level level, std::span<const double> feature) const {
  const auto i = level_index(level);
  require(static_cast<int>(feature.size()) == config_.input_dims[i], ErrorCategory::kInvalidArgument,
          "head: " + std::string(level_name(level)) + " feature dim " + std::to_string(feature.size()) +
              " does not match input dim " + std::to_string(config_.input_dims[i]));
  Tensor x({config_.input_dims[i]}, std::vector<double>(feature.begin(), feature.end()));
  return activate(encoders_[i].forward(params_, x), config_.encoder_activation).to_vector();
}

std::vector<double> JointHead::fuse(std::span<const double> event, std::span<const double> set,
                                    std::span<const double> element) const {
  const std::array<std::span<const double>, 3> parts{event, set, element};
  std::vector<double> concat;
  concat.reserve(static_cast<std::size_t>(config_.concat_dim()));
  for (std::size_t i = 0; i < 3; ++i) {
    require(static_cast<int>(parts[i].size()) == config_.encoder_dims[i], ErrorCategory::kInvalidArgument,
            "head: encoded " + std::string(level_name(kAllLevels[i])) + " length " +
                std::to_string(parts[i].size()) + " does not match encoder dim " +
                std::to_string(config_.encoder_dims[i]));
    concat.insert(concat.end(), parts[i].begin(), parts[i].end());
  }
  Tensor x({config_.concat_dim()}, std::move(concat));
  return activate(fusion_.forward(params_, x), config_.fusion_activation).to_vector();
}

JointLogits JointHead::classify(std::span<const double> joint) const {
  require(static_cast<int>(joint.size()) == config_.fusion_dim, ErrorCategory::kInvalidArgument,
          "head: joint vector length mismatch");
  Tensor x({config_.fusion_dim}, std::vector<double>(joint.begin(), joint.end()));
  JointLogits out;
  for (Level level : kAllLevels)
    out.at(level) = classifiers_[level_index(level)].forward(params_, x).to_vector();
  return out;
}

JointLogits JointHead::forward(const std::array<std::span<const double>, 3>& features,
                               JointHeadCache* cache, Rng* dropout_rng) const {
  std::array<std::vector<double>, 3> encoded;
  for (Level level : kAllLevels) {
    const auto i = level_index(level);
    require(static_cast<int>(features[i].size()) == config_.input_dims[i], ErrorCategory::kInvalidArgument,
            "head: " + std::string(level_name(level)) + " feature dim " + std::to_string(features[i].size()) +
                " does not match input dim " + std::to_string(config_.input_dims[i]));
    Tensor x({config_.input_dims[i]}, std::vector<double>(features[i].begin(), features[i].end()));
    Tensor pre = encoders_[i].forward(params_, x);
    encoded[i] = activate(pre, config_.encoder_activation).to_vector();
    if (cache) {
      cache->features[i] = std::move(x);
      cache->encoder_pre[i] = std::move(pre);
    }
  }
  std::vector<double> concat;
  concat.reserve(static_cast<std::size_t>(config_.concat_dim()));
  for (const auto& e : encoded) concat.insert(concat.end(), e.begin(), e.end());
  Tensor cat({config_.concat_dim()}, std::move(concat));
  Tensor fusion_pre = fusion_.forward(params_, cat);
  Tensor joint = activate(fusion_pre, config_.fusion_activation);

  std::vector<double> mask;
  if (dropout_rng && config_.dropout > 0.0) {
    const double keep = 1.0 - config_.dropout;
    mask.resize(joint.size());
    for (std::size_t j = 0; j < joint.size(); ++j) {
      mask[j] = uniform01(*dropout_rng) < keep ? 1.0 / keep : 0.0;
      joint[j] *= mask[j];
    }
  }
  JointLogits out = classify(joint.values());
  if (cache) {
    cache->concat = std::move(cat);
    cache->fusion_pre = std::move(fusion_pre);
    cache->joint = std::move(joint);
    cache->dropout_mask = std::move(mask);
  }
  for (Level level : kAllLevels) {
    require(std::all_of(out.at(level).begin(), out.at(level).end(), [](double v) { return std::isfinite(v); }),
            ErrorCategory::kDivergence, "head: non-finite logits");
  }
  return out;
}

void JointHead::backward(const JointHeadCache& cache, const JointLogits& grad_logits) {
  Tensor d_joint({config_.fusion_dim});
  for (Level level : kAllLevels) {
    const auto i = level_index(level);
    const auto& g = grad_logits.at(level);
    Tensor dy({config_.class_counts[i]}, std::vector<double>(g.begin(), g.end()));
    ops::add_inplace(d_joint, classifiers_[i].backward(params_, cache.joint, dy));
  }
  if (!cache.dropout_mask.empty())
    for (std::size_t j = 0; j < d_joint.size(); ++j) d_joint[j] *= cache.dropout_mask[j];
  if (config_.fusion_activation)
    for (std::size_t j = 0; j < d_joint.size(); ++j)
      if (cache.fusion_pre[j] <= 0.0) d_joint[j] = 0.0;
  Tensor d_cat = fusion_.backward(params_, cache.concat, d_joint);
  std::size_t offset = 0;
  for (Level level : kAllLevels) {
    const auto i = level_index(level);
    const auto dim = static_cast<std::size_t>(config_.encoder_dims[i]);
    Tensor d_enc({config_.encoder_dims[i]},
                 std::vector<double>(d_cat.data() + offset, d_cat.data() + offset + dim));
    offset += dim;
    if (config_.encoder_activation)
      for (std::size_t j = 0; j < dim; ++j)
        if (cache.encoder_pre[i][j] <= 0.0) d_enc[j] = 0.0;
    encoders_[i].backward(params_, cache.features[i], d_enc, /*need_input_grad=*/false);
  }
}

JointLogits joint_forward(const std::map<Level, FeatureVector>& features, const JointHead& head) {
  std::array<std::span<const double>, 3> spans;
  for (Level level : kAllLevels) {
    auto it = features.find(level);
    require(it != features.end(), ErrorCategory::kInvalidArgument,
            "joint_forward: missing " + std::string(level_name(level)) + " feature");
    spans[level_index(level)] = it->second.values;
  }
  return head.forward(spans);
}

}  // namespace hieract
