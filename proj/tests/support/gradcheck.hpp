#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "hieract/fusion_head.hpp"
#include "hieract/loss.hpp"
#include "hieract/pathway.hpp"

namespace hieract::testing {

struct GradCheckReport {
  int checked = 0;
  int over_threshold = 0;
  int skipped_kinks = 0;  // draws rejected because the loss is not smooth within +-step
  double max_rel_error = 0.0;
  std::string worst_parameter;
};

/// |a - n| / max(|a|, |n|, floor). The floor keeps near-zero gradients from
/// turning rounding noise into huge ratios.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::fabs(analytic - numeric) / std::max({std::fabs(analytic), std::fabs(numeric), floor});
}

/// Compares stored gradients against central differences of `loss` on
/// `samples` random scalars drawn uniformly over all entries of `store`.
/// A draw whose one-sided differences disagree sits on a ReLU or max-pool
/// kink inside the window; it is counted in `skipped_kinks` and redrawn.
inline GradCheckReport check_store(ParamStore& store, const std::function<double()>& loss, int samples,
                                   double step, double threshold, Rng& rng) {
  std::vector<std::pair<std::size_t, std::size_t>> slots;
  for (std::size_t p = 0; p < store.size(); ++p)
    for (std::size_t j = 0; j < store.at(p).value.size(); ++j) slots.emplace_back(p, j);
  GradCheckReport r;
  const double centre = loss();
  while (r.checked < samples) {
    const auto [p, j] = slots[uniform_below(rng, slots.size())];
    double& w = store.value(p)[j];
    const double old = w;
    w = old + step;
    const double up = loss();
    w = old - step;
    const double down = loss();
    w = old;
    const double forward = (up - centre) / step, backward = (centre - down) / step;
    if (relative_error(forward, backward) > threshold && r.skipped_kinks < samples) {
      ++r.skipped_kinks;
      continue;
    }
    const double numeric = (up - down) / (2.0 * step);
    const double err = relative_error(store.at(p).grad[j], numeric);
    ++r.checked;
    if (err > threshold) ++r.over_threshold;
    if (err > r.max_rel_error) {
      r.max_rel_error = err;
      r.worst_parameter = store.at(p).name + "[" + std::to_string(j) + "]";
    }
  }
  return r;
}

/// Tiny backbone plus single-level classifier under cross-entropy.
inline GradCheckReport pathway_gradcheck(std::uint64_t seed, int samples, double step, double threshold) {
  PathwayConfig cfg = PathwayConfig::tiny(4, 12, 4, 24, 2);  // D != 16 so the projection is exercised
  Pathway pathway(cfg, Level::kElement, seed);
  ClassifierHead head(cfg.feature_dim, 5, seed + 1);
  Rng rng(seed + 2);
  Tensor clip({4, 12, 12, 3});
  for (double& v : clip.storage()) v = standard_normal(rng);
  // Larger classifier weights make the backbone gradients well above rounding noise.
  for (auto& p : head.params().entries())
    for (double& v : p.value.storage()) v = 0.5 * standard_normal(rng);
  const int target = 3;

  auto cache = pathway.make_cache();
  const FeatureVector f = pathway.forward(clip, cache.get());
  const auto logits = head.logits(f.values);
  pathway.params().zero_grad();
  head.params().zero_grad();
  const auto g_feature = head.backward(f.values, cross_entropy_grad(logits, target));
  pathway.backward(*cache, g_feature);

  auto loss = [&] { return cross_entropy(head.logits(pathway.forward(clip).values), target); };
  return check_store(pathway.params(), loss, samples, step, threshold, rng);
}

/// Joint head (encoders, fusion, classifiers) under the weighted multi-task loss.
inline GradCheckReport head_gradcheck(std::uint64_t seed, int samples, double step, double threshold) {
  JointHeadConfig cfg;
  cfg.input_dims = {16, 16, 16};
  cfg.encoder_dims = {8, 16, 32};
  cfg.fusion_dim = 32;
  cfg.class_counts = {2, 3, 5};
  JointHead head(cfg, seed);
  Rng rng(seed + 1);
  std::array<std::vector<double>, 3> features;
  for (auto& f : features) {
    f.resize(16);
    for (double& v : f) v = standard_normal(rng);
  }
  const LabelTriple y{1, 2, 4};
  const LossWeights w;

  auto objective = [&](const JointLogits& l) {
    return total_loss(cross_entropy(l.event_logits, y.event_id), cross_entropy(l.set_logits, y.set_id),
                      cross_entropy(l.element_logits, y.element_id), w);
  };
  JointHeadCache cache;
  const JointLogits logits = head.forward({features[0], features[1], features[2]}, &cache);
  JointLogits grads;
  grads.event_logits = cross_entropy_grad(logits.event_logits, y.event_id);
  grads.set_logits = cross_entropy_grad(logits.set_logits, y.set_id);
  grads.element_logits = cross_entropy_grad(logits.element_logits, y.element_id);
  for (double& v : grads.event_logits) v *= w.event;
  for (double& v : grads.set_logits) v *= w.set;
  for (double& v : grads.element_logits) v *= w.element;
  head.params().zero_grad();
  head.backward(cache, grads);

  auto loss = [&] { return objective(head.forward({features[0], features[1], features[2]})); };
  return check_store(head.params(), loss, samples, step, threshold, rng);
}

/// d CE / d logits against central differences on random logits.
inline GradCheckReport loss_gradcheck(std::uint64_t seed, int samples, double step, double threshold) {
  Rng rng(seed);
  GradCheckReport r;
  for (int k = 0; k < samples; ++k) {
    const int n = 2 + static_cast<int>(uniform_below(rng, 20));
    std::vector<double> logits(static_cast<std::size_t>(n));
    for (double& v : logits) v = 3.0 * standard_normal(rng);
    const int t = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(n)));
    const auto g = cross_entropy_grad(logits, t);
    const std::size_t j = uniform_below(rng, static_cast<std::uint64_t>(n));
    const double old = logits[j];
    logits[j] = old + step;
    const double up = cross_entropy(logits, t);
    logits[j] = old - step;
    const double down = cross_entropy(logits, t);
    logits[j] = old;
    const double err = relative_error(g[j], (up - down) / (2.0 * step));
    ++r.checked;
    if (err > threshold) ++r.over_threshold;
    if (err > r.max_rel_error) {
      r.max_rel_error = err;
      r.worst_parameter = "logit[" + std::to_string(j) + "] of " + std::to_string(n);
    }
  }
  return r;
}

}  // namespace hieract::testing
