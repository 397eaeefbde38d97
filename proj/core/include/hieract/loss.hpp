#pragma once

#include <span>
#include <vector>

namespace hieract {

/// Per-category task weights of the multi-task objective.
struct LossWeights {
  double event = 1.0;
  double set = 2.0;
  double element = 4.0;

  void validate() const;
  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

/// Log-sum-exp with max subtraction; log1p keeps precision near zero loss.
double log_sum_exp(std::span<const double> logits);

/// -s_p + log sum_j exp(s_j). Requires >= 2 finite logits.
double cross_entropy(std::span<const double> logits, int target);

/// dL/dlogits = softmax(logits) - onehot(target).
std::vector<double> cross_entropy_grad(std::span<const double> logits, int target);

std::vector<double> softmax(std::span<const double> logits);

/// lambda_event * L_event + lambda_set * L_set + lambda_element * L_element.
double total_loss(double event_loss, double set_loss, double element_loss, const LossWeights& weights);

}  // namespace hieract
