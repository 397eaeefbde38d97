#include "hieract/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hieract/error.hpp"

namespace hieract {
namespace {

void check_logits(std::span<const double> logits) {
  require(logits.size() >= 2, ErrorCategory::kInvalidArgument, "cross_entropy: need at least 2 classes");
  for (double v : logits)
    require(std::isfinite(v), ErrorCategory::kDivergence, "cross_entropy: non-finite logits");
}

}  // namespace

void LossWeights::validate() const {
  require(event >= 0 && set >= 0 && element >= 0, ErrorCategory::kInvalidArgument,
          "loss weights must be non-negative");
  require(event > 0 || set > 0 || element > 0, ErrorCategory::kInvalidArgument,
          "at least one loss weight must be positive");
}

double log_sum_exp(std::span<const double> logits) {
  const auto max_it = std::max_element(logits.begin(), logits.end());
  const double m = *max_it;
  double rest = 0.0;
  for (auto it = logits.begin(); it != logits.end(); ++it)
    if (it != max_it) rest += std::exp(*it - m);
  return m + std::log1p(rest);
}

double cross_entropy(std::span<const double> logits, int target) {
  check_logits(logits);
  require(target >= 0 && target < static_cast<int>(logits.size()), ErrorCategory::kInvalidArgument,
          "cross_entropy: target " + std::to_string(target) + " out of range");
  // Subtract s_p inside the sum so that a dominant correct logit gives log1p(tiny).
  const double sp = logits[static_cast<std::size_t>(target)];
  const double m = *std::max_element(logits.begin(), logits.end());
  if (sp == m) {
    double rest = 0.0;
    bool skipped = false;
    for (std::size_t j = 0; j < logits.size(); ++j) {
      if (!skipped && static_cast<int>(j) == target) {
        skipped = true;
        continue;
      }
      rest += std::exp(logits[j] - sp);
    }
    return std::log1p(rest);
  }
  return log_sum_exp(logits) - sp;
}

std::vector<double> softmax(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) sum += (p[j] = std::exp(logits[j] - m));
  for (double& v : p) v /= sum;
  return p;
}

std::vector<double> cross_entropy_grad(std::span<const double> logits, int target) {
  check_logits(logits);
  require(target >= 0 && target < static_cast<int>(logits.size()), ErrorCategory::kInvalidArgument,
          "cross_entropy: target out of range");
  auto g = softmax(logits);
  g[static_cast<std::size_t>(target)] -= 1.0;
  return g;
}

double total_loss(double event_loss, double set_loss, double element_loss, const LossWeights& w) {
  require(std::isfinite(event_loss) && std::isfinite(set_loss) && std::isfinite(element_loss),
          ErrorCategory::kDivergence, "total_loss: non-finite category loss");
  return w.event * event_loss + w.set * set_loss + w.element * element_loss;
}

}  // namespace hieract
