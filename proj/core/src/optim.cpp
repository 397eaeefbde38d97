#include "hieract/optim.hpp"

#include <cmath>

#include "hieract/error.hpp"

namespace hieract {

void OptimizerConfig::validate() const {
  auto bad = [](const std::string& m) { fail(ErrorCategory::kConfig, "optimizer: " + m); };
  if (!(learning_rate > 0)) bad("learning_rate must be > 0");
  if (momentum < 0 || momentum >= 1) bad("momentum must be in [0, 1)");
  if (weight_decay < 0) bad("weight_decay must be >= 0");
  if (epochs < 1) bad("epochs must be >= 1");
  if (batch_size < 1) bad("batch_size must be >= 1");
  if (!(lr_decay_factor > 0)) bad("lr_decay_factor must be > 0");
  for (std::size_t i = 0; i < lr_decay_epochs.size(); ++i) {
    if (i > 0 && lr_decay_epochs[i] <= lr_decay_epochs[i - 1]) bad("lr_decay_epochs must be strictly increasing");
    if (lr_decay_epochs[i] < 0 || lr_decay_epochs[i] >= epochs) bad("lr_decay_epochs must lie in [0, epochs)");
  }
}

double OptimizerConfig::lr_at(int epoch) const {
  double lr = learning_rate;
  for (int boundary : lr_decay_epochs)
    if (epoch >= boundary) lr *= lr_decay_factor;
  return lr;
}

OptimizerConfig OptimizerConfig::base_defaults() { return OptimizerConfig{}; }

OptimizerConfig OptimizerConfig::joint_defaults() {
  OptimizerConfig c;
  c.epochs = 60;
  c.lr_decay_epochs.clear();
  return c;
}

double global_grad_norm(const std::vector<ParamStore*>& stores) {
  double sum = 0.0;
  for (const auto* s : stores) {
    const double n = s->grad_l2_norm();
    sum += n * n;
  }
  return std::sqrt(sum);
}

double clip_grad_norm(const std::vector<ParamStore*>& stores, double max_norm) {
  const double norm = global_grad_norm(stores);
  if (max_norm > 0 && norm > max_norm) {
    const double scale = max_norm / (norm + 1e-6);
    for (auto* s : stores) s->scale_grads(scale);
  }
  return norm;
}

SgdMomentum::SgdMomentum(std::vector<ParamStore*> stores, const OptimizerConfig& config)
    : stores_(std::move(stores)), config_(config) {
  for (const auto* s : stores_) {
    std::vector<Tensor> v;
    for (const auto& p : s->entries()) v.emplace_back(p.value.shape());
    velocity_.push_back(std::move(v));
  }
}

void SgdMomentum::zero_grad() {
  for (auto* s : stores_) s->zero_grad();
}

double SgdMomentum::step(double lr) {
  const double norm = clip_grad_norm(stores_, config_.grad_clip_norm);
  for (std::size_t si = 0; si < stores_.size(); ++si) {
    auto& entries = stores_[si]->entries();
    for (std::size_t pi = 0; pi < entries.size(); ++pi) {
      auto& p = entries[pi];
      auto& v = velocity_[si][pi];
      for (std::size_t j = 0; j < p.value.size(); ++j) {
        const double g = p.grad[j] + config_.weight_decay * p.value[j];
        v[j] = config_.momentum * v[j] + g;
        p.value[j] -= lr * v[j];
      }
    }
  }
  return norm;
}

}  // namespace hieract
