#pragma once

#include <vector>

#include "hieract/params.hpp"

namespace hieract {

struct OptimizerConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  double grad_clip_norm = 40.0;  // global L2 norm; <= 0 disables clipping
  std::vector<int> lr_decay_epochs{90, 110};
  double lr_decay_factor = 0.1;
  int epochs = 120;
  int batch_size = 8;

  void validate() const;
  /// Step-decayed rate for a 0-based epoch: right-continuous, jumps at each decay epoch.
  double lr_at(int epoch) const;

  static OptimizerConfig base_defaults();   // 120 epochs, decay at 90/110
  static OptimizerConfig joint_defaults();  // 60 epochs, no decay

  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

/// Rescales gradients so the global norm does not exceed `max_norm`.
/// Returns the norm before clipping.
double clip_grad_norm(const std::vector<ParamStore*>& stores, double max_norm);
double global_grad_norm(const std::vector<ParamStore*>& stores);

/// Momentum SGD with coupled weight decay:
///   g <- g + wd * w;  v <- mu * v + g;  w <- w - lr * v
class SgdMomentum {
 public:
  SgdMomentum(std::vector<ParamStore*> stores, const OptimizerConfig& config);

  void zero_grad();
  /// Clips, then applies one update at `lr`. Returns the pre-clip global norm.
  double step(double lr);
  const std::vector<ParamStore*>& stores() const noexcept { return stores_; }

 private:
  std::vector<ParamStore*> stores_;
  OptimizerConfig config_;
  std::vector<std::vector<Tensor>> velocity_;
};

}  // namespace hieract
