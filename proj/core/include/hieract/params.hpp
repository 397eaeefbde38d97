#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "hieract/rng.hpp"
#include "hieract/tensor.hpp"

namespace hieract {

/// Named trainable tensor with its gradient accumulator.
struct Parameter {
  std::string name;  // hierarchical, '/'-separated, e.g. "pathway/stage1/block0/conv_a/weight"
  Tensor value;
  Tensor grad;
};

/// Insertion-ordered collection of parameters. Layers refer to entries by index.
class ParamStore {
 public:
  std::size_t add(std::string name, Tensor value);

  std::size_t size() const noexcept { return params_.size(); }
  Parameter& at(std::size_t i) { return params_.at(i); }
  const Parameter& at(std::size_t i) const { return params_.at(i); }
  Tensor& value(std::size_t i) { return params_[i].value; }
  const Tensor& value(std::size_t i) const { return params_[i].value; }
  Tensor& grad(std::size_t i) { return params_[i].grad; }

  std::vector<Parameter>& entries() noexcept { return params_; }
  const std::vector<Parameter>& entries() const noexcept { return params_; }

  std::size_t index_of(const std::string& name) const;
  bool contains(const std::string& name) const { return by_name_.count(name) != 0; }

  void zero_grad();
  std::size_t num_scalars() const;
  double grad_l2_norm() const;
  bool grads_finite() const;
  void scale_grads(double factor);

  /// SHA-256 over names, shapes and raw values, in name order.
  std::string digest() const;
  /// Per-tensor digests keyed by name.
  std::map<std::string, std::string> tensor_digests() const;

 private:
  std::vector<Parameter> params_;
  std::map<std::string, std::size_t> by_name_;
};

std::string tensor_digest(const std::string& name, const Tensor& t);

/// N(0, sqrt(2 / fan_in)) initialisation.
void init_fan_in(Tensor& t, std::int64_t fan_in, Rng& rng);
void init_normal(Tensor& t, double stddev, Rng& rng);

}  // namespace hieract
