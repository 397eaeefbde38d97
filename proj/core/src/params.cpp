#include "hieract/params.hpp"

#include <cmath>

#include "hieract/checkpoint.hpp"
#include "hieract/digest.hpp"
#include "hieract/error.hpp"

namespace hieract {

std::size_t ParamStore::add(std::string name, Tensor value) {
  require(!by_name_.count(name), ErrorCategory::kInvalidArgument, "duplicate parameter " + name);
  Tensor grad(value.shape());
  const std::size_t index = params_.size();
  by_name_.emplace(name, index);
  params_.push_back({std::move(name), std::move(value), std::move(grad)});
  return index;
}

std::size_t ParamStore::index_of(const std::string& name) const {
  auto it = by_name_.find(name);
  require(it != by_name_.end(), ErrorCategory::kInvalidArgument, "unknown parameter " + name);
  return it->second;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p.grad.fill(0.0);
}

std::size_t ParamStore::num_scalars() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

double ParamStore::grad_l2_norm() const {
  double sum = 0.0;
  for (const auto& p : params_)
    for (double g : p.grad.values()) sum += g * g;
  return std::sqrt(sum);
}

bool ParamStore::grads_finite() const {
  for (const auto& p : params_)
    if (!p.grad.all_finite()) return false;
  return true;
}

void ParamStore::scale_grads(double factor) {
  for (auto& p : params_)
    for (double& g : p.grad.values()) g *= factor;
}

std::string tensor_digest(const std::string& name, const Tensor& t) {
  Sha256 h;
  h.update(name).update_u64(t.rank());
  for (auto d : t.shape()) h.update_u64(static_cast<std::uint64_t>(d));
  h.update(t.values());
  return h.hex_digest();
}

std::string ParamStore::digest() const {
  std::map<std::string, const Tensor*> named;
  for (const auto& [name, index] : by_name_) named.emplace(name, &params_[index].value);
  return digest_named_tensors(named);
}

std::map<std::string, std::string> ParamStore::tensor_digests() const {
  std::map<std::string, std::string> out;
  for (const auto& p : params_) out.emplace(p.name, tensor_digest(p.name, p.value));
  return out;
}

void init_fan_in(Tensor& t, std::int64_t fan_in, Rng& rng) {
  init_normal(t, std::sqrt(2.0 / static_cast<double>(std::max<std::int64_t>(fan_in, 1))), rng);
}

void init_normal(Tensor& t, double stddev, Rng& rng) {
  for (double& v : t.values()) v = stddev * standard_normal(rng);
}

}  // namespace hieract
