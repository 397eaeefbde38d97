#pragma once

#include <cstddef>
#include <string>

#include "hieract/ops.hpp"
#include "hieract/params.hpp"

namespace hieract {

/// Convolution whose weight/bias live in a ParamStore.
struct ConvLayer {
  ops::Conv3dGeometry geom;
  std::size_t weight = 0;
  std::size_t bias = 0;

  static ConvLayer create(ParamStore& store, const std::string& name, ops::Conv3dGeometry geom,
                          Rng& rng);
  Tensor forward(const ParamStore& store, const Tensor& x, ops::Conv3dCache* cache) const;
  Tensor backward(ParamStore& store, const ops::Conv3dCache& cache, const Tensor& grad_out,
                  bool need_input_grad = true) const;
};

/// Affine map y = W x + b with W [out, in].
struct LinearLayer {
  int in_dim = 0;
  int out_dim = 0;
  std::size_t weight = 0;
  std::size_t bias = 0;

  /// Hidden layers use fan-in init; `weight_std` > 0 selects N(0, weight_std) instead.
  static LinearLayer create(ParamStore& store, const std::string& name, int in_dim, int out_dim,
                            Rng& rng, double weight_std = 0.0);
  Tensor forward(const ParamStore& store, const Tensor& x) const;
  Tensor backward(ParamStore& store, const Tensor& x, const Tensor& grad_out,
                  bool need_input_grad = true) const;
};

}  // namespace hieract
