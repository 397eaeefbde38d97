#include "hieract/layers.hpp"

#include "hieract/error.hpp"

namespace hieract {

ConvLayer ConvLayer::create(ParamStore& store, const std::string& name, ops::Conv3dGeometry geom,
                            Rng& rng) {
  ConvLayer layer;
  layer.geom = geom;
  Tensor w({geom.out_channels, geom.in_channels, geom.kernel[0], geom.kernel[1], geom.kernel[2]});
  init_fan_in(w, geom.patch_size(), rng);
  layer.weight = store.add(name + "/weight", std::move(w));
  layer.bias = store.add(name + "/bias", Tensor({geom.out_channels}));
  return layer;
}

Tensor ConvLayer::forward(const ParamStore& store, const Tensor& x, ops::Conv3dCache* cache) const {
  return ops::conv3d_forward(x, store.value(weight), store.value(bias), geom, cache);
}

Tensor ConvLayer::backward(ParamStore& store, const ops::Conv3dCache& cache, const Tensor& grad_out,
                           bool need_input_grad) const {
  return ops::conv3d_backward(grad_out, store.value(weight), geom, cache, store.grad(weight),
                              store.grad(bias), need_input_grad);
}

LinearLayer LinearLayer::create(ParamStore& store, const std::string& name, int in_dim, int out_dim,
                                Rng& rng, double weight_std) {
  require(in_dim >= 1 && out_dim >= 1, ErrorCategory::kInvalidArgument,
          "linear layer " + name + ": dims must be >= 1");
  LinearLayer layer{in_dim, out_dim, 0, 0};
  Tensor w({out_dim, in_dim});
  if (weight_std > 0.0) init_normal(w, weight_std, rng);
  else init_fan_in(w, in_dim, rng);
  layer.weight = store.add(name + "/weight", std::move(w));
  layer.bias = store.add(name + "/bias", Tensor({out_dim}));
  return layer;
}

Tensor LinearLayer::forward(const ParamStore& store, const Tensor& x) const {
  return ops::linear_forward(x, store.value(weight), store.value(bias));
}

Tensor LinearLayer::backward(ParamStore& store, const Tensor& x, const Tensor& grad_out,
                             bool need_input_grad) const {
  return ops::linear_backward(grad_out, x, store.value(weight), store.grad(weight), store.grad(bias),
                              need_input_grad);
}

}  // namespace hieract
