#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hieract/tensor.hpp"

// Forward/backward kernels for the small video backbone. Activations are
// laid out [C, T, H, W] per sample; backward routines accumulate (+=) into
// parameter gradients and return input gradients.
namespace hieract::ops {

using Triple = std::array<int, 3>;  // (t, h, w)

struct Conv3dGeometry {
  int in_channels = 0;
  int out_channels = 0;
  Triple kernel{1, 1, 1};
  Triple stride{1, 1, 1};
  Triple padding{0, 0, 0};

  /// Output extents for input extents (t, h, w).
  Triple output_extent(const Triple& input) const;
  std::int64_t patch_size() const {
    return static_cast<std::int64_t>(in_channels) * kernel[0] * kernel[1] * kernel[2];
  }
};

/// im2col buffer retained between forward and backward.
struct Conv3dCache {
  Triple input_extent{};
  Triple output_extent{};
  AlignedVector columns;  // [patch_size, out_t*out_h*out_w], row-major
};

/// weight [out, in, kt, kh, kw], bias [out].
Tensor conv3d_forward(const Tensor& x, const Tensor& weight, const Tensor& bias,
                      const Conv3dGeometry& geom, Conv3dCache* cache);

Tensor conv3d_backward(const Tensor& grad_out, const Tensor& weight, const Conv3dGeometry& geom,
                       const Conv3dCache& cache, Tensor& grad_weight, Tensor& grad_bias,
                       bool need_input_grad = true);

struct MaxPool3dGeometry {
  Triple kernel{1, 3, 3};
  Triple stride{1, 2, 2};
  Triple padding{0, 1, 1};
  Triple output_extent(const Triple& input) const;
};

struct MaxPool3dCache {
  Shape input_shape;
  std::vector<std::int64_t> argmax;
};

Tensor maxpool3d_forward(const Tensor& x, const MaxPool3dGeometry& geom, MaxPool3dCache* cache);
Tensor maxpool3d_backward(const Tensor& grad_out, const MaxPool3dCache& cache);

/// In-place ReLU; returns the mask of positive entries when requested.
void relu_inplace(Tensor& x, std::vector<std::uint8_t>* mask);
void relu_backward_inplace(Tensor& grad, const std::vector<std::uint8_t>& mask);

/// Mean over all non-channel axes: [C, ...] -> [C].
Tensor global_avg_pool(const Tensor& x);
Tensor global_avg_pool_backward(const Tensor& grad_out, const Shape& input_shape);

/// y = W x + b with W [out, in].
Tensor linear_forward(const Tensor& x, const Tensor& weight, const Tensor& bias);
Tensor linear_backward(const Tensor& grad_out, const Tensor& x, const Tensor& weight,
                       Tensor& grad_weight, Tensor& grad_bias, bool need_input_grad = true);

void add_inplace(Tensor& dst, const Tensor& src);

}  // namespace hieract::ops
