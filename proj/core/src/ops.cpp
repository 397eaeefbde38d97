#include "hieract/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <limits>

#include "hieract/error.hpp"

namespace hieract::ops {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

int out_extent(int in, int k, int s, int p) { return (in + 2 * p - k) / s + 1; }

Triple extent_of(const Tensor& x) {
  return {static_cast<int>(x.dim(1)), static_cast<int>(x.dim(2)), static_cast<int>(x.dim(3))};
}

void im2col(const double* x, const Triple& in, const Conv3dGeometry& g, const Triple& out,
            double* col) {
  const std::int64_t out_plane = static_cast<std::int64_t>(out[0]) * out[1] * out[2];
  const std::int64_t in_hw = static_cast<std::int64_t>(in[1]) * in[2];
  const std::int64_t in_thw = in_hw * in[0];
  std::int64_t row = 0;
  for (int c = 0; c < g.in_channels; ++c) {
    const double* xc = x + c * in_thw;
    for (int kt = 0; kt < g.kernel[0]; ++kt) {
      for (int kh = 0; kh < g.kernel[1]; ++kh) {
        for (int kw = 0; kw < g.kernel[2]; ++kw, ++row) {
          double* dst = col + row * out_plane;
          for (int ot = 0; ot < out[0]; ++ot) {
            const int it = ot * g.stride[0] - g.padding[0] + kt;
            const bool t_ok = it >= 0 && it < in[0];
            for (int oh = 0; oh < out[1]; ++oh) {
              const int ih = oh * g.stride[1] - g.padding[1] + kh;
              const bool h_ok = t_ok && ih >= 0 && ih < in[1];
              double* d = dst + (static_cast<std::int64_t>(ot) * out[1] + oh) * out[2];
              if (!h_ok) {
                std::fill(d, d + out[2], 0.0);
                continue;
              }
              const double* src = xc + it * in_hw + static_cast<std::int64_t>(ih) * in[2];
              for (int ow = 0; ow < out[2]; ++ow) {
                const int iw = ow * g.stride[2] - g.padding[2] + kw;
                d[ow] = (iw >= 0 && iw < in[2]) ? src[iw] : 0.0;
              }
            }
          }
        }
      }
    }
  }
}

void col2im(const double* col, const Triple& in, const Conv3dGeometry& g, const Triple& out,
            double* x) {
  const std::int64_t out_plane = static_cast<std::int64_t>(out[0]) * out[1] * out[2];
  const std::int64_t in_hw = static_cast<std::int64_t>(in[1]) * in[2];
  const std::int64_t in_thw = in_hw * in[0];
  std::int64_t row = 0;
  for (int c = 0; c < g.in_channels; ++c) {
    double* xc = x + c * in_thw;
    for (int kt = 0; kt < g.kernel[0]; ++kt) {
      for (int kh = 0; kh < g.kernel[1]; ++kh) {
        for (int kw = 0; kw < g.kernel[2]; ++kw, ++row) {
          const double* srcrow = col + row * out_plane;
          for (int ot = 0; ot < out[0]; ++ot) {
            const int it = ot * g.stride[0] - g.padding[0] + kt;
            if (it < 0 || it >= in[0]) continue;
            for (int oh = 0; oh < out[1]; ++oh) {
              const int ih = oh * g.stride[1] - g.padding[1] + kh;
              if (ih < 0 || ih >= in[1]) continue;
              const double* s = srcrow + (static_cast<std::int64_t>(ot) * out[1] + oh) * out[2];
              double* dst = xc + it * in_hw + static_cast<std::int64_t>(ih) * in[2];
              for (int ow = 0; ow < out[2]; ++ow) {
                const int iw = ow * g.stride[2] - g.padding[2] + kw;
                if (iw >= 0 && iw < in[2]) dst[iw] += s[ow];
              }
            }
          }
        }
      }
    }
  }
}

}  // namespace

Triple Conv3dGeometry::output_extent(const Triple& input) const {
  Triple out{};
  for (int a = 0; a < 3; ++a) {
    out[a] = out_extent(input[a], kernel[a], stride[a], padding[a]);
    require(out[a] >= 1, ErrorCategory::kInvalidArgument,
            "conv3d: input extent too small for kernel along axis " + std::to_string(a));
  }
  return out;
}

Tensor conv3d_forward(const Tensor& x, const Tensor& weight, const Tensor& bias,
                      const Conv3dGeometry& geom, Conv3dCache* cache) {
  require(x.rank() == 4 && x.dim(0) == geom.in_channels, ErrorCategory::kInvalidArgument,
          "conv3d: expected input [" + std::to_string(geom.in_channels) + ", T, H, W], got " +
              shape_to_string(x.shape()));
  const Triple in = extent_of(x);
  const Triple out = geom.output_extent(in);
  const std::int64_t plane = static_cast<std::int64_t>(out[0]) * out[1] * out[2];
  const std::int64_t k = geom.patch_size();

  AlignedVector local;
  AlignedVector& col = cache ? cache->columns : local;
  col.resize(static_cast<std::size_t>(k * plane));
  im2col(x.data(), in, geom, out, col.data());

  Tensor y({geom.out_channels, out[0], out[1], out[2]});
  ConstMatrixMap w(weight.data(), geom.out_channels, k);
  ConstMatrixMap c(col.data(), k, plane);
  MatrixMap ym(y.data(), geom.out_channels, plane);
  ym.noalias() = w * c;
  ym.colwise() += ConstVectorMap(bias.data(), geom.out_channels);

  if (cache) {
    cache->input_extent = in;
    cache->output_extent = out;
  }
  return y;
}

Tensor conv3d_backward(const Tensor& grad_out, const Tensor& weight, const Conv3dGeometry& geom,
                       const Conv3dCache& cache, Tensor& grad_weight, Tensor& grad_bias,
                       bool need_input_grad) {
  const Triple& in = cache.input_extent;
  const Triple& out = cache.output_extent;
  const std::int64_t plane = static_cast<std::int64_t>(out[0]) * out[1] * out[2];
  const std::int64_t k = geom.patch_size();
  require(static_cast<std::int64_t>(grad_out.size()) == geom.out_channels * plane,
          ErrorCategory::kInvalidArgument, "conv3d_backward: gradient shape mismatch");

  ConstMatrixMap dy(grad_out.data(), geom.out_channels, plane);
  ConstMatrixMap c(cache.columns.data(), k, plane);
  MatrixMap dw(grad_weight.data(), geom.out_channels, k);
  dw.noalias() += dy * c.transpose();
  VectorMap(grad_bias.data(), geom.out_channels) += dy.rowwise().sum();

  if (!need_input_grad) return {};
  AlignedVector dcol(static_cast<std::size_t>(k * plane));
  MatrixMap dc(dcol.data(), k, plane);
  ConstMatrixMap w(weight.data(), geom.out_channels, k);
  dc.noalias() = w.transpose() * dy;
  Tensor dx({geom.in_channels, in[0], in[1], in[2]});
  col2im(dcol.data(), in, geom, out, dx.data());
  return dx;
}

Triple MaxPool3dGeometry::output_extent(const Triple& input) const {
  Triple out{};
  for (int a = 0; a < 3; ++a) {
    out[a] = out_extent(input[a], kernel[a], stride[a], padding[a]);
    require(out[a] >= 1, ErrorCategory::kInvalidArgument, "maxpool3d: input too small");
  }
  return out;
}

Tensor maxpool3d_forward(const Tensor& x, const MaxPool3dGeometry& g, MaxPool3dCache* cache) {
  require(x.rank() == 4, ErrorCategory::kInvalidArgument, "maxpool3d: expected rank-4 input");
  const Triple in = extent_of(x);
  const Triple out = g.output_extent(in);
  const auto channels = x.dim(0);
  Tensor y({channels, out[0], out[1], out[2]});
  if (cache) {
    cache->input_shape = x.shape();
    cache->argmax.assign(y.size(), -1);
  }
  const std::int64_t in_hw = static_cast<std::int64_t>(in[1]) * in[2];
  const std::int64_t in_thw = in_hw * in[0];
  std::int64_t o = 0;
  for (std::int64_t c = 0; c < channels; ++c) {
    for (int ot = 0; ot < out[0]; ++ot) {
      for (int oh = 0; oh < out[1]; ++oh) {
        for (int ow = 0; ow < out[2]; ++ow, ++o) {
          double best = -std::numeric_limits<double>::infinity();
          std::int64_t best_idx = -1;
          for (int kt = 0; kt < g.kernel[0]; ++kt) {
            const int it = ot * g.stride[0] - g.padding[0] + kt;
            if (it < 0 || it >= in[0]) continue;
            for (int kh = 0; kh < g.kernel[1]; ++kh) {
              const int ih = oh * g.stride[1] - g.padding[1] + kh;
              if (ih < 0 || ih >= in[1]) continue;
              for (int kw = 0; kw < g.kernel[2]; ++kw) {
                const int iw = ow * g.stride[2] - g.padding[2] + kw;
                if (iw < 0 || iw >= in[2]) continue;
                const std::int64_t idx = c * in_thw + it * in_hw + static_cast<std::int64_t>(ih) * in[2] + iw;
                if (x[idx] > best) {
                  best = x[idx];
                  best_idx = idx;
                }
              }
            }
          }
          y[o] = best;
          if (cache) cache->argmax[o] = best_idx;
        }
      }
    }
  }
  return y;
}

Tensor maxpool3d_backward(const Tensor& grad_out, const MaxPool3dCache& cache) {
  Tensor dx(cache.input_shape);
  for (std::size_t o = 0; o < grad_out.size(); ++o) {
    if (cache.argmax[o] >= 0) dx[cache.argmax[o]] += grad_out[o];
  }
  return dx;
}

void relu_inplace(Tensor& x, std::vector<std::uint8_t>* mask) {
  if (mask) mask->resize(x.size());
  double* d = x.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool pos = d[i] > 0.0;
    if (!pos) d[i] = 0.0;
    if (mask) (*mask)[i] = pos;
  }
}

void relu_backward_inplace(Tensor& grad, const std::vector<std::uint8_t>& mask) {
  double* d = grad.data();
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!mask[i]) d[i] = 0.0;
  }
}

Tensor global_avg_pool(const Tensor& x) {
  require(x.rank() >= 1, ErrorCategory::kInvalidArgument, "global_avg_pool: empty shape");
  const auto channels = x.dim(0);
  const auto per = static_cast<std::int64_t>(x.size()) / std::max<std::int64_t>(channels, 1);
  Tensor y({channels});
  ConstMatrixMap m(x.data(), channels, per);
  VectorMap(y.data(), channels) = m.rowwise().mean();
  return y;
}

Tensor global_avg_pool_backward(const Tensor& grad_out, const Shape& input_shape) {
  Tensor dx(input_shape);
  const auto channels = input_shape.at(0);
  const auto per = static_cast<std::int64_t>(dx.size()) / std::max<std::int64_t>(channels, 1);
  MatrixMap m(dx.data(), channels, per);
  ConstVectorMap g(grad_out.data(), channels);
  m.colwise() = g / static_cast<double>(per);
  return dx;
}

Tensor linear_forward(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  const auto out = weight.dim(0);
  const auto in = weight.dim(1);
  require(static_cast<std::int64_t>(x.size()) == in, ErrorCategory::kInvalidArgument,
          "linear: input length " + std::to_string(x.size()) + " does not match weight input dim " +
              std::to_string(in));
  Tensor y({out});
  VectorMap(y.data(), out).noalias() =
      ConstMatrixMap(weight.data(), out, in) * ConstVectorMap(x.data(), in) +
      ConstVectorMap(bias.data(), out);
  return y;
}

Tensor linear_backward(const Tensor& grad_out, const Tensor& x, const Tensor& weight,
                       Tensor& grad_weight, Tensor& grad_bias, bool need_input_grad) {
  const auto out = weight.dim(0);
  const auto in = weight.dim(1);
  ConstVectorMap dy(grad_out.data(), out);
  MatrixMap(grad_weight.data(), out, in).noalias() += dy * ConstVectorMap(x.data(), in).transpose();
  VectorMap(grad_bias.data(), out) += dy;
  if (!need_input_grad) return {};
  Tensor dx({in});
  VectorMap(dx.data(), in).noalias() = ConstMatrixMap(weight.data(), out, in).transpose() * dy;
  return dx;
}

void add_inplace(Tensor& dst, const Tensor& src) {
  require(dst.size() == src.size(), ErrorCategory::kInvalidArgument, "add: size mismatch");
  VectorMap(dst.data(), static_cast<Eigen::Index>(dst.size())) +=
      ConstVectorMap(src.data(), static_cast<Eigen::Index>(src.size()));
}

}  // namespace hieract::ops
