#include "hieract/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hieract/error.hpp"

namespace hieract {

std::int64_t shape_numel(const Shape& shape) {
  std::int64_t n = 1;
  for (auto d : shape) {
    require(d >= 0, ErrorCategory::kInvalidArgument, "negative tensor dimension");
    n *= d;
  }
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? ", " : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(static_cast<std::size_t>(shape_numel(shape_)), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(values.begin(), values.end()) {
  require(static_cast<std::int64_t>(data_.size()) == shape_numel(shape_),
          ErrorCategory::kInvalidArgument,
          "tensor value count does not match shape " + shape_to_string(shape_));
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

void Tensor::reshape(Shape shape) {
  require(shape_numel(shape) == static_cast<std::int64_t>(data_.size()),
          ErrorCategory::kInvalidArgument,
          "cannot reshape " + shape_to_string(shape_) + " to " + shape_to_string(shape));
  shape_ = std::move(shape);
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace hieract
