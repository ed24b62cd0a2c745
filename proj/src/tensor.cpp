#include "cssfn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "cssfn/error.hpp"

namespace cssfn {

std::string Shape::str() const {
  return "(" + std::to_string(n) + ", " + std::to_string(c) + ", " + std::to_string(h) + ", " +
         std::to_string(w) + ")";
}

Tensor::Tensor(Shape shape, double fill) : shape_(shape), data_(shape.size(), fill) {
  if (shape.n == 0 || shape.c == 0 || shape.h == 0 || shape.w == 0) {
    throw ConfigError("tensor extents must be positive, got " + shape.str());
  }
}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(shape), data_(std::move(values)) {
  if (shape.n == 0 || shape.c == 0 || shape.h == 0 || shape.w == 0) {
    throw ConfigError("tensor extents must be positive, got " + shape.str());
  }
  if (data_.size() != shape.size()) {
    throw ConfigError("tensor of shape " + shape.str() + " needs " + std::to_string(shape.size()) +
                      " values, got " + std::to_string(data_.size()));
  }
}

std::span<double> Tensor::grad() {
  if (!grad_) grad_.emplace(data_.size(), 0.0);
  return *grad_;
}

std::span<const double> Tensor::grad() const {
  if (!grad_) throw StateError("tensor has no gradient");
  return *grad_;
}

void Tensor::zero_grad() {
  if (grad_) {
    std::fill(grad_->begin(), grad_->end(), 0.0);
  } else {
    grad_.emplace(data_.size(), 0.0);
  }
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

ConvParams::ConvParams(std::size_t in_channels, std::size_t out_channels, std::size_t kernel)
    : weight(Shape{out_channels, in_channels, kernel, kernel}), bias(Shape{1, out_channels, 1, 1}) {
  if (kernel != 1 && kernel != 3) {
    throw ConfigError("only 1x1 and 3x3 kernels are supported, got " + std::to_string(kernel));
  }
}

}  // namespace cssfn
