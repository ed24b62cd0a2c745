#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cssfn/tensor.hpp"

namespace cssfn {

// Forward/backward primitives. All convolutions are stride 1 with zero
// padding of floor(k/2), so spatial extents never change.

Tensor conv2d_forward(const Tensor& input, const ConvParams& params);

struct ConvGrads {
  Tensor input;   // empty when not requested
  Tensor weight;
  Tensor bias;
};

ConvGrads conv2d_backward(const Tensor& input, const ConvParams& params, const Tensor& grad_out,
                          bool want_input_grad = true);

Tensor relu(const Tensor& input);
/// Passes grad_out where input > 0; the derivative at exactly 0 is 0.
Tensor relu_backward(const Tensor& input, const Tensor& grad_out);

Tensor add(const Tensor& a, const Tensor& b);

/// Stacks parts along the channel axis in list order.
Tensor concat_channels(std::span<const Tensor> parts);
/// Splits into q equal contiguous channel groups.
std::vector<Tensor> split_channels(const Tensor& input, std::size_t q);
/// Splits into groups of the given widths (sum must equal the channel count).
std::vector<Tensor> split_channels(const Tensor& input, std::span<const std::size_t> widths);

/// out[c, r*y + dy, r*x + dx] = in[c*r*r + dy*r + dx, y, x]
Tensor pixel_shuffle(const Tensor& input, std::size_t r);
/// Exact inverse of pixel_shuffle; also its backward pass.
Tensor pixel_unshuffle(const Tensor& input, std::size_t r);

/// Resampling ratio output/input expressed as num/den.
struct Scale {
  std::size_t num = 1;
  std::size_t den = 1;

  static Scale up(std::size_t r) { return {r, 1}; }
  static Scale down(std::size_t r) { return {1, r}; }
  [[nodiscard]] double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Keys cubic convolution kernel with a = -0.5.
double cubic_kernel(double x);

/// Separable cubic-convolution resampling of every (n, c) plane.
///
/// Sample positions follow the pixel-centre convention
/// src = (dst + 0.5) / scale - 0.5. When shrinking, the kernel is widened by
/// 1/scale and weights are renormalised, so an r-fold shrink preserves the
/// plane mean. Borders use half-sample symmetric reflection.
Tensor bicubic_resize(const Tensor& input, Scale scale);

/// Mean absolute error over all elements.
double l1_loss(const Tensor& pred, const Tensor& target);
/// d(l1_loss)/d(pred): sign(pred - target) / count, 0 at ties.
Tensor l1_loss_backward(const Tensor& pred, const Tensor& target);

}  // namespace cssfn
