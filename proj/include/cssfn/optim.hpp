#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cssfn/random.hpp"
#include "cssfn/tensor.hpp"

namespace cssfn {

/// Glorot-uniform bound sqrt(6 / (fan_in + fan_out)) for a conv weight of
/// shape (Cout, Cin, k, k): fan_in = Cin*k*k, fan_out = Cout*k*k.
double xavier_bound(const Shape& weight_shape);

/// Fills a conv weight tensor of the given shape with U(-bound, bound).
Tensor xavier_init(const Shape& weight_shape, Rng& rng);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

/// One bias-corrected Adam update of every tensor in params, using each
/// tensor's gradient slot. Moments are created on the first call.
void adam_step(std::span<Tensor* const> params, AdamState& state, double lr);

}  // namespace cssfn
