#include "cssfn/optim.hpp"

#include <cmath>
#include <utility>

#include "cssfn/error.hpp"

namespace cssfn {

double xavier_bound(const Shape& weight_shape) {
  const double area = static_cast<double>(weight_shape.h * weight_shape.w);
  const double fan_in = static_cast<double>(weight_shape.c) * area;
  const double fan_out = static_cast<double>(weight_shape.n) * area;
  return std::sqrt(6.0 / (fan_in + fan_out));
}

Tensor xavier_init(const Shape& weight_shape, Rng& rng) {
  const double bound = xavier_bound(weight_shape);
  Tensor w(weight_shape);
  for (double& v : w.data()) v = rng.uniform(-bound, bound);
  return w;
}

void adam_step(std::span<Tensor* const> params, AdamState& state, double lr) {
  if (!(lr > 0.0)) throw ConfigError("Adam learning rate must be positive");
  if (state.first_moment.empty()) {
    for (const Tensor* p : params) {
      state.first_moment.emplace_back(p->size(), 0.0);
      state.second_moment.emplace_back(p->size(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw ConfigError("Adam state tracks " + std::to_string(state.first_moment.size()) + " tensors, got " +
                      std::to_string(params.size()));
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    if (m.size() != p.size()) throw ConfigError("Adam moment shape does not match parameter " + std::to_string(i));
    if (!p.has_grad()) continue;
    const auto g = std::as_const(p).grad();
    auto theta = p.data();
    for (std::size_t j = 0; j < theta.size(); ++j) {
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      theta[j] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

}  // namespace cssfn
