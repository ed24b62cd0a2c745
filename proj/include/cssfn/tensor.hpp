#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cssfn {

/// Extents of a rank-4 (batch, channel, height, width) array.
struct Shape {
  std::size_t n = 1;
  std::size_t c = 1;
  std::size_t h = 1;
  std::size_t w = 1;

  [[nodiscard]] std::size_t size() const { return n * c * h * w; }
  [[nodiscard]] std::size_t plane() const { return h * w; }
  [[nodiscard]] std::string str() const;
  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Dense row-major NCHW array of doubles with an optional gradient slot.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  [[nodiscard]] const Shape& shape() const { return shape_; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] bool empty() const { return data_.empty(); }

  [[nodiscard]] std::span<double> data() { return data_; }
  [[nodiscard]] std::span<const double> data() const { return data_; }
  [[nodiscard]] const std::vector<double>& values() const { return data_; }

  [[nodiscard]] std::size_t index(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
    return ((n * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }
  double& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) { return data_[index(n, c, y, x)]; }
  [[nodiscard]] double at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
    return data_[index(n, c, y, x)];
  }

  /// Contiguous (h, w) plane of item n, channel c.
  [[nodiscard]] std::span<double> plane(std::size_t n, std::size_t c) {
    return std::span<double>(data_).subspan(index(n, c, 0, 0), shape_.plane());
  }
  [[nodiscard]] std::span<const double> plane(std::size_t n, std::size_t c) const {
    return std::span<const double>(data_).subspan(index(n, c, 0, 0), shape_.plane());
  }

  [[nodiscard]] bool has_grad() const { return grad_.has_value(); }
  /// Gradient slot, allocated (zero-filled) on first access.
  std::span<double> grad();
  [[nodiscard]] std::span<const double> grad() const;
  void zero_grad();
  void drop_grad() { grad_.reset(); }

  [[nodiscard]] bool all_finite() const;

 private:
  Shape shape_{};
  std::vector<double> data_;
  std::optional<std::vector<double>> grad_;
};

/// Weights (Cout, Cin, k, k) and bias (1, Cout, 1, 1) of a same-padded stride-1 convolution.
struct ConvParams {
  Tensor weight;
  Tensor bias;

  ConvParams() = default;
  ConvParams(std::size_t in_channels, std::size_t out_channels, std::size_t kernel);

  [[nodiscard]] std::size_t in_channels() const { return weight.shape().c; }
  [[nodiscard]] std::size_t out_channels() const { return weight.shape().n; }
  [[nodiscard]] std::size_t kernel() const { return weight.shape().h; }
  [[nodiscard]] std::size_t weight_count() const { return weight.size(); }
  [[nodiscard]] std::size_t bias_count() const { return bias.size(); }
};

}  // namespace cssfn
