#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cssfn/ops.hpp"
#include "cssfn/tensor.hpp"

namespace cssfn {

/// Reverse-mode recorder over the primitives in ops.hpp.
///
/// Every recorded value keeps its forward result; backward() walks the
/// records in reverse and accumulates parameter gradients into the
/// ConvParams gradient slots. The referenced ConvParams must outlive the tape.
class Tape {
 public:
  using Var = std::size_t;

  Var leaf(Tensor value, bool requires_grad = false);
  Var conv(Var x, ConvParams& params);
  Var relu(Var x);
  Var add(Var a, Var b);
  Var scale(Var x, double factor);
  Var concat(std::span<const Var> parts);
  std::vector<Var> split(Var x, std::span<const std::size_t> widths);
  Var pixel_shuffle(Var x, std::size_t r);

  [[nodiscard]] const Tensor& value(Var v) const { return nodes_.at(v).value; }
  [[nodiscard]] std::size_t size() const { return nodes_.size(); }

  /// Seeds d(root) = grad_root and propagates. May be called repeatedly;
  /// intermediate gradients are reset on each call, parameter gradients are
  /// accumulated (callers zero them first).
  void backward(Var root, const Tensor& grad_root);

  /// Gradient that reached a leaf created with requires_grad (empty otherwise).
  [[nodiscard]] const std::vector<double>& grad(Var v) const { return nodes_.at(v).grad; }

 private:
  enum class Op { Leaf, Conv, Relu, Add, Scale, Concat, Slice, Shuffle };

  struct Node {
    Op op = Op::Leaf;
    std::vector<Var> inputs;
    Tensor value;
    std::vector<double> grad;
    bool requires_grad = false;
    ConvParams* params = nullptr;
    std::size_t offset = 0;  // Slice: first channel; Shuffle: factor r
    double factor = 1.0;
  };

  Var push(Node node);
  void accumulate(Var target, std::span<const double> g);
  void accumulate_channels(Var target, std::span<const double> g, const Shape& g_shape, std::size_t offset);

  std::vector<Node> nodes_;
};

}  // namespace cssfn
