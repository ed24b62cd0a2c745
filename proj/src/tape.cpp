#include "cssfn/tape.hpp"

#include <algorithm>

#include "cssfn/error.hpp"

namespace cssfn {

Tape::Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

Tape::Var Tape::leaf(Tensor value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  return push(std::move(n));
}

Tape::Var Tape::conv(Var x, ConvParams& params) {
  Node n;
  n.op = Op::Conv;
  n.inputs = {x};
  n.value = conv2d_forward(nodes_.at(x).value, params);
  n.params = &params;
  n.requires_grad = true;
  return push(std::move(n));
}

Tape::Var Tape::relu(Var x) {
  Node n;
  n.op = Op::Relu;
  n.inputs = {x};
  n.value = cssfn::relu(nodes_.at(x).value);
  n.requires_grad = nodes_[x].requires_grad;
  return push(std::move(n));
}

Tape::Var Tape::add(Var a, Var b) {
  Node n;
  n.op = Op::Add;
  n.inputs = {a, b};
  n.value = cssfn::add(nodes_.at(a).value, nodes_.at(b).value);
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  return push(std::move(n));
}

Tape::Var Tape::scale(Var x, double factor) {
  Node n;
  n.op = Op::Scale;
  n.inputs = {x};
  n.value = nodes_.at(x).value;
  for (double& v : n.value.data()) v *= factor;
  n.factor = factor;
  n.requires_grad = nodes_[x].requires_grad;
  return push(std::move(n));
}

Tape::Var Tape::concat(std::span<const Var> parts) {
  std::vector<Tensor> values;
  values.reserve(parts.size());
  Node n;
  n.op = Op::Concat;
  for (const Var p : parts) {
    values.push_back(nodes_.at(p).value);
    n.inputs.push_back(p);
    n.requires_grad = n.requires_grad || nodes_[p].requires_grad;
  }
  n.value = concat_channels(values);
  return push(std::move(n));
}

std::vector<Tape::Var> Tape::split(Var x, std::span<const std::size_t> widths) {
  auto pieces = split_channels(nodes_.at(x).value, widths);
  std::vector<Var> out;
  out.reserve(pieces.size());
  std::size_t offset = 0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    Node n;
    n.op = Op::Slice;
    n.inputs = {x};
    n.offset = offset;
    n.value = std::move(pieces[i]);
    n.requires_grad = nodes_[x].requires_grad;
    offset += widths[i];
    out.push_back(push(std::move(n)));
  }
  return out;
}

Tape::Var Tape::pixel_shuffle(Var x, std::size_t r) {
  Node n;
  n.op = Op::Shuffle;
  n.inputs = {x};
  n.value = cssfn::pixel_shuffle(nodes_.at(x).value, r);
  n.offset = r;
  n.requires_grad = nodes_[x].requires_grad;
  return push(std::move(n));
}

void Tape::accumulate(Var target, std::span<const double> g) {
  Node& t = nodes_[target];
  if (!t.requires_grad) return;
  if (t.grad.empty()) {
    t.grad.assign(g.begin(), g.end());
  } else {
    for (std::size_t i = 0; i < g.size(); ++i) t.grad[i] += g[i];
  }
}

void Tape::accumulate_channels(Var target, std::span<const double> g, const Shape& g_shape, std::size_t offset) {
  Node& t = nodes_[target];
  if (!t.requires_grad) return;
  if (t.grad.empty()) t.grad.assign(t.value.size(), 0.0);
  const std::size_t block = g_shape.c * g_shape.plane();
  for (std::size_t n = 0; n < g_shape.n; ++n) {
    const std::size_t dst = t.value.index(n, offset, 0, 0);
    for (std::size_t i = 0; i < block; ++i) t.grad[dst + i] += g[n * block + i];
  }
}

void Tape::backward(Var root, const Tensor& grad_root) {
  if (root >= nodes_.size()) throw StateError("backward from an unknown tape value");
  if (grad_root.shape() != nodes_[root].value.shape()) {
    throw ConfigError("backward seed shape " + grad_root.shape().str() + " does not match " +
                      nodes_[root].value.shape().str());
  }
  for (auto& n : nodes_) n.grad.clear();
  nodes_[root].grad.assign(grad_root.data().begin(), grad_root.data().end());

  for (Var id = root + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (node.grad.empty() || !node.requires_grad) continue;
    const Tensor g(node.value.shape(), node.grad);
    switch (node.op) {
      case Op::Leaf:
        break;
      case Op::Conv: {
        const Var in = node.inputs[0];
        const bool want_input = nodes_[in].requires_grad;
        ConvGrads cg = conv2d_backward(nodes_[in].value, *node.params, g, want_input);
        auto wg = node.params->weight.grad();
        auto bg = node.params->bias.grad();
        const auto cw = cg.weight.data();
        const auto cb = cg.bias.data();
        for (std::size_t i = 0; i < wg.size(); ++i) wg[i] += cw[i];
        for (std::size_t i = 0; i < bg.size(); ++i) bg[i] += cb[i];
        if (want_input) accumulate(in, cg.input.data());
        break;
      }
      case Op::Relu: {
        const Var in = node.inputs[0];
        accumulate(in, relu_backward(nodes_[in].value, g).data());
        break;
      }
      case Op::Add:
        accumulate(node.inputs[0], g.data());
        accumulate(node.inputs[1], g.data());
        break;
      case Op::Scale: {
        std::vector<double> scaled(node.grad);
        for (double& v : scaled) v *= node.factor;
        accumulate(node.inputs[0], scaled);
        break;
      }
      case Op::Concat: {
        std::vector<std::size_t> widths;
        for (const Var p : node.inputs) widths.push_back(nodes_[p].value.shape().c);
        const auto pieces = split_channels(g, widths);
        for (std::size_t i = 0; i < node.inputs.size(); ++i) {
          accumulate(node.inputs[i], pieces[i].data());
        }
        break;
      }
      case Op::Slice:
        accumulate_channels(node.inputs[0], g.data(), g.shape(), node.offset);
        break;
      case Op::Shuffle:
        accumulate(node.inputs[0], pixel_unshuffle(g, node.offset).data());
        break;
    }
  }
}

}  // namespace cssfn
