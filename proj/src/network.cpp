#include "cssfn/network.hpp"

#include <algorithm>
#include <map>

#include "cssfn/error.hpp"
#include "cssfn/ops.hpp"
#include "cssfn/optim.hpp"
#include "wiring.hpp"

namespace cssfn {
namespace {

// Records layers and conv-to-conv dependencies without touching numbers.
class GraphBackend {
 public:
  struct Value {
    std::size_t channels = 0;
    std::vector<std::size_t> sources;
  };

  explicit GraphBackend(std::size_t input_channels) : input_channels_(input_channels) {}

  Value conv(const Value& x, const std::string& name, std::size_t in, std::size_t out, std::size_t k) {
    if (x.channels != in) {
      throw ConfigError("layer " + name + " expects " + std::to_string(in) + " channels, wiring provides " +
                        std::to_string(x.channels));
    }
    graph.layers.push_back({name, in, out, k});
    graph.predecessors.push_back(x.sources);
    return {out, {graph.layers.size() - 1}};
  }
  Value relu(const Value& x) { return x; }
  Value add(const Value& a, const Value& b) {
    if (a.channels != b.channels) throw ConfigError("add of mismatched channel counts");
    return {a.channels, merged({a, b})};
  }
  Value concat(const std::vector<Value>& parts) {
    std::size_t channels = 0;
    for (const auto& p : parts) channels += p.channels;
    return {channels, merged(parts)};
  }
  std::vector<Value> split(const Value& x, std::size_t q) {
    if (q == 0 || x.channels % q != 0) {
      throw ConfigError("cannot split C=" + std::to_string(x.channels) + " into q=" + std::to_string(q));
    }
    return std::vector<Value>(q, Value{x.channels / q, x.sources});
  }
  Value mean(const std::vector<Value>& parts) { return {parts.front().channels, merged(parts)}; }
  Value shuffle(const Value& x, std::size_t r) { return {x.channels / (r * r), x.sources}; }
  Value upsampled_input(std::size_t) { return {input_channels_, {}}; }

  LayerGraph graph;

 private:
  static std::vector<std::size_t> merged(const std::vector<Value>& parts) {
    std::vector<std::size_t> out;
    for (const auto& p : parts) out.insert(out.end(), p.sources.begin(), p.sources.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::size_t input_channels_;
};

// Consumes layer parameters in creation order; used for single units/blocks.
class EagerBackend {
 public:
  using Value = Tensor;

  explicit EagerBackend(std::span<const ConvParams> layers) : layers_(layers) {}

  Value conv(const Value& x, const std::string& name, std::size_t in, std::size_t out, std::size_t k) {
    if (next_ >= layers_.size()) throw ConfigError("not enough layers supplied for " + name);
    const ConvParams& p = layers_[next_++];
    if (p.in_channels() != in || p.out_channels() != out || p.kernel() != k) {
      throw ConfigError("layer " + name + " expects a " + std::to_string(k) + "x" + std::to_string(k) + " conv " +
                        std::to_string(in) + "->" + std::to_string(out));
    }
    return conv2d_forward(x, p);
  }
  Value relu(const Value& x) { return cssfn::relu(x); }
  Value add(const Value& a, const Value& b) { return cssfn::add(a, b); }
  Value concat(const std::vector<Value>& parts) { return concat_channels(parts); }
  std::vector<Value> split(const Value& x, std::size_t q) { return split_channels(x, q); }
  Value mean(const std::vector<Value>& parts) {
    Tensor acc = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) acc = cssfn::add(acc, parts[i]);
    const double factor = 1.0 / static_cast<double>(parts.size());
    for (double& v : acc.data()) v *= factor;
    return acc;
  }
  Value shuffle(const Value& x, std::size_t r) { return pixel_shuffle(x, r); }
  Value upsampled_input(std::size_t) { throw StateError("eager backend has no network input"); }

  void expect_consumed() const {
    if (next_ != layers_.size()) {
      throw ConfigError("supplied " + std::to_string(layers_.size()) + " layers, wiring used " +
                        std::to_string(next_));
    }
  }

 private:
  std::span<const ConvParams> layers_;
  std::size_t next_ = 0;
};

class TapeBackend {
 public:
  using Value = Tape::Var;

  TapeBackend(Tape& tape, std::vector<ConvParams>& layers, const Tensor& input)
      : tape_(tape), layers_(layers), input_(input) {}

  Value conv(const Value& x, const std::string&, std::size_t, std::size_t, std::size_t) {
    return tape_.conv(x, layers_.at(next_++));
  }
  Value relu(const Value& x) { return tape_.relu(x); }
  Value add(const Value& a, const Value& b) { return tape_.add(a, b); }
  Value concat(const std::vector<Value>& parts) { return tape_.concat(parts); }
  std::vector<Value> split(const Value& x, std::size_t q) {
    const std::vector<std::size_t> widths(q, tape_.value(x).shape().c / q);
    return tape_.split(x, widths);
  }
  Value mean(const std::vector<Value>& parts) {
    Value acc = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) acc = tape_.add(acc, parts[i]);
    return tape_.scale(acc, 1.0 / static_cast<double>(parts.size()));
  }
  Value shuffle(const Value& x, std::size_t r) { return tape_.pixel_shuffle(x, r); }
  Value upsampled_input(std::size_t r) { return tape_.leaf(bicubic_resize(input_, Scale::up(r))); }

 private:
  Tape& tape_;
  std::vector<ConvParams>& layers_;
  const Tensor& input_;
  std::size_t next_ = 0;
};

std::size_t unit_depth(const NetworkConfig& cfg) {
  return cfg.bif == BranchFusion::Serial ? cfg.splits + 1 : 2;
}

std::string module_of(const std::string& layer) { return layer.substr(0, layer.find('.')); }

}  // namespace

std::string to_string(GlobalFusion g) {
  switch (g) {
    case GlobalFusion::None:
      return "none";
    case GlobalFusion::Concat:
      return "CGFF";
    case GlobalFusion::Dense:
      return "DGFF";
  }
  return "?";
}

std::string to_string(BranchFusion b) {
  switch (b) {
    case BranchFusion::Plain:
      return "plain";
    case BranchFusion::MergeAndRun:
      return "MAR";
    case BranchFusion::Serial:
      return "SF";
  }
  return "?";
}

GlobalFusion parse_global_fusion(const std::string& s) {
  if (s == "none") return GlobalFusion::None;
  if (s == "CGFF" || s == "cgff") return GlobalFusion::Concat;
  if (s == "DGFF" || s == "dgff") return GlobalFusion::Dense;
  throw ConfigError("gff must be one of none, CGFF, DGFF; got '" + s + "'");
}

BranchFusion parse_branch_fusion(const std::string& s) {
  if (s == "plain") return BranchFusion::Plain;
  if (s == "MAR" || s == "mar") return BranchFusion::MergeAndRun;
  if (s == "SF" || s == "sf") return BranchFusion::Serial;
  throw ConfigError("bif must be one of plain, MAR, SF; got '" + s + "'");
}

void NetworkConfig::validate() const {
  if (channels == 0 || blocks == 0 || units == 0 || splits == 0 || io_channels == 0) {
    throw ConfigError("c, n, m, q and ic must all be at least 1");
  }
  if (channels % splits != 0) {
    throw ConfigError("q=" + std::to_string(splits) + " does not divide c=" + std::to_string(channels));
  }
  if (scale < 2 || scale > 4) throw ConfigError("scale r must be 2, 3 or 4, got " + std::to_string(scale));
}

std::size_t compute_depth(const NetworkConfig& config) {
  config.validate();
  return config.blocks * (1 + config.units * unit_depth(config)) + config.upscale_depth() + 6;
}

ParamCount count_params(const NetworkConfig& config) {
  config.validate();
  const std::size_t c = config.channels;
  const std::size_t n = config.blocks;
  const std::size_t ic = config.io_channels;
  ParamCount p;

  // shallow extraction: 3x3 ic->c, 1x1 c->c, 3x3 c->c
  p.weights += 9 * ic * c + c * c + 9 * c * c;
  p.biases += 3 * c;

  // block compressions
  p.weights += config.gff == GlobalFusion::Dense ? c * c * n * (n + 1) / 2 : n * c * c;
  p.biases += n * c;

  ParamCount unit;
  switch (config.bif) {
    case BranchFusion::Serial: {
      const std::size_t q = config.splits;
      const std::size_t w = config.subfeature_width();
      const std::size_t co = config.output_width();
      unit.weights = 9 * w * co + (q - 1) * 9 * (w + co) * co + 9 * co * c;
      unit.biases = q * co + c;
      break;
    }
    case BranchFusion::Plain:
      unit.weights = 2 * 9 * c * c;
      unit.biases = 2 * c;
      break;
    case BranchFusion::MergeAndRun: {
      const std::size_t w = config.subfeature_width();
      unit.weights = 2 * config.splits * 9 * w * w;
      unit.biases = 2 * c;
      break;
    }
  }
  p.weights += n * config.units * unit.weights;
  p.biases += n * config.units * unit.biases;

  // post-fusion 1x1 and 3x3
  const std::size_t fused = config.gff == GlobalFusion::None ? c : (n + 1) * c;
  p.weights += fused * c + 9 * c * c;
  p.biases += 2 * c;

  // upscale
  if (config.scale == 4) {
    p.weights += 2 * 9 * c * 4 * c;
    p.biases += 2 * 4 * c;
  } else {
    p.weights += 9 * c * c * config.scale * config.scale;
    p.biases += c * config.scale * config.scale;
  }

  // reconstruction 3x3 c->ic
  p.weights += 9 * c * ic;
  p.biases += ic;
  return p;
}

std::size_t LayerGraph::longest_path() const {
  std::vector<std::size_t> depth(layers.size(), 0);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    std::size_t best = 0;
    for (const std::size_t p : predecessors[i]) best = std::max(best, depth[p]);
    depth[i] = best + 1;
  }
  std::size_t out = 0;
  for (const std::size_t s : output_sources) out = std::max(out, depth[s]);
  return out;
}

ParamCount LayerGraph::param_count() const {
  ParamCount p;
  for (const auto& l : layers) {
    p.weights += l.in_channels * l.out_channels * l.kernel * l.kernel;
    p.biases += l.out_channels;
  }
  return p;
}

LayerGraph describe_network(const NetworkConfig& config) {
  config.validate();
  GraphBackend b(config.io_channels);
  const GraphBackend::Value input{config.io_channels, {}};
  const auto out = wiring::network(b, input, config);
  b.graph.output_sources = out.sources;
  return std::move(b.graph);
}

std::vector<std::pair<std::string, ParamCount>> param_breakdown(const LayerGraph& graph) {
  std::vector<std::pair<std::string, ParamCount>> out;
  for (const auto& l : graph.layers) {
    const std::string module = module_of(l.name);
    if (out.empty() || out.back().first != module) out.emplace_back(module, ParamCount{});
    out.back().second.weights += l.in_channels * l.out_channels * l.kernel * l.kernel;
    out.back().second.biases += l.out_channels;
  }
  return out;
}

Network::Network(const NetworkConfig& config, Rng& rng) : config_(config), graph_(describe_network(config)) {
  params_.reserve(graph_.layers.size());
  for (const auto& spec : graph_.layers) {
    ConvParams p(spec.in_channels, spec.out_channels, spec.kernel);
    p.weight = xavier_init(p.weight.shape(), rng);
    params_.push_back(std::move(p));
  }
}

Network::Network(const NetworkConfig& config) : config_(config), graph_(describe_network(config)) {
  Rng rng(config.seed);
  params_.reserve(graph_.layers.size());
  for (const auto& spec : graph_.layers) {
    ConvParams p(spec.in_channels, spec.out_channels, spec.kernel);
    p.weight = xavier_init(p.weight.shape(), rng);
    params_.push_back(std::move(p));
  }
}

ConvParams& Network::layer(const std::string& name) {
  for (std::size_t i = 0; i < graph_.layers.size(); ++i) {
    if (graph_.layers[i].name == name) return params_[i];
  }
  throw ConfigError("no layer named " + name);
}

std::span<ConvParams> Network::layers_with_prefix(const std::string& prefix) {
  std::size_t first = params_.size();
  std::size_t last = 0;
  for (std::size_t i = 0; i < graph_.layers.size(); ++i) {
    if (graph_.layers[i].name.starts_with(prefix)) {
      first = std::min(first, i);
      last = i + 1;
    }
  }
  if (first >= last) throw ConfigError("no layers with prefix " + prefix);
  return std::span<ConvParams>(params_).subspan(first, last - first);
}

ParamCount Network::param_count() const {
  ParamCount p;
  for (const auto& l : params_) {
    p.weights += l.weight_count();
    p.biases += l.bias_count();
  }
  return p;
}

std::vector<Tensor*> Network::parameters() {
  std::vector<Tensor*> out;
  out.reserve(2 * params_.size());
  for (auto& l : params_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::vector<std::string> Network::parameter_names() const {
  std::vector<std::string> out;
  out.reserve(2 * params_.size());
  for (const auto& spec : graph_.layers) {
    out.push_back(spec.name + ".weight");
    out.push_back(spec.name + ".bias");
  }
  return out;
}

void Network::zero_grad() {
  for (auto& l : params_) {
    l.weight.zero_grad();
    l.bias.zero_grad();
  }
}

void Network::zero_parameters() {
  for (auto& l : params_) {
    std::fill(l.weight.data().begin(), l.weight.data().end(), 0.0);
    std::fill(l.bias.data().begin(), l.bias.data().end(), 0.0);
  }
}

Tensor Network::forward(const Tensor& input) {
  const auto& s = input.shape();
  if (s.c != config_.io_channels) {
    throw ConfigError("network expects " + std::to_string(config_.io_channels) + " input channels, got " +
                      std::to_string(s.c));
  }
  if (s.h < 3 || s.w < 3) throw ConfigError("network input must be at least 3x3, got " + s.str());
  tape_ = std::make_unique<Tape>();
  TapeBackend b(*tape_, params_, input);
  const Tape::Var x = tape_->leaf(input, false);
  output_ = wiring::network(b, x, config_);
  return tape_->value(output_);
}

void Network::backward(const Tensor& grad_output) {
  if (!tape_) throw StateError("Network::backward called before forward");
  zero_grad();
  tape_->backward(output_, grad_output);
}

void Network::clear_cache() { tape_.reset(); }

Tensor cssfu_forward(const Tensor& x, std::span<const ConvParams> layers, std::size_t q) {
  if (layers.empty()) throw ConfigError("cssfu needs its layers");
  NetworkConfig cfg;
  cfg.channels = x.shape().c;
  cfg.splits = q;
  if (q == 0 || cfg.channels % q != 0) {
    throw ConfigError("cannot split C=" + std::to_string(cfg.channels) + " into q=" + std::to_string(q));
  }
  cfg.fusion_width = layers.front().out_channels();
  EagerBackend b(layers);
  Tensor out = wiring::serial_unit(b, x, cfg, "unit.");
  b.expect_consumed();
  return out;
}

Tensor mar_unit_forward(const Tensor& x, std::span<const ConvParams> layers, std::size_t q) {
  NetworkConfig cfg;
  cfg.channels = x.shape().c;
  cfg.splits = q;
  if (q == 0 || cfg.channels % q != 0) {
    throw ConfigError("cannot split C=" + std::to_string(cfg.channels) + " into q=" + std::to_string(q));
  }
  EagerBackend b(layers);
  Tensor out = wiring::mar_unit(b, x, cfg, "unit.");
  b.expect_consumed();
  return out;
}

Tensor plain_unit_forward(const Tensor& x, std::span<const ConvParams> layers) {
  NetworkConfig cfg;
  cfg.channels = x.shape().c;
  EagerBackend b(layers);
  Tensor out = wiring::plain_unit(b, x, cfg, "unit.");
  b.expect_consumed();
  return out;
}

Tensor cssfb_forward(const Tensor& block_input, std::span<const ConvParams> layers, const NetworkConfig& config) {
  config.validate();
  EagerBackend b(layers);
  Tensor out = wiring::block(b, block_input, block_input.shape().c, config, "block.");
  b.expect_consumed();
  return out;
}

}  // namespace cssfn
