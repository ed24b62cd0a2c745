#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cssfn/random.hpp"
#include "cssfn/tape.hpp"
#include "cssfn/tensor.hpp"

namespace cssfn {

/// How block outputs are fused globally.
enum class GlobalFusion {
  None,    // blocks chain; post-fusion sees only the last block
  Concat,  // blocks chain; post-fusion sees [x_n, ..., x_0]      (CGFF)
  Dense,   // block i sees [x_{i-1}, ..., x_0]; post-fusion as Concat (DGFF)
};

/// Mapping used inside each unit of a block.
enum class BranchFusion {
  Plain,        // conv3x3 + ReLU + conv3x3, no splitting
  MergeAndRun,  // q parallel branches, two stages, each adding the branch mean
  Serial,       // channel splitting with serial fusion (CSSFU)
};

std::string to_string(GlobalFusion g);
std::string to_string(BranchFusion b);
GlobalFusion parse_global_fusion(const std::string& s);
BranchFusion parse_branch_fusion(const std::string& s);

struct NetworkConfig {
  std::size_t channels = 256;     // c
  std::size_t blocks = 4;         // n
  std::size_t units = 4;          // m
  std::size_t splits = 4;         // q
  std::size_t fusion_width = 0;   // c_o; 0 means c / q
  std::size_t scale = 2;          // r
  std::size_t io_channels = 1;    // ic
  GlobalFusion gff = GlobalFusion::Dense;
  BranchFusion bif = BranchFusion::Serial;
  std::uint64_t seed = 1;

  [[nodiscard]] std::size_t subfeature_width() const { return channels / splits; }
  [[nodiscard]] std::size_t output_width() const { return fusion_width == 0 ? channels / splits : fusion_width; }
  /// Number of conv layers in the upscale module (s).
  [[nodiscard]] std::size_t upscale_depth() const { return scale == 4 ? 2 : 1; }
  /// Throws ConfigError describing the first violated constraint.
  void validate() const;
};

struct ParamCount {
  std::size_t weights = 0;
  std::size_t biases = 0;

  [[nodiscard]] std::size_t total() const { return weights + biases; }
  [[nodiscard]] double millions() const { return static_cast<double>(total()) / 1e6; }
  friend bool operator==(const ParamCount&, const ParamCount&) = default;
};

/// Closed-form longest conv path: n[1 + m*u] + s + 6, where u is the unit
/// depth (q + 1 for serial fusion, 2 for the plain and merge-and-run units).
std::size_t compute_depth(const NetworkConfig& config);

/// Closed-form parameter total summed over the layer inventory.
ParamCount count_params(const NetworkConfig& config);

struct LayerSpec {
  std::string name;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 0;
};

/// Conv-layer dependency graph of a configuration: layers in creation order
/// and, per layer, the conv layers whose outputs reach it without passing
/// through another conv.
struct LayerGraph {
  std::vector<LayerSpec> layers;
  std::vector<std::vector<std::size_t>> predecessors;
  std::vector<std::size_t> output_sources;

  /// Number of conv layers on the longest input-to-output path.
  [[nodiscard]] std::size_t longest_path() const;
  [[nodiscard]] ParamCount param_count() const;
};

/// Walks the architecture symbolically (no numerics) and records its graph.
LayerGraph describe_network(const NetworkConfig& config);

/// Per-module parameter breakdown keyed by layer-name prefix
/// (shallow, block1..blockN, fusion, upscale, reconstruct).
std::vector<std::pair<std::string, ParamCount>> param_breakdown(const LayerGraph& graph);

class Network {
 public:
  /// Allocates every layer and draws weights with Xavier-uniform from rng;
  /// biases start at zero.
  Network(const NetworkConfig& config, Rng& rng);
  /// Same, seeded from config.seed.
  explicit Network(const NetworkConfig& config);

  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  [[nodiscard]] const NetworkConfig& config() const { return config_; }
  [[nodiscard]] const LayerGraph& graph() const { return graph_; }
  [[nodiscard]] std::size_t layer_count() const { return params_.size(); }
  [[nodiscard]] const std::string& layer_name(std::size_t i) const { return graph_.layers.at(i).name; }
  [[nodiscard]] ConvParams& layer(std::size_t i) { return params_.at(i); }
  [[nodiscard]] const ConvParams& layer(std::size_t i) const { return params_.at(i); }
  [[nodiscard]] ConvParams& layer(const std::string& name);
  /// Contiguous layers whose names start with prefix (e.g. "block2.unit1.").
  [[nodiscard]] std::span<ConvParams> layers_with_prefix(const std::string& prefix);

  [[nodiscard]] ParamCount param_count() const;
  /// Flattened parameter list: weight then bias of every layer in order.
  [[nodiscard]] std::vector<Tensor*> parameters();
  /// Names matching parameters(): "<layer>.weight" / "<layer>.bias".
  [[nodiscard]] std::vector<std::string> parameter_names() const;
  void zero_grad();
  /// Sets every weight and bias to zero.
  void zero_parameters();

  /// Runs the network on (b, ic, h, w) and caches activations for backward.
  Tensor forward(const Tensor& input);
  /// Back-propagates d(loss)/d(output); overwrites every parameter gradient.
  void backward(const Tensor& grad_output);
  /// Drops cached activations.
  void clear_cache();

 private:
  NetworkConfig config_;
  LayerGraph graph_;
  std::vector<ConvParams> params_;
  std::unique_ptr<Tape> tape_;
  Tape::Var output_ = 0;
};

// Stand-alone evaluation of single units and blocks. `layers` holds the
// unit's (or block's) conv parameters in creation order, exactly as they
// appear in Network::layers_with_prefix.

Tensor cssfu_forward(const Tensor& x, std::span<const ConvParams> layers, std::size_t q);
Tensor mar_unit_forward(const Tensor& x, std::span<const ConvParams> layers, std::size_t q);
Tensor plain_unit_forward(const Tensor& x, std::span<const ConvParams> layers);
/// Compression + m units + local residual; units follow config.bif.
Tensor cssfb_forward(const Tensor& block_input, std::span<const ConvParams> layers, const NetworkConfig& config);

}  // namespace cssfn
