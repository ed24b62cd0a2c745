#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "cssfn/dataset.hpp"
#include "cssfn/network.hpp"

namespace cssfn {

struct TrainConfig {
  NetworkConfig network;
  DatasetSpec dataset;
  std::size_t patch_size = 24;
  std::size_t minibatch = 16;
  std::size_t iterations = 1'000'000;
  double base_lr = 1e-4;
  std::size_t halving_period = 200'000;
  std::size_t checkpoint_every = 0;  // 0: only the final checkpoint
  std::size_t validate_every = 0;    // 0: no validation
  std::size_t validation_slices = 4;
  std::size_t log_every = 100;
  /// When non-zero, this many patches are drawn once and reused as the
  /// minibatch of every iteration (overfitting smoke runs).
  std::size_t fixed_patches = 0;
  bool augment = true;

  void validate() const;
};

/// Parses flat `key=value` text; `#` starts a comment. Unknown keys and
/// malformed values raise ConfigError naming the line.
TrainConfig parse_config(const std::string& text);
TrainConfig load_config(const std::filesystem::path& path);
/// Canonical text form; parse_config(format_config(c)) reproduces c.
std::string format_config(const TrainConfig& config);

/// Built-in presets: "tiny", "small", "paper".
TrainConfig preset(const std::string& name);

/// base_lr / 2^floor(iteration / halving_period).
double lr_schedule(std::size_t iteration, const TrainConfig& config);

}  // namespace cssfn
