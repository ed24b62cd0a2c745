#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "cssfn/tensor.hpp"

namespace cssfn {

/// A stack of MR slices (slice-major, then row-major) scaled to [0, 1].
struct Volume {
  std::size_t slices = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> data;
  /// Intensity maximum divided out during normalisation.
  double original_max = 1.0;

  Volume() = default;
  Volume(std::size_t s, std::size_t h, std::size_t w, double fill = 0.0)
      : slices(s), height(h), width(w), data(s * h * w, fill) {}

  /// Scales raw non-negative intensities by their maximum.
  static Volume normalized(std::size_t s, std::size_t h, std::size_t w, std::vector<double> raw);

  [[nodiscard]] std::size_t slice_size() const { return height * width; }
  [[nodiscard]] std::span<double> slice(std::size_t i) { return std::span(data).subspan(i * slice_size(), slice_size()); }
  [[nodiscard]] std::span<const double> slice(std::size_t i) const {
    return std::span(data).subspan(i * slice_size(), slice_size());
  }
  /// Slice i as a (1, 1, H, W) tensor.
  [[nodiscard]] Tensor slice_tensor(std::size_t i) const;
  /// All slices as channels of one (1, S, H, W) tensor.
  [[nodiscard]] Tensor as_channels() const;
  /// Inverse of as_channels / a stack of single-slice tensors.
  static Volume from_channels(const Tensor& t, double original_max = 1.0);

  friend bool operator==(const Volume&, const Volume&) = default;
};

/// Raw format: "CSSF", u32 S, H, W (little endian), S*H*W f64 values,
/// one trailing f64 holding the original maximum.
void save_volume(const Volume& volume, const std::filesystem::path& path);
Volume load_volume(const std::filesystem::path& path);

}  // namespace cssfn
