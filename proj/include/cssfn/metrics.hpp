#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "cssfn/volume.hpp"

namespace cssfn {

/// Returned by psnr() for identical inputs.
inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

/// 10 log10(L^2 / MSE) in dB.
double psnr(std::span<const double> a, std::span<const double> b, double peak = 1.0);

struct SsimOptions {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double peak = 1.0;
};

/// Mean SSIM over the valid region of a Gaussian-windowed local SSIM map.
double ssim(std::span<const double> a, std::span<const double> b, std::size_t height, std::size_t width,
            const SsimOptions& options = {});

struct MetricReport {
  double psnr_db = 0.0;
  double ssim = 0.0;
  std::vector<double> slice_psnr;
  std::vector<double> slice_ssim;
};

/// Per-slice PSNR/SSIM (L = 1) averaged arithmetically over slices.
MetricReport evaluate_volume(const Volume& pred, const Volume& ref);

}  // namespace cssfn
