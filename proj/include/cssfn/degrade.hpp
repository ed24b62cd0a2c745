#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cssfn/random.hpp"
#include "cssfn/tensor.hpp"
#include "cssfn/volume.hpp"

namespace cssfn {

enum class Degradation { Bicubic, Truncation };  // BD, TD

std::string to_string(Degradation d);
Degradation parse_degradation(const std::string& s);

/// BD: r-fold bicubic shrink of every plane.
Tensor bicubic_degrade(const Tensor& hr, std::size_t r);

/// TD before the magnitude step: keeps the centred (H/r, W/r) block of the
/// 2D spectrum (Nyquist kept on the negative side for even sizes), inverts on
/// the coarse grid and divides by r^2 so constants are fixed points.
/// Returns the complex coarse image of one (H, W) plane.
std::vector<std::complex<double>> kspace_truncate_complex(std::span<const double> plane, std::size_t height,
                                                          std::size_t width, std::size_t r);

/// TD: complex magnitude of kspace_truncate_complex for every plane.
Tensor kspace_truncate(const Tensor& hr, std::size_t r);

/// Zero-pads each plane's spectrum r-fold and inverts (real part, times r^2).
/// Inverts kspace_truncate on band-limited inputs.
Tensor spectral_upsample(const Tensor& lr, std::size_t r);

/// Ideal low-pass keeping |f_y|, |f_x| <= max_frequency (cycles per image).
Tensor spectral_lowpass(const Tensor& input, std::size_t max_frequency);

Tensor degrade(const Tensor& hr, Degradation kind, std::size_t r);

/// The eight symmetries of the square: rotation by 90*k (k = id % 4)
/// counter-clockwise, preceded by a horizontal flip when id >= 4.
Tensor dihedral(const Tensor& t, std::size_t id);

struct PatchPair {
  Tensor lr;
  Tensor hr;
};

/// Applies one uniformly drawn dihedral transform to both members.
/// Returns the transform id used.
std::size_t augment(PatchPair& pair, Rng& rng);

struct PhantomParams {
  std::size_t slices = 96;
  std::size_t height = 240;
  std::size_t width = 240;
  std::size_t ellipsoids = 12;
  std::size_t ridges = 4;
  std::size_t field_modes = 6;
  /// In-plane band limit in cycles per image; 0 disables the low-pass.
  std::size_t max_frequency = 0;
};

/// Smooth background field plus ellipsoids and ridges, optionally
/// band-limited in-plane, then scaled to [0, 1].
Volume synth_phantom(const PhantomParams& params, Rng& rng);

}  // namespace cssfn
