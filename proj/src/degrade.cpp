#include "cssfn/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cssfn/error.hpp"
#include "cssfn/ops.hpp"
#include "fft.hpp"

namespace cssfn {
namespace {

void require_divisible(const Shape& s, std::size_t r, const char* what) {
  if (r == 0 || s.h % r != 0 || s.w % r != 0) {
    throw ConfigError(std::string(what) + ": r=" + std::to_string(r) + " does not divide " + std::to_string(s.h) +
                      "x" + std::to_string(s.w));
  }
}

std::vector<fft::Complex> to_complex(std::span<const double> plane) {
  return {plane.begin(), plane.end()};
}

Tensor rot90(const Tensor& t) {
  const auto& s = t.shape();
  Tensor out(Shape{s.n, s.c, s.w, s.h});
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c; ++c)
      for (std::size_t y = 0; y < s.w; ++y)
        for (std::size_t x = 0; x < s.h; ++x) out.at(n, c, y, x) = t.at(n, c, x, s.w - 1 - y);
  return out;
}

Tensor hflip(const Tensor& t) {
  const auto& s = t.shape();
  Tensor out(s);
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c; ++c)
      for (std::size_t y = 0; y < s.h; ++y)
        for (std::size_t x = 0; x < s.w; ++x) out.at(n, c, y, x) = t.at(n, c, y, s.w - 1 - x);
  return out;
}

}  // namespace

std::string to_string(Degradation d) { return d == Degradation::Bicubic ? "BD" : "TD"; }

Degradation parse_degradation(const std::string& s) {
  if (s == "BD" || s == "bd" || s == "bicubic") return Degradation::Bicubic;
  if (s == "TD" || s == "td" || s == "truncation") return Degradation::Truncation;
  throw ConfigError("degradation must be BD or TD; got '" + s + "'");
}

Tensor bicubic_degrade(const Tensor& hr, std::size_t r) {
  require_divisible(hr.shape(), r, "bicubic_degrade");
  return bicubic_resize(hr, Scale::down(r));
}

std::vector<std::complex<double>> kspace_truncate_complex(std::span<const double> plane, std::size_t height,
                                                          std::size_t width, std::size_t r) {
  if (plane.size() != height * width) throw ConfigError("kspace_truncate: plane size mismatch");
  require_divisible(Shape{1, 1, height, width}, r, "kspace_truncate");
  const std::size_t h = height / r;
  const std::size_t w = width / r;
  const auto spectrum = fft::forward2d(to_complex(plane), height, width);
  std::vector<fft::Complex> kept(h * w);
  for (std::size_t ky = 0; ky < h; ++ky) {
    const std::size_t sy = fft::bin_of(fft::signed_frequency(ky, h), height);
    for (std::size_t kx = 0; kx < w; ++kx) {
      const std::size_t sx = fft::bin_of(fft::signed_frequency(kx, w), width);
      kept[ky * w + kx] = spectrum[sy * width + sx];
    }
  }
  auto coarse = fft::inverse2d(kept, h, w);
  const double inv = 1.0 / static_cast<double>(r * r);
  for (auto& v : coarse) v *= inv;
  return coarse;
}

Tensor kspace_truncate(const Tensor& hr, std::size_t r) {
  const auto& s = hr.shape();
  require_divisible(s, r, "kspace_truncate");
  Tensor out(Shape{s.n, s.c, s.h / r, s.w / r});
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c; ++c) {
      const auto coarse = kspace_truncate_complex(hr.plane(n, c), s.h, s.w, r);
      auto dst = out.plane(n, c);
      for (std::size_t i = 0; i < coarse.size(); ++i) dst[i] = std::abs(coarse[i]);
    }
  return out;
}

Tensor spectral_upsample(const Tensor& lr, std::size_t r) {
  const auto& s = lr.shape();
  if (r == 0) throw ConfigError("spectral_upsample: r must be positive");
  const std::size_t height = s.h * r;
  const std::size_t width = s.w * r;
  Tensor out(Shape{s.n, s.c, height, width});
  const double gain = static_cast<double>(r * r);
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c; ++c) {
      const auto spectrum = fft::forward2d(to_complex(lr.plane(n, c)), s.h, s.w);
      std::vector<fft::Complex> padded(height * width);
      for (std::size_t ky = 0; ky < s.h; ++ky) {
        const std::size_t sy = fft::bin_of(fft::signed_frequency(ky, s.h), height);
        for (std::size_t kx = 0; kx < s.w; ++kx) {
          const std::size_t sx = fft::bin_of(fft::signed_frequency(kx, s.w), width);
          padded[sy * width + sx] = spectrum[ky * s.w + kx];
        }
      }
      const auto fine = fft::inverse2d(padded, height, width);
      auto dst = out.plane(n, c);
      for (std::size_t i = 0; i < fine.size(); ++i) dst[i] = fine[i].real() * gain;
    }
  return out;
}

Tensor spectral_lowpass(const Tensor& input, std::size_t max_frequency) {
  const auto& s = input.shape();
  Tensor out(s);
  const auto limit = static_cast<long>(max_frequency);
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c; ++c) {
      auto spectrum = fft::forward2d(to_complex(input.plane(n, c)), s.h, s.w);
      for (std::size_t ky = 0; ky < s.h; ++ky) {
        const long fy = fft::signed_frequency(ky, s.h);
        for (std::size_t kx = 0; kx < s.w; ++kx) {
          const long fx = fft::signed_frequency(kx, s.w);
          if (std::abs(fy) > limit || std::abs(fx) > limit) spectrum[ky * s.w + kx] = 0.0;
        }
      }
      const auto filtered = fft::inverse2d(spectrum, s.h, s.w);
      auto dst = out.plane(n, c);
      for (std::size_t i = 0; i < filtered.size(); ++i) dst[i] = filtered[i].real();
    }
  return out;
}

Tensor degrade(const Tensor& hr, Degradation kind, std::size_t r) {
  return kind == Degradation::Bicubic ? bicubic_degrade(hr, r) : kspace_truncate(hr, r);
}

Tensor dihedral(const Tensor& t, std::size_t id) {
  if (id >= 8) throw ConfigError("dihedral transform id must be < 8");
  if (t.shape().h != t.shape().w && id % 2 == 1) throw ConfigError("odd rotations need square planes");
  Tensor out = id >= 4 ? hflip(t) : t;
  for (std::size_t k = 0; k < id % 4; ++k) out = rot90(out);
  return out;
}

std::size_t augment(PatchPair& pair, Rng& rng) {
  const auto id = static_cast<std::size_t>(rng.index(8));
  if (id != 0) {
    pair.lr = dihedral(pair.lr, id);
    pair.hr = dihedral(pair.hr, id);
  }
  return id;
}

Volume synth_phantom(const PhantomParams& params, Rng& rng) {
  const std::size_t S = params.slices;
  const std::size_t H = params.height;
  const std::size_t W = params.width;
  if (S == 0 || H == 0 || W == 0) throw ConfigError("phantom dimensions must be positive");
  if (H % 12 != 0 || W % 12 != 0) throw ConfigError("phantom height and width must be multiples of 12");
  constexpr double two_pi = 2.0 * std::numbers::pi;

  struct Mode {
    double amp, fz, fy, fx, phase;
  };
  std::vector<Mode> modes;
  for (std::size_t i = 0; i < params.field_modes; ++i) {
    modes.push_back({rng.uniform(0.02, 0.08), static_cast<double>(rng.index(3)),
                     static_cast<double>(1 + rng.index(3)), static_cast<double>(1 + rng.index(3)),
                     rng.uniform(0.0, two_pi)});
  }
  struct Ellipsoid {
    double cz, cy, cx, rz, ry, rx, angle, value;
  };
  std::vector<Ellipsoid> ellipsoids;
  for (std::size_t i = 0; i < params.ellipsoids; ++i) {
    const double big = i == 0 ? 1.0 : 0.0;  // one head-like envelope first
    ellipsoids.push_back({rng.uniform(-0.2, 0.2) * (1.0 - big), rng.uniform(-0.4, 0.4) * (1.0 - big),
                          rng.uniform(-0.4, 0.4) * (1.0 - big), big > 0 ? 1.2 : rng.uniform(0.3, 0.9),
                          big > 0 ? 0.85 : rng.uniform(0.08, 0.35), big > 0 ? 0.7 : rng.uniform(0.08, 0.35),
                          rng.uniform(0.0, std::numbers::pi), big > 0 ? 0.5 : rng.uniform(-0.2, 0.3)});
  }
  struct Ridge {
    double offset, amp, freq, phase, width, value;
  };
  std::vector<Ridge> ridges;
  for (std::size_t i = 0; i < params.ridges; ++i) {
    ridges.push_back({rng.uniform(-0.5, 0.5), rng.uniform(0.05, 0.2), rng.uniform(1.0, 3.0),
                      rng.uniform(0.0, two_pi), rng.uniform(0.01, 0.03), rng.uniform(0.1, 0.3)});
  }

  Tensor raw(Shape{1, S, H, W});
  for (std::size_t z = 0; z < S; ++z) {
    const double u = S > 1 ? 2.0 * static_cast<double>(z) / static_cast<double>(S - 1) - 1.0 : 0.0;
    auto plane = raw.plane(0, z);
    for (std::size_t y = 0; y < H; ++y) {
      const double v = 2.0 * (static_cast<double>(y) + 0.5) / static_cast<double>(H) - 1.0;
      for (std::size_t x = 0; x < W; ++x) {
        const double w = 2.0 * (static_cast<double>(x) + 0.5) / static_cast<double>(W) - 1.0;
        double value = 0.0;
        for (const auto& m : modes) {
          value += m.amp * std::cos(std::numbers::pi * (m.fz * u + m.fy * v + m.fx * w) + m.phase);
        }
        for (const auto& e : ellipsoids) {
          const double ca = std::cos(e.angle);
          const double sa = std::sin(e.angle);
          const double dy = v - e.cy;
          const double dx = w - e.cx;
          const double ry = (ca * dy + sa * dx) / e.ry;
          const double rx = (-sa * dy + ca * dx) / e.rx;
          const double rz = (u - e.cz) / e.rz;
          if (rx * rx + ry * ry + rz * rz <= 1.0) value += e.value;
        }
        for (const auto& rd : ridges) {
          const double centre = rd.offset + rd.amp * std::sin(std::numbers::pi * rd.freq * w + rd.phase + u);
          const double d = (v - centre) / rd.width;
          value += rd.value * std::exp(-d * d);
        }
        plane[y * W + x] = value;
      }
    }
  }
  if (params.max_frequency > 0) raw = spectral_lowpass(raw, params.max_frequency);

  // Affine map to [0, 1]; a constant offset leaves the band limit intact.
  const auto [lo_it, hi_it] = std::minmax_element(raw.data().begin(), raw.data().end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  std::vector<double> shifted(raw.data().begin(), raw.data().end());
  for (double& x : shifted) x -= lo;
  if (!(hi > lo)) std::fill(shifted.begin(), shifted.end(), 1.0);
  return Volume::normalized(S, H, W, std::move(shifted));
}

}  // namespace cssfn
