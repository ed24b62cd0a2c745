#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace cssfn {

/// Seeded 64-bit Mersenne Twister with platform-independent conversions.
///
/// std::uniform_*_distribution is implementation defined, so floating and
/// integer draws are derived from raw engine output here instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n) by rejection sampling.
  std::uint64_t index(std::uint64_t n);
  /// Standard normal via Box-Muller (one value per call).
  double normal();

  /// Textual engine state; round-trips bit-exactly through restore().
  [[nodiscard]] std::string state() const;
  void restore(const std::string& state);

  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Derives an independent seed for a named stream from a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace cssfn
