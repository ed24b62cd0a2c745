#include "cssfn/volume.hpp"

#include <algorithm>
#include <array>
#include <fstream>

#include "binary_io.hpp"
#include "cssfn/error.hpp"

namespace cssfn {

namespace {
constexpr std::array<char, 4> kMagic{'C', 'S', 'S', 'F'};
}

Volume Volume::normalized(std::size_t s, std::size_t h, std::size_t w, std::vector<double> raw) {
  if (raw.size() != s * h * w) throw ConfigError("volume payload does not match its dimensions");
  const double peak = raw.empty() ? 0.0 : *std::max_element(raw.begin(), raw.end());
  if (!(peak > 0.0)) throw ConfigError("volume maximum must be positive to normalise");
  Volume v;
  v.slices = s;
  v.height = h;
  v.width = w;
  v.original_max = peak;
  v.data = std::move(raw);
  for (double& x : v.data) {
    if (x < 0.0) throw ConfigError("volume intensities must be non-negative");
    x /= peak;
  }
  return v;
}

Tensor Volume::slice_tensor(std::size_t i) const {
  const auto src = slice(i);
  return Tensor(Shape{1, 1, height, width}, std::vector<double>(src.begin(), src.end()));
}

Tensor Volume::as_channels() const { return Tensor(Shape{1, slices, height, width}, data); }

Volume Volume::from_channels(const Tensor& t, double original_max) {
  const auto& s = t.shape();
  Volume v(s.n * s.c, s.h, s.w);
  std::copy(t.data().begin(), t.data().end(), v.data.begin());
  v.original_max = original_max;
  return v;
}

void save_volume(const Volume& volume, const std::filesystem::path& path) {
  if (volume.data.size() != volume.slices * volume.height * volume.width) {
    throw IoError("volume payload does not match its dimensions");
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(kMagic.data(), kMagic.size());
  io::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(volume.slices));
  io::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(volume.height));
  io::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(volume.width));
  io::write_doubles(os, volume.data.data(), volume.data.size());
  io::write_pod<double>(os, volume.original_max);
  if (!os) throw IoError("write failed for " + path.string());
}

Volume load_volume(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open volume " + path.string());
  std::array<char, 4> magic{};
  is.read(magic.data(), magic.size());
  if (is.gcount() != 4 || magic != kMagic) throw IoError(path.string() + ": bad magic, not a CSSF volume");
  const auto s = io::read_pod<std::uint32_t>(is, "volume header");
  const auto h = io::read_pod<std::uint32_t>(is, "volume header");
  const auto w = io::read_pod<std::uint32_t>(is, "volume header");
  if (s == 0 || h == 0 || w == 0) throw IoError(path.string() + ": zero volume dimension");

  const std::uintmax_t expected = 16 + std::uintmax_t{s} * h * w * 8 + 8;
  const std::uintmax_t actual = std::filesystem::file_size(path);
  if (actual != expected) {
    throw IoError(path.string() + ": size " + std::to_string(actual) + " bytes does not match " + std::to_string(s) +
                  "x" + std::to_string(h) + "x" + std::to_string(w) + " (expected " + std::to_string(expected) + ")");
  }
  Volume v(s, h, w);
  io::read_doubles(is, v.data.data(), v.data.size(), "volume payload");
  v.original_max = io::read_pod<double>(is, "volume trailer");
  return v;
}

}  // namespace cssfn
