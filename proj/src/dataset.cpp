#include "cssfn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cssfn/error.hpp"

namespace cssfn {

std::string to_string(Execution e) { return e == Execution::Pure2D ? "pure2d" : "pseudo3d"; }

Execution parse_execution(const std::string& s) {
  if (s == "pure2d" || s == "2d") return Execution::Pure2D;
  if (s == "pseudo3d" || s == "3d") return Execution::Pseudo3D;
  throw ConfigError("execution must be pure2d or pseudo3d; got '" + s + "'");
}

VolumePair make_pair(std::string id, Volume hr, Degradation kind, std::size_t r) {
  const Tensor lr = degrade(hr.as_channels(), kind, r);
  Volume lr_volume = Volume::from_channels(lr, hr.original_max);
  return {std::move(id), std::move(hr), std::move(lr_volume)};
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open manifest " + path.string());
  std::vector<ManifestEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string file;
    std::string split;
    if (!(fields >> file)) continue;
    if (!(fields >> split)) throw IoError(path.string() + ":" + std::to_string(lineno) + ": missing split");
    if (split != "train" && split != "val" && split != "test") {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": unknown split '" + split + "'");
    }
    std::filesystem::path p(file);
    if (p.is_relative()) p = path.parent_path() / p;
    out.push_back({p, split});
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write manifest " + path.string());
  for (const auto& e : entries) os << e.path.generic_string() << ' ' << e.split << '\n';
}

std::vector<std::string> assign_splits(std::size_t count, double val_fraction, double test_fraction, Rng& rng) {
  if (val_fraction < 0 || test_fraction < 0 || val_fraction + test_fraction >= 1.0) {
    throw ConfigError("split fractions must be non-negative and leave room for training data");
  }
  auto share = [count](double f) {
    if (f <= 0.0) return std::size_t{0};
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(f * static_cast<double>(count))));
  };
  const std::size_t n_val = share(val_fraction);
  const std::size_t n_test = share(test_fraction);
  if (n_val + n_test >= count) throw ConfigError("too few volumes for the requested splits");

  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  // Fisher-Yates with the platform-independent index draw.
  for (std::size_t i = count; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);

  std::vector<std::string> splits(count, "train");
  for (std::size_t i = 0; i < n_val; ++i) splits[order[i]] = "val";
  for (std::size_t i = 0; i < n_test; ++i) splits[order[n_val + i]] = "test";
  return splits;
}

std::string phantom_name(std::size_t index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 3) digits.insert(0, 3 - digits.size(), '0');
  return "phantom" + digits;
}

std::vector<VolumePair> load_split(const DatasetSpec& spec, const std::string& split) {
  std::vector<VolumePair> out;
  if (spec.manifest.empty()) {
    Rng rng(spec.seed);
    const auto splits = assign_splits(spec.synthetic_volumes, spec.val_fraction, spec.test_fraction, rng);
    for (std::size_t i = 0; i < spec.synthetic_volumes; ++i) {
      // Each phantom has its own stream so subsets do not depend on each other.
      Rng vol_rng(derive_seed(spec.seed, i));
      if (splits[i] != split) continue;
      out.push_back(make_pair(phantom_name(i), synth_phantom(spec.phantom, vol_rng),
                              spec.degradation, spec.scale));
    }
    return out;
  }
  for (const auto& entry : read_manifest(spec.manifest)) {
    if (entry.split != split) continue;
    out.push_back(make_pair(entry.path.stem().string(), load_volume(entry.path), spec.degradation, spec.scale));
  }
  return out;
}

PatchBatch extract_patches(std::span<const VolumePair> pairs, std::size_t r, std::size_t p, std::size_t count,
                           Execution execution, Rng& rng) {
  if (pairs.empty()) throw ConfigError("extract_patches: no volumes to sample from");
  if (count == 0 || p == 0) throw ConfigError("extract_patches: count and patch size must be positive");
  const auto& first = pairs.front();
  const std::size_t channels = execution == Execution::Pseudo3D ? first.hr.slices : 1;
  for (const auto& pair : pairs) {
    if (pair.lr.height < p || pair.lr.width < p) {
      throw ConfigError("patch size " + std::to_string(p) + " exceeds LR slice " + std::to_string(pair.lr.height) +
                        "x" + std::to_string(pair.lr.width));
    }
    if (pair.hr.height != r * pair.lr.height || pair.hr.width != r * pair.lr.width) {
      throw ConfigError("volume " + pair.id + " is not an r=" + std::to_string(r) + " pair");
    }
    if (execution == Execution::Pseudo3D && pair.hr.slices != channels) {
      throw ConfigError("pseudo 3D sampling needs equal slice counts");
    }
  }

  const std::size_t hp = r * p;
  PatchBatch batch{Tensor(Shape{count, channels, p, p}), Tensor(Shape{count, channels, hp, hp}), {}};
  batch.origins.reserve(count);
  for (std::size_t b = 0; b < count; ++b) {
    PatchOrigin o;
    o.volume = rng.index(pairs.size());
    const auto& pair = pairs[o.volume];
    o.slice = execution == Execution::Pure2D ? rng.index(pair.hr.slices) : 0;
    o.y = rng.index(pair.lr.height - p + 1);
    o.x = rng.index(pair.lr.width - p + 1);
    for (std::size_t c = 0; c < channels; ++c) {
      const auto lr = pair.lr.slice(o.slice + c);
      const auto hr = pair.hr.slice(o.slice + c);
      for (std::size_t y = 0; y < p; ++y)
        for (std::size_t x = 0; x < p; ++x) batch.lr.at(b, c, y, x) = lr[(o.y + y) * pair.lr.width + o.x + x];
      for (std::size_t y = 0; y < hp; ++y)
        for (std::size_t x = 0; x < hp; ++x)
          batch.hr.at(b, c, y, x) = hr[(r * o.y + y) * pair.hr.width + r * o.x + x];
    }
    batch.origins.push_back(o);
  }
  return batch;
}

}  // namespace cssfn
