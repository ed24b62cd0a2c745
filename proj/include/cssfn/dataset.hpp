#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cssfn/degrade.hpp"
#include "cssfn/random.hpp"
#include "cssfn/tensor.hpp"
#include "cssfn/volume.hpp"

namespace cssfn {

enum class Execution { Pure2D, Pseudo3D };

std::string to_string(Execution e);
Execution parse_execution(const std::string& s);

/// A high-resolution volume and its degraded counterpart.
struct VolumePair {
  std::string id;
  Volume hr;
  Volume lr;
};

VolumePair make_pair(std::string id, Volume hr, Degradation kind, std::size_t r);

struct ManifestEntry {
  std::filesystem::path path;
  std::string split;  // "train", "val" or "test"
};

/// One `<path> <split>` record per line; blank lines and `#` comments are
/// skipped. Relative paths resolve against the manifest's directory.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries);

/// Deterministic disjoint train/val/test assignment of `count` items. Each
/// non-zero fraction receives at least one item when count allows.
std::vector<std::string> assign_splits(std::size_t count, double val_fraction, double test_fraction, Rng& rng);

struct DatasetSpec {
  /// Manifest of HR volumes; empty selects the synthetic phantom source.
  std::filesystem::path manifest;
  std::size_t synthetic_volumes = 3;
  PhantomParams phantom;
  double val_fraction = 0.2;
  double test_fraction = 0.2;
  Degradation degradation = Degradation::Bicubic;
  std::size_t scale = 2;
  Execution execution = Execution::Pure2D;
  std::uint64_t seed = 7;
};

/// Identifier of the i-th synthetic volume ("phantom007").
std::string phantom_name(std::size_t index);

/// Loads (or synthesises) every volume of the requested split and degrades it.
std::vector<VolumePair> load_split(const DatasetSpec& spec, const std::string& split);

struct PatchOrigin {
  std::size_t volume = 0;
  std::size_t slice = 0;  // first slice; all slices under pseudo 3D
  std::size_t y = 0;      // LR top-left
  std::size_t x = 0;
};

struct PatchBatch {
  Tensor lr;  // (b, ic, p, p)
  Tensor hr;  // (b, ic, r*p, r*p)
  std::vector<PatchOrigin> origins;
};

/// Uniformly samples `count` aligned patch pairs: LR windows of p x p and the
/// HR windows at r times the LR offsets. Pure 2D takes one slice per item;
/// pseudo 3D stacks every slice of the volume as channels.
PatchBatch extract_patches(std::span<const VolumePair> pairs, std::size_t r, std::size_t p, std::size_t count,
                           Execution execution, Rng& rng);

}  // namespace cssfn
