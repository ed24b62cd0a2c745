#pragma once

// Architecture wiring shared by every execution backend.
//
// A backend supplies a Value type and the primitive operations below; the
// functions here decide which layers exist, their order, and how values flow
// between them. Layer creation order is identical for all backends, which is
// what lets the numeric backends consume parameters sequentially.
//
//   Value conv(const Value&, const std::string& name, size_t in, size_t out, size_t k)
//   Value relu(const Value&)
//   Value add(const Value&, const Value&)
//   Value concat(const std::vector<Value>&)
//   std::vector<Value> split(const Value&, size_t q)
//   Value mean(const std::vector<Value>&)
//   Value shuffle(const Value&, size_t r)
//   Value upsampled_input(size_t r)          // bicubic x-hat, constant

#include <string>
#include <vector>

#include "cssfn/network.hpp"

namespace cssfn::wiring {

template <class B>
using Val = typename B::Value;

template <class B>
Val<B> serial_unit(B& b, const Val<B>& x, const NetworkConfig& cfg, const std::string& prefix) {
  const std::size_t q = cfg.splits;
  const std::size_t width = cfg.subfeature_width();
  const std::size_t co = cfg.output_width();
  auto parts = b.split(x, q);
  // z^0 = 0, so the first fusion conv sees x^0 alone.
  auto z = b.relu(b.conv(parts[0], prefix + "fuse1", width, co, 3));
  for (std::size_t k = 1; k < q; ++k) {
    auto joined = b.concat({parts[k], z});
    z = b.relu(b.conv(joined, prefix + "fuse" + std::to_string(k + 1), width + co, co, 3));
  }
  return b.conv(z, prefix + "extend", co, cfg.channels, 3);
}

template <class B>
Val<B> mar_unit(B& b, const Val<B>& x, const NetworkConfig& cfg, const std::string& prefix) {
  const std::size_t q = cfg.splits;
  const std::size_t width = cfg.subfeature_width();
  auto branches = b.split(x, q);
  for (std::size_t stage = 1; stage <= 2; ++stage) {
    auto avg = b.mean(branches);
    std::vector<Val<B>> next;
    next.reserve(q);
    for (std::size_t k = 0; k < q; ++k) {
      const std::string name = prefix + "stage" + std::to_string(stage) + ".branch" + std::to_string(k + 1);
      next.push_back(b.add(b.relu(b.conv(branches[k], name, width, width, 3)), avg));
    }
    branches = std::move(next);
  }
  return b.concat(branches);
}

template <class B>
Val<B> plain_unit(B& b, const Val<B>& x, const NetworkConfig& cfg, const std::string& prefix) {
  auto h = b.relu(b.conv(x, prefix + "conv1", cfg.channels, cfg.channels, 3));
  return b.conv(h, prefix + "conv2", cfg.channels, cfg.channels, 3);
}

template <class B>
Val<B> unit(B& b, const Val<B>& x, const NetworkConfig& cfg, const std::string& prefix) {
  switch (cfg.bif) {
    case BranchFusion::Plain:
      return plain_unit(b, x, cfg, prefix);
    case BranchFusion::MergeAndRun:
      return mar_unit(b, x, cfg, prefix);
    case BranchFusion::Serial:
      break;
  }
  return serial_unit(b, x, cfg, prefix);
}

/// Compression, m chained units, local residual.
template <class B>
Val<B> block(B& b, const Val<B>& input, std::size_t in_channels, const NetworkConfig& cfg,
             const std::string& prefix) {
  auto compressed = b.conv(input, prefix + "compress", in_channels, cfg.channels, 1);
  auto x = compressed;
  for (std::size_t j = 1; j <= cfg.units; ++j) {
    x = unit(b, x, cfg, prefix + "unit" + std::to_string(j) + ".");
  }
  return b.add(compressed, x);
}

template <class B>
std::vector<Val<B>> newest_first(const std::vector<Val<B>>& outputs) {
  return {outputs.rbegin(), outputs.rend()};
}

template <class B>
Val<B> network(B& b, const Val<B>& input, const NetworkConfig& cfg) {
  const std::size_t c = cfg.channels;
  auto s = b.conv(input, "shallow.conv1", cfg.io_channels, c, 3);
  s = b.conv(s, "shallow.conv2", c, c, 1);
  const auto x0 = b.conv(s, "shallow.conv3", c, c, 3);

  std::vector<Val<B>> outputs{x0};
  for (std::size_t i = 1; i <= cfg.blocks; ++i) {
    const std::string prefix = "block" + std::to_string(i) + ".";
    if (cfg.gff == GlobalFusion::Dense) {
      outputs.push_back(block(b, b.concat(newest_first<B>(outputs)), i * c, cfg, prefix));
    } else {
      outputs.push_back(block(b, outputs.back(), c, cfg, prefix));
    }
  }

  Val<B> fused = outputs.back();
  std::size_t fused_width = c;
  if (cfg.gff != GlobalFusion::None) {
    fused = b.concat(newest_first<B>(outputs));
    fused_width = (cfg.blocks + 1) * c;
  }
  auto f = b.conv(fused, "fusion.reduce", fused_width, c, 1);
  f = b.conv(f, "fusion.conv", c, c, 3);
  auto deep = b.add(x0, f);

  if (cfg.scale == 4) {
    deep = b.shuffle(b.conv(deep, "upscale1.conv", c, 4 * c, 3), 2);
    deep = b.shuffle(b.conv(deep, "upscale2.conv", c, 4 * c, 3), 2);
  } else {
    deep = b.shuffle(b.conv(deep, "upscale1.conv", c, c * cfg.scale * cfg.scale, 3), cfg.scale);
  }
  auto y = b.conv(deep, "reconstruct", c, cfg.io_channels, 3);
  return b.add(y, b.upsampled_input(cfg.scale));
}

}  // namespace cssfn::wiring
