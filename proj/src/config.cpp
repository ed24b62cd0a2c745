#include "cssfn/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "cssfn/error.hpp"

namespace cssfn {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  std::istringstream is(v);
  double out = 0.0;
  is >> out;
  if (is.fail() || !is.eof()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

void apply(TrainConfig& c, const std::string& key, const std::string& v) {
  auto& net = c.network;
  auto& data = c.dataset;
  if (key == "preset") {
    c = preset(v);
  } else if (key == "c") {
    net.channels = to_size(key, v);
  } else if (key == "n") {
    net.blocks = to_size(key, v);
  } else if (key == "m") {
    net.units = to_size(key, v);
  } else if (key == "q") {
    net.splits = to_size(key, v);
  } else if (key == "c_o") {
    net.fusion_width = v == "c/q" ? 0 : to_size(key, v);
  } else if (key == "r") {
    net.scale = to_size(key, v);
    data.scale = net.scale;
  } else if (key == "ic") {
    net.io_channels = to_size(key, v);
  } else if (key == "gff") {
    net.gff = parse_global_fusion(v);
  } else if (key == "bif") {
    net.bif = parse_branch_fusion(v);
  } else if (key == "seed") {
    net.seed = to_u64(key, v);
  } else if (key == "patch_size") {
    c.patch_size = to_size(key, v);
  } else if (key == "minibatch") {
    c.minibatch = to_size(key, v);
  } else if (key == "iterations") {
    c.iterations = to_size(key, v);
  } else if (key == "base_lr") {
    c.base_lr = to_double(key, v);
  } else if (key == "halving_period") {
    c.halving_period = to_size(key, v);
  } else if (key == "checkpoint_every") {
    c.checkpoint_every = to_size(key, v);
  } else if (key == "validate_every") {
    c.validate_every = to_size(key, v);
  } else if (key == "validation_slices") {
    c.validation_slices = to_size(key, v);
  } else if (key == "log_every") {
    c.log_every = to_size(key, v);
  } else if (key == "fixed_patches") {
    c.fixed_patches = to_size(key, v);
  } else if (key == "augment") {
    c.augment = to_bool(key, v);
  } else if (key == "degradation") {
    data.degradation = parse_degradation(v);
  } else if (key == "execution") {
    data.execution = parse_execution(v);
  } else if (key == "manifest") {
    data.manifest = v;
  } else if (key == "synthetic_volumes") {
    data.synthetic_volumes = to_size(key, v);
  } else if (key == "phantom_slices") {
    data.phantom.slices = to_size(key, v);
  } else if (key == "phantom_height") {
    data.phantom.height = to_size(key, v);
  } else if (key == "phantom_width") {
    data.phantom.width = to_size(key, v);
  } else if (key == "phantom_max_frequency") {
    data.phantom.max_frequency = to_size(key, v);
  } else if (key == "val_fraction") {
    data.val_fraction = to_double(key, v);
  } else if (key == "test_fraction") {
    data.test_fraction = to_double(key, v);
  } else if (key == "data_seed") {
    data.seed = to_u64(key, v);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

void TrainConfig::validate() const {
  network.validate();
  if (dataset.scale != network.scale) throw ConfigError("dataset scale differs from network scale");
  if (patch_size == 0 || minibatch == 0 || iterations == 0 || halving_period == 0 || log_every == 0) {
    throw ConfigError("patch_size, minibatch, iterations, halving_period and log_every must be positive");
  }
  if (patch_size < 3) throw ConfigError("patch_size must be at least 3");
  if (!(base_lr > 0.0) || !std::isfinite(base_lr)) throw ConfigError("base_lr must be a positive number");
  if (dataset.execution == Execution::Pure2D && network.io_channels != 1) {
    throw ConfigError("pure2d execution needs ic=1");
  }
  if (dataset.execution == Execution::Pseudo3D && dataset.manifest.empty() &&
      network.io_channels != dataset.phantom.slices) {
    throw ConfigError("pseudo3d execution needs ic equal to the slice count");
  }
  if (validate_every > 0 && validation_slices == 0) throw ConfigError("validation_slices must be positive");
}

TrainConfig parse_config(const std::string& text) {
  TrainConfig c;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      apply(c, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  c.dataset.scale = c.network.scale;
  return c;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const TrainConfig& c) {
  const auto& n = c.network;
  const auto& d = c.dataset;
  std::ostringstream os;
  os << "c=" << n.channels << '\n'
     << "n=" << n.blocks << '\n'
     << "m=" << n.units << '\n'
     << "q=" << n.splits << '\n'
     << "c_o=" << (n.fusion_width == 0 ? std::string("c/q") : std::to_string(n.fusion_width)) << '\n'
     << "r=" << n.scale << '\n'
     << "ic=" << n.io_channels << '\n'
     << "gff=" << to_string(n.gff) << '\n'
     << "bif=" << to_string(n.bif) << '\n'
     << "seed=" << n.seed << '\n'
     << "patch_size=" << c.patch_size << '\n'
     << "minibatch=" << c.minibatch << '\n'
     << "iterations=" << c.iterations << '\n'
     << "base_lr=" << format_double(c.base_lr) << '\n'
     << "halving_period=" << c.halving_period << '\n'
     << "checkpoint_every=" << c.checkpoint_every << '\n'
     << "validate_every=" << c.validate_every << '\n'
     << "validation_slices=" << c.validation_slices << '\n'
     << "log_every=" << c.log_every << '\n'
     << "fixed_patches=" << c.fixed_patches << '\n'
     << "augment=" << (c.augment ? 1 : 0) << '\n'
     << "degradation=" << to_string(d.degradation) << '\n'
     << "execution=" << to_string(d.execution) << '\n';
  if (!d.manifest.empty()) os << "manifest=" << d.manifest.string() << '\n';
  os << "synthetic_volumes=" << d.synthetic_volumes << '\n'
     << "phantom_slices=" << d.phantom.slices << '\n'
     << "phantom_height=" << d.phantom.height << '\n'
     << "phantom_width=" << d.phantom.width << '\n'
     << "phantom_max_frequency=" << d.phantom.max_frequency << '\n'
     << "val_fraction=" << format_double(d.val_fraction) << '\n'
     << "test_fraction=" << format_double(d.test_fraction) << '\n'
     << "data_seed=" << d.seed << '\n';
  return os.str();
}

TrainConfig preset(const std::string& name) {
  TrainConfig c;
  if (name == "paper") return c;
  if (name == "tiny") {
    c.network.channels = 16;
    c.network.blocks = 2;
    c.network.units = 2;
    c.network.splits = 2;
    c.patch_size = 12;
    c.minibatch = 4;
    c.fixed_patches = 4;
    c.augment = false;
    c.iterations = 5000;
    c.base_lr = 1e-3;
    c.halving_period = 1000;
    c.log_every = 50;
    c.dataset.synthetic_volumes = 3;
    c.dataset.phantom = {.slices = 4, .height = 48, .width = 48, .max_frequency = 0};
    c.dataset.val_fraction = 0.34;
    c.dataset.test_fraction = 0.33;
    return c;
  }
  if (name == "small") {
    c.network.channels = 32;
    c.network.blocks = 2;
    c.network.units = 2;
    c.network.splits = 4;
    c.minibatch = 8;
    c.iterations = 2000;
    c.base_lr = 5e-4;
    c.halving_period = 800;
    c.validate_every = 250;
    c.checkpoint_every = 500;
    c.log_every = 25;
    c.dataset.synthetic_volumes = 5;
    c.dataset.phantom = {.slices = 8, .height = 96, .width = 96, .max_frequency = 0};
    return c;
  }
  throw ConfigError("unknown preset '" + name + "' (expected tiny, small or paper)");
}

double lr_schedule(std::size_t iteration, const TrainConfig& config) {
  const auto halvings = static_cast<int>(iteration / config.halving_period);
  return std::ldexp(config.base_lr, -halvings);
}

}  // namespace cssfn
