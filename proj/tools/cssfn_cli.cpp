#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <iostream>

#include "CLI11.hpp"
#include "cssfn/config.hpp"
#include "cssfn/error.hpp"
#include "cssfn/evaluate.hpp"
#include "cssfn/network.hpp"
#include "cssfn/train.hpp"
#include "cssfn/volume.hpp"

namespace fs = std::filesystem;
using namespace cssfn;

namespace {

void run_inspect(const fs::path& config_path) {
  const TrainConfig config = load_config(config_path);
  const NetworkConfig& net = config.network;
  net.validate();
  const LayerGraph graph = describe_network(net);
  const ParamCount total = count_params(net);

  std::cout << "c=" << net.channels << " n=" << net.blocks << " m=" << net.units << " q=" << net.splits
            << " c_o=" << net.output_width() << " r=" << net.scale << " ic=" << net.io_channels
            << " gff=" << to_string(net.gff) << " bif=" << to_string(net.bif) << '\n';
  std::cout << "depth (formula):        " << compute_depth(net) << '\n';
  std::cout << "depth (longest path):   " << graph.longest_path() << '\n';
  std::cout << "conv layers:            " << graph.layers.size() << '\n';
  std::cout << "parameters:             " << total.total() << " (" << std::fixed << std::setprecision(3)
            << total.millions() << "M)\n";
  std::cout << "parameters w/o biases:  " << total.weights << " ("
            << static_cast<double>(total.weights) / 1e6 << "M)\n\n";

  std::cout << std::left << std::setw(12) << "module" << std::right << std::setw(14) << "weights" << std::setw(10)
            << "biases" << '\n';
  for (const auto& [name, count] : param_breakdown(graph)) {
    std::cout << std::left << std::setw(12) << name << std::right << std::setw(14) << count.weights << std::setw(10)
              << count.biases << '\n';
  }
}

void run_degrade(const fs::path& config_path, const std::optional<fs::path>& in_dir, const fs::path& out_dir) {
  const TrainConfig config = load_config(config_path);
  const DatasetSpec& spec = config.dataset;
  std::vector<std::pair<std::string, Volume>> volumes;
  if (in_dir) {
    if (!fs::is_directory(*in_dir)) throw IoError("input directory " + in_dir->string() + " does not exist");
    std::vector<fs::path> paths;
    for (const auto& e : fs::directory_iterator(*in_dir)) {
      if (e.is_regular_file() && e.path().extension() == ".vol") paths.push_back(e.path());
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw IoError("no .vol files in " + in_dir->string());
    for (const auto& p : paths) volumes.emplace_back(p.stem().string(), load_volume(p));
  } else {
    for (std::size_t i = 0; i < spec.synthetic_volumes; ++i) {
      Rng rng(derive_seed(spec.seed, i));
      volumes.emplace_back(phantom_name(i), synth_phantom(spec.phantom, rng));
    }
  }

  Rng split_rng(spec.seed);
  const auto splits = assign_splits(volumes.size(), spec.val_fraction, spec.test_fraction, split_rng);
  fs::create_directories(out_dir / "hr");
  fs::create_directories(out_dir / "lr");
  std::vector<ManifestEntry> entries;
  for (std::size_t i = 0; i < volumes.size(); ++i) {
    auto& [name, hr] = volumes[i];
    const VolumePair pair = make_pair(name, std::move(hr), spec.degradation, spec.scale);
    save_volume(pair.hr, out_dir / "hr" / (name + ".vol"));
    save_volume(pair.lr, out_dir / "lr" / (name + ".vol"));
    entries.push_back({fs::path("hr") / (name + ".vol"), splits[i]});
    std::cout << name << ' ' << splits[i] << ' ' << pair.hr.slices << 'x' << pair.hr.height << 'x'
              << pair.hr.width << " -> " << pair.lr.height << 'x' << pair.lr.width << '\n';
  }
  write_manifest(out_dir / "manifest.txt", entries);
  std::cout << "wrote " << (out_dir / "manifest.txt").string() << '\n';
}

void run_train(const fs::path& config_path, const fs::path& out_dir, const std::optional<fs::path>& resume) {
  TrainConfig config = load_config(config_path);
  if (!config.dataset.manifest.empty() && config.dataset.manifest.is_relative()) {
    config.dataset.manifest = fs::absolute(config_path).parent_path() / config.dataset.manifest;
  }
  const TrainOutcome outcome = train(config, out_dir, resume);
  std::cout << "iterations " << outcome.iterations << ", final train L1 " << std::setprecision(6)
            << outcome.final_loss << '\n'
            << "log " << outcome.log.string() << '\n'
            << "checkpoint " << outcome.checkpoint.string() << '\n';
}

void run_eval(const fs::path& ckpt, const fs::path& manifest, const fs::path& csv) {
  const auto rows = evaluate_checkpoint(ckpt, manifest);
  write_eval_csv(rows, csv);
  std::cout << format_eval_table(rows);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Channel splitting and serial fusion network for MR super-resolution"};
  app.require_subcommand(1);

  fs::path config;
  fs::path out;
  fs::path in_dir;
  fs::path resume;
  fs::path ckpt;
  fs::path data;

  auto* inspect = app.add_subcommand("inspect", "Report depth and parameter statistics");
  inspect->add_option("--config", config, "Configuration file")->required()->check(CLI::ExistingFile);

  auto* degrade = app.add_subcommand("degrade", "Build an HR/LR dataset and manifest");
  degrade->add_option("--config", config, "Configuration file")->required()->check(CLI::ExistingFile);
  auto* in_opt = degrade->add_option("--in", in_dir, "Directory of .vol files (default: synthetic phantoms)");
  degrade->add_option("--out", out, "Output directory")->required();

  auto* trainer = app.add_subcommand("train", "Train a network");
  trainer->add_option("--config", config, "Configuration file")->required()->check(CLI::ExistingFile);
  trainer->add_option("--out", out, "Output directory")->required();
  auto* resume_opt = trainer->add_option("--resume", resume, "Checkpoint to continue from")->check(CLI::ExistingFile);

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a manifest's test volumes");
  eval->add_option("--ckpt", ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  eval->add_option("--data", data, "Manifest")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", out, "CSV output")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*inspect) run_inspect(config);
    if (*degrade) run_degrade(config, *in_opt ? std::optional(in_dir) : std::nullopt, out);
    if (*trainer) run_train(config, out, *resume_opt ? std::optional(resume) : std::nullopt);
    if (*eval) run_eval(ckpt, data, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
