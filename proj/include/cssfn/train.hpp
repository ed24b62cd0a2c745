#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cssfn/config.hpp"
#include "cssfn/dataset.hpp"
#include "cssfn/network.hpp"
#include "cssfn/optim.hpp"
#include "cssfn/random.hpp"

namespace cssfn {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

/// Everything needed to continue training bit-exactly.
struct Checkpoint {
  std::string config_text;
  std::uint64_t iteration = 0;
  std::vector<NamedTensor> tensors;
  AdamState adam;
  std::string rng_state;
  std::vector<double> loss_history;
};

/// Little-endian binary: "CSCK", u32 version, config text, iteration,
/// length-prefixed name/shape/payload tensor records, Adam state, RNG state,
/// loss history.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies checkpoint tensors into a network built from the same config.
void load_parameters(Network& net, const Checkpoint& ckpt);

struct LogRow {
  std::size_t iteration = 0;
  double lr = 0.0;
  double train_l1 = 0.0;
  std::optional<double> val_psnr;
  std::optional<double> val_ssim;
};

class Trainer {
 public:
  explicit Trainer(TrainConfig config);
  /// Continues from a checkpoint written by an identically configured run.
  Trainer(TrainConfig config, const Checkpoint& resume_from);

  /// One sample -> augment -> forward -> L1 -> backward -> Adam iteration.
  /// Returns the minibatch loss before the update.
  double step();
  /// Steps until `until` iterations are done (default: config.iterations),
  /// invoking `on_log` for each log row.
  void run(std::optional<std::size_t> until = std::nullopt, const std::function<void(const LogRow&)>& on_log = {},
           const std::function<void(const Trainer&)>& on_checkpoint = {});

  /// Mean PSNR/SSIM of the network on the fixed validation slices.
  std::pair<double, double> validate();

  [[nodiscard]] std::size_t iteration() const { return iteration_; }
  [[nodiscard]] const std::vector<double>& loss_history() const { return history_; }
  [[nodiscard]] const TrainConfig& config() const { return config_; }
  [[nodiscard]] Network& network() { return net_; }
  [[nodiscard]] const AdamState& adam() const { return adam_; }
  [[nodiscard]] Checkpoint checkpoint() const;

 private:
  void prepare_data();
  PatchBatch next_batch();

  TrainConfig config_;
  Network net_;
  AdamState adam_;
  Rng rng_;
  std::size_t iteration_ = 0;
  std::vector<double> history_;
  std::vector<VolumePair> train_;
  std::vector<VolumePair> val_;
  std::optional<PatchBatch> fixed_;
  std::vector<std::pair<std::size_t, std::size_t>> val_slices_;  // (volume, slice)
};

struct TrainOutcome {
  std::size_t iterations = 0;
  double final_loss = 0.0;
  std::filesystem::path checkpoint;
  std::filesystem::path log;
};

/// CLI-level training: writes train_log.csv and checkpoints under out_dir.
TrainOutcome train(const TrainConfig& config, const std::filesystem::path& out_dir,
                   const std::optional<std::filesystem::path>& resume = std::nullopt);

/// Formats one CSV log row (iteration,lr,train_l1,val_psnr,val_ssim).
std::string format_log_row(const LogRow& row);

}  // namespace cssfn
