#include "cssfn/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "cssfn/error.hpp"
#include "cssfn/evaluate.hpp"
#include "cssfn/metrics.hpp"
#include "cssfn/ops.hpp"

namespace cssfn {
namespace {

constexpr std::uint64_t kFixedPatchStream = 1;
constexpr std::uint64_t kSamplerStream = 2;

Tensor batch_item(const Tensor& t, std::size_t i) {
  const auto& s = t.shape();
  const std::size_t n = s.c * s.h * s.w;
  const auto src = t.data().subspan(i * n, n);
  return Tensor(Shape{1, s.c, s.h, s.w}, std::vector<double>(src.begin(), src.end()));
}

void set_batch_item(Tensor& t, std::size_t i, const Tensor& item) {
  const std::size_t n = item.size();
  std::copy(item.data().begin(), item.data().end(), t.data().begin() + static_cast<std::ptrdiff_t>(i * n));
}

void check_pseudo3d(const TrainConfig& c, std::span<const VolumePair> pairs) {
  if (c.dataset.execution != Execution::Pseudo3D) return;
  for (const auto& p : pairs) {
    if (p.hr.slices != c.network.io_channels) {
      throw ConfigError("volume " + p.id + " has " + std::to_string(p.hr.slices) + " slices but ic=" +
                        std::to_string(c.network.io_channels));
    }
  }
}

std::string comparable_config(TrainConfig c) {
  c.iterations = 1;
  return format_config(c);
}

}  // namespace

Trainer::Trainer(TrainConfig config)
    : config_(std::move(config)),
      net_((config_.validate(), config_.network)),
      rng_(derive_seed(config_.network.seed, kSamplerStream)) {
  prepare_data();
}

Trainer::Trainer(TrainConfig config, const Checkpoint& resume_from) : Trainer(std::move(config)) {
  if (comparable_config(config_) != comparable_config(parse_config(resume_from.config_text))) {
    throw ConfigError("checkpoint was written with a different configuration");
  }
  load_parameters(net_, resume_from);
  adam_ = resume_from.adam;
  rng_.restore(resume_from.rng_state);
  iteration_ = resume_from.iteration;
  history_ = resume_from.loss_history;
}

void Trainer::prepare_data() {
  train_ = load_split(config_.dataset, "train");
  if (train_.empty()) throw ConfigError("the training split is empty");
  check_pseudo3d(config_, train_);
  const std::size_t p = config_.patch_size;
  for (const auto& pair : train_) {
    if (pair.lr.height < p || pair.lr.width < p) {
      throw ConfigError("patch_size " + std::to_string(p) + " exceeds LR slice " + std::to_string(pair.lr.height) +
                        "x" + std::to_string(pair.lr.width) + " of " + pair.id);
    }
  }
  if (config_.fixed_patches > 0) {
    Rng rng(derive_seed(config_.network.seed, kFixedPatchStream));
    fixed_ = extract_patches(train_, config_.network.scale, p, config_.fixed_patches, config_.dataset.execution, rng);
  }
  if (config_.validate_every > 0) {
    val_ = load_split(config_.dataset, "val");
    if (val_.empty()) throw ConfigError("validation requested but the val split is empty");
    check_pseudo3d(config_, val_);
    std::vector<std::pair<std::size_t, std::size_t>> all;
    for (std::size_t v = 0; v < val_.size(); ++v) {
      const std::size_t slices = config_.dataset.execution == Execution::Pseudo3D ? 1 : val_[v].lr.slices;
      for (std::size_t s = 0; s < slices; ++s) all.emplace_back(v, s);
    }
    const std::size_t k = std::min(config_.validation_slices, all.size());
    for (std::size_t i = 0; i < k; ++i) val_slices_.push_back(all[i * all.size() / k]);
  }
}

PatchBatch Trainer::next_batch() {
  PatchBatch batch = fixed_ ? *fixed_
                            : extract_patches(train_, config_.network.scale, config_.patch_size, config_.minibatch,
                                              config_.dataset.execution, rng_);
  if (config_.augment) {
    for (std::size_t i = 0; i < batch.lr.shape().n; ++i) {
      PatchPair pair{batch_item(batch.lr, i), batch_item(batch.hr, i)};
      augment(pair, rng_);
      set_batch_item(batch.lr, i, pair.lr);
      set_batch_item(batch.hr, i, pair.hr);
    }
  }
  return batch;
}

double Trainer::step() {
  const PatchBatch batch = next_batch();
  const Tensor pred = net_.forward(batch.lr);
  const double loss = l1_loss(pred, batch.hr);
  if (!std::isfinite(loss)) {
    throw NumericError("non-finite training loss at iteration " + std::to_string(iteration_ + 1));
  }
  net_.backward(l1_loss_backward(pred, batch.hr));
  net_.clear_cache();
  auto params = net_.parameters();
  adam_step(params, adam_, lr_schedule(iteration_, config_));
  for (const Tensor* t : params) {
    if (!t->all_finite()) {
      throw NumericError("non-finite parameters after iteration " + std::to_string(iteration_ + 1));
    }
  }
  ++iteration_;
  history_.push_back(loss);
  return loss;
}

std::pair<double, double> Trainer::validate() {
  if (val_slices_.empty()) throw StateError("validation is not configured");
  double psnr_sum = 0.0;
  double ssim_sum = 0.0;
  for (const auto& [v, s] : val_slices_) {
    const auto& pair = val_[v];
    if (config_.dataset.execution == Execution::Pseudo3D) {
      const auto report = evaluate_volume(super_resolve(net_, pair.lr, Execution::Pseudo3D), pair.hr);
      psnr_sum += report.psnr_db;
      ssim_sum += report.ssim;
    } else {
      const Tensor out = net_.forward(pair.lr.slice_tensor(s));
      net_.clear_cache();
      const auto ref = pair.hr.slice(s);
      psnr_sum += psnr(out.data(), ref);
      ssim_sum += ssim(out.data(), ref, pair.hr.height, pair.hr.width);
    }
  }
  const auto n = static_cast<double>(val_slices_.size());
  return {psnr_sum / n, ssim_sum / n};
}

void Trainer::run(std::optional<std::size_t> until, const std::function<void(const LogRow&)>& on_log,
                  const std::function<void(const Trainer&)>& on_checkpoint) {
  const std::size_t target = until.value_or(config_.iterations);
  double window = 0.0;
  std::size_t window_count = 0;
  while (iteration_ < target) {
    const double lr = lr_schedule(iteration_, config_);
    window += step();
    ++window_count;
    const bool log_now = iteration_ % config_.log_every == 0 || iteration_ == target;
    const bool validate_now = config_.validate_every > 0 && iteration_ % config_.validate_every == 0;
    if ((log_now || validate_now) && on_log) {
      LogRow row{iteration_, lr, window / static_cast<double>(window_count), std::nullopt, std::nullopt};
      if (validate_now) {
        const auto [p, s] = validate();
        row.val_psnr = p;
        row.val_ssim = s;
      }
      on_log(row);
      window = 0.0;
      window_count = 0;
    }
    if (on_checkpoint && config_.checkpoint_every > 0 && iteration_ % config_.checkpoint_every == 0) {
      on_checkpoint(*this);
    }
  }
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint c;
  c.config_text = format_config(config_);
  c.iteration = iteration_;
  const auto names = net_.parameter_names();
  for (std::size_t i = 0; i < net_.layer_count(); ++i) {
    c.tensors.push_back({names[2 * i], net_.layer(i).weight});
    c.tensors.push_back({names[2 * i + 1], net_.layer(i).bias});
  }
  for (auto& t : c.tensors) t.tensor.drop_grad();
  c.adam = adam_;
  c.rng_state = rng_.state();
  c.loss_history = history_;
  return c;
}

std::string format_log_row(const LogRow& row) {
  std::ostringstream os;
  os << row.iteration << ',' << std::setprecision(10) << row.lr << ',' << row.train_l1 << ',';
  if (row.val_psnr) os << *row.val_psnr;
  os << ',';
  if (row.val_ssim) os << *row.val_ssim;
  return os.str();
}

TrainOutcome train(const TrainConfig& config, const std::filesystem::path& out_dir,
                   const std::optional<std::filesystem::path>& resume) {
  std::filesystem::create_directories(out_dir);
  std::optional<Trainer> trainer;
  if (resume) {
    trainer.emplace(config, load_checkpoint(*resume));
  } else {
    trainer.emplace(config);
  }

  TrainOutcome outcome;
  outcome.log = out_dir / "train_log.csv";
  const bool fresh = !resume || !std::filesystem::exists(outcome.log);
  std::ofstream log(outcome.log, fresh ? std::ios::trunc : std::ios::app);
  if (!log) throw IoError("cannot write " + outcome.log.string());
  if (fresh) log << "iteration,lr,train_l1,val_psnr,val_ssim\n";

  const auto save = [&](const Trainer& t) {
    std::ostringstream name;
    name << "checkpoint_" << std::setw(8) << std::setfill('0') << t.iteration() << ".ckpt";
    save_checkpoint(t.checkpoint(), out_dir / name.str());
  };
  trainer->run(
      std::nullopt, [&](const LogRow& row) { log << format_log_row(row) << '\n' << std::flush; }, save);

  outcome.iterations = trainer->iteration();
  outcome.final_loss = trainer->loss_history().empty() ? 0.0 : trainer->loss_history().back();
  outcome.checkpoint = out_dir / "final.ckpt";
  save_checkpoint(trainer->checkpoint(), outcome.checkpoint);
  return outcome;
}

}  // namespace cssfn
