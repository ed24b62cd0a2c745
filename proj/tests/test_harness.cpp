#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "cssfn/config.hpp"
#include "cssfn/error.hpp"
#include "cssfn/evaluate.hpp"
#include "cssfn/metrics.hpp"
#include "cssfn/ops.hpp"
#include "cssfn/train.hpp"

using namespace cssfn;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cssfn_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TrainConfig quick_config() {
  TrainConfig c = preset("tiny");
  c.network.channels = 8;
  c.patch_size = 6;
  c.minibatch = 2;
  c.fixed_patches = 0;
  c.augment = true;
  c.iterations = 12;
  c.log_every = 4;
  c.dataset.phantom.height = 24;
  c.dataset.phantom.width = 24;
  c.dataset.phantom.slices = 2;
  return c;
}

}  // namespace

TEST(Schedule, PiecewiseHalving) {
  const TrainConfig c;
  EXPECT_EQ(lr_schedule(0, c), 1e-4);
  EXPECT_EQ(lr_schedule(199'999, c), 1e-4);
  EXPECT_EQ(lr_schedule(200'000, c), 5e-5);
  EXPECT_DOUBLE_EQ(lr_schedule(999'999, c), 6.25e-6);
  double prev = lr_schedule(0, c);
  for (std::size_t it = 0; it < 1'000'000; it += 50'000) {
    const double lr = lr_schedule(it, c);
    EXPECT_LE(lr, prev);
    EXPECT_EQ(lr, lr_schedule(it - it % c.halving_period, c));
    prev = lr;
  }
}

TEST(ConfigFile, ParseFormatRoundTrip) {
  const auto c = parse_config("preset = small\nq = 2\nc_o = 7\nr = 3\ngff = CGFF\nbif = MAR  # ablation\n"
                              "degradation = TD\nbase_lr = 2.5e-4\naugment = off\n");
  EXPECT_EQ(c.network.channels, 32u);
  EXPECT_EQ(c.network.splits, 2u);
  EXPECT_EQ(c.network.fusion_width, 7u);
  EXPECT_EQ(c.network.scale, 3u);
  EXPECT_EQ(c.dataset.scale, 3u);
  EXPECT_EQ(c.network.gff, GlobalFusion::Concat);
  EXPECT_EQ(c.network.bif, BranchFusion::MergeAndRun);
  EXPECT_EQ(c.dataset.degradation, Degradation::Truncation);
  EXPECT_EQ(c.base_lr, 2.5e-4);
  EXPECT_FALSE(c.augment);
  EXPECT_EQ(format_config(parse_config(format_config(c))), format_config(c));
}

TEST(ConfigFile, ErrorsNameTheLine) {
  try {
    (void)parse_config("c = 8\n\nwidth = 3\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  EXPECT_THROW(parse_config("c = eight\n"), ConfigError);
  EXPECT_THROW(parse_config("just words\n"), ConfigError);
  EXPECT_THROW(preset("huge"), ConfigError);
}

TEST(ConfigFile, PresetsValidate) {
  for (const auto* name : {"tiny", "small", "paper"}) EXPECT_NO_THROW(preset(name).validate());
  const auto t = preset("tiny");
  EXPECT_EQ(t.network.channels, 16u);
  EXPECT_EQ(t.network.blocks, 2u);
  EXPECT_EQ(t.network.units, 2u);
  EXPECT_EQ(t.network.splits, 2u);
  EXPECT_EQ(t.fixed_patches, 4u);
  EXPECT_EQ(t.iterations, 5000u);
  const auto p = preset("paper");
  EXPECT_EQ(p.minibatch, 16u);
  EXPECT_EQ(p.patch_size, 24u);
  EXPECT_EQ(p.iterations, 1'000'000u);
  EXPECT_EQ(p.halving_period, 200'000u);
  EXPECT_EQ(p.base_lr, 1e-4);
}

TEST(ConfigFile, ValidationRejectsBadValues) {
  auto c = preset("tiny");
  c.base_lr = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = preset("tiny");
  c.network.io_channels = 4;
  EXPECT_THROW(c.validate(), ConfigError);
  c.dataset.execution = Execution::Pseudo3D;
  EXPECT_NO_THROW(c.validate());
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const fs::path dir = temp_dir("ckpt");
  Trainer t(quick_config());
  for (int i = 0; i < 3; ++i) t.step();
  const Checkpoint c = t.checkpoint();
  save_checkpoint(c, dir / "a.ckpt");
  const Checkpoint back = load_checkpoint(dir / "a.ckpt");
  EXPECT_EQ(back.config_text, c.config_text);
  EXPECT_EQ(back.iteration, 3u);
  ASSERT_EQ(back.tensors.size(), c.tensors.size());
  for (std::size_t i = 0; i < c.tensors.size(); ++i) {
    EXPECT_EQ(back.tensors[i].name, c.tensors[i].name);
    EXPECT_EQ(back.tensors[i].tensor.shape(), c.tensors[i].tensor.shape());
    EXPECT_EQ(back.tensors[i].tensor.values(), c.tensors[i].tensor.values());
  }
  EXPECT_EQ(back.adam.step, 3u);
  EXPECT_EQ(back.adam.first_moment, c.adam.first_moment);
  EXPECT_EQ(back.adam.second_moment, c.adam.second_moment);
  EXPECT_EQ(back.rng_state, c.rng_state);
  EXPECT_EQ(back.loss_history, c.loss_history);
}

TEST(Checkpoint, RejectsCorruptFiles) {
  const fs::path dir = temp_dir("badckpt");
  {
    std::ofstream f(dir / "x.ckpt", std::ios::binary);
    f << "NOPE1234";
  }
  EXPECT_THROW(load_checkpoint(dir / "x.ckpt"), IoError);
  Trainer t(quick_config());
  save_checkpoint(t.checkpoint(), dir / "y.ckpt");
  fs::resize_file(dir / "y.ckpt", fs::file_size(dir / "y.ckpt") / 2);
  EXPECT_THROW(load_checkpoint(dir / "y.ckpt"), IoError);
}

TEST(Checkpoint, ResumeRequiresSameConfig) {
  Trainer t(quick_config());
  t.step();
  auto other = quick_config();
  other.network.seed = 99;
  EXPECT_THROW(Trainer(other, t.checkpoint()), ConfigError);
  auto longer = quick_config();
  longer.iterations = 40;
  EXPECT_NO_THROW(Trainer(longer, t.checkpoint()));
}

TEST(Training, SameSeedSameParameters) {
  Trainer a(quick_config());
  Trainer b(quick_config());
  a.run();
  b.run();
  EXPECT_EQ(a.loss_history(), b.loss_history());
  const auto pa = a.network().parameters();
  const auto pb = b.network().parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->values(), pb[i]->values());
}

TEST(Training, InterruptAndResumeMatches) {
  Trainer full(quick_config());
  full.run();
  Trainer first(quick_config());
  first.run(5);
  Trainer second(quick_config(), first.checkpoint());
  second.run();
  EXPECT_EQ(second.loss_history(), full.loss_history());
}

TEST(Training, LogsAndValidation) {
  auto c = quick_config();
  c.validate_every = 6;
  c.validation_slices = 2;
  std::vector<LogRow> rows;
  Trainer t(c);
  t.run(std::nullopt, [&](const LogRow& r) { rows.push_back(r); });
  ASSERT_EQ(rows.size(), 4u);  // 4, 6, 8, 12
  EXPECT_EQ(rows[1].iteration, 6u);
  EXPECT_TRUE(rows[1].val_psnr.has_value());
  EXPECT_FALSE(rows[0].val_psnr.has_value());
  EXPECT_EQ(format_log_row(LogRow{7, 0.5, 0.25, std::nullopt, std::nullopt}), "7,0.5,0.25,,");
}

TEST(Training, NonFiniteLossAbortsNamingIteration) {
  Trainer t(quick_config());
  t.step();
  t.network().layer("reconstruct").bias.data()[0] = std::numeric_limits<double>::quiet_NaN();
  try {
    t.step();
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("iteration 2"), std::string::npos);
  }
}

TEST(Training, WritesLogAndCheckpoints) {
  const fs::path dir = temp_dir("train");
  auto c = quick_config();
  c.checkpoint_every = 6;
  const auto outcome = train(c, dir);
  EXPECT_EQ(outcome.iterations, 12u);
  EXPECT_TRUE(fs::exists(dir / "checkpoint_00000006.ckpt"));
  EXPECT_TRUE(fs::exists(outcome.checkpoint));
  std::ifstream log(outcome.log);
  std::string header;
  std::getline(log, header);
  EXPECT_EQ(header, "iteration,lr,train_l1,val_psnr,val_ssim");
  std::size_t rows = 0;
  for (std::string line; std::getline(log, line);) ++rows;
  EXPECT_EQ(rows, 3u);

  auto longer = c;
  longer.iterations = 16;
  const auto resumed = train(longer, dir, outcome.checkpoint);
  EXPECT_EQ(resumed.iterations, 16u);
}

class EvalFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = temp_dir("eval");
    config_ = quick_config();
    PhantomParams params = config_.dataset.phantom;
    std::vector<ManifestEntry> entries;
    for (std::size_t i = 0; i < 3; ++i) {
      Rng rng(100 + i);
      const std::string name = "v" + std::to_string(i) + ".vol";
      save_volume(synth_phantom(params, rng), dir_ / name);
      entries.push_back({name, i == 0 ? "train" : "test"});
    }
    write_manifest(dir_ / "manifest.txt", entries);
  }

  fs::path save(const std::function<void(Network&)>& edit) {
    Trainer t(config_);
    edit(t.network());
    const fs::path p = dir_ / "model.ckpt";
    save_checkpoint(t.checkpoint(), p);
    return p;
  }

  fs::path dir_;
  TrainConfig config_;
};

TEST_F(EvalFixture, ZeroNetworkEqualsBicubicBaseline) {
  const auto rows = evaluate_checkpoint(save([](Network& n) { n.zero_parameters(); }), dir_ / "manifest.txt");
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.psnr, r.bicubic_psnr);
    EXPECT_EQ(r.ssim, r.bicubic_ssim);
  }
  const auto hr = load_volume(dir_ / "v1.vol");
  const auto lr = make_pair("v1", hr, Degradation::Bicubic, 2).lr;
  const Volume up = Volume::from_channels(bicubic_resize(lr.as_channels(), Scale::up(2)));
  EXPECT_EQ(rows[0].bicubic_psnr, evaluate_volume(up, hr).psnr_db);
}

TEST_F(EvalFixture, CsvHasHeaderPlusOneRowPerTestVolume) {
  const auto rows = evaluate_checkpoint(save([](Network&) {}), dir_ / "manifest.txt");
  write_eval_csv(rows, dir_ / "out" / "eval.csv");
  std::ifstream f(dir_ / "out" / "eval.csv");
  std::size_t lines = 0;
  std::string first;
  for (std::string line; std::getline(f, line); ++lines)
    if (lines == 0) first = line;
  EXPECT_EQ(first, "volume,psnr,ssim,bicubic_psnr,bicubic_ssim");
  EXPECT_EQ(lines, 3u);
  const std::string table = format_eval_table(rows);
  EXPECT_NE(table.find("mean"), std::string::npos);
  EXPECT_NE(table.find("v2"), std::string::npos);
}

TEST_F(EvalFixture, HrAgainstItselfIsPerfect) {
  const auto hr = load_volume(dir_ / "v1.vol");
  const auto report = evaluate_volume(hr, hr);
  EXPECT_EQ(report.psnr_db, kInfinitePsnr);
  EXPECT_EQ(report.ssim, 1.0);
}

TEST_F(EvalFixture, PseudoThreeDMismatchIsRejected) {
  config_.dataset.execution = Execution::Pseudo3D;
  config_.network.io_channels = 3;
  config_.dataset.phantom.slices = 3;
  const fs::path ckpt = save([](Network&) {});
  EXPECT_THROW(evaluate_checkpoint(ckpt, dir_ / "manifest.txt"), ConfigError);
}
