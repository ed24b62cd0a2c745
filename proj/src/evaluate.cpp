#include "cssfn/evaluate.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "cssfn/config.hpp"
#include "cssfn/error.hpp"
#include "cssfn/metrics.hpp"
#include "cssfn/ops.hpp"
#include "cssfn/train.hpp"

namespace cssfn {

Volume super_resolve(Network& net, const Volume& lr, Execution execution) {
  const std::size_t r = net.config().scale;
  if (execution == Execution::Pseudo3D) {
    if (lr.slices != net.config().io_channels) {
      throw ConfigError("volume has " + std::to_string(lr.slices) + " slices, network expects " +
                        std::to_string(net.config().io_channels));
    }
    const Tensor out = net.forward(lr.as_channels());
    net.clear_cache();
    return Volume::from_channels(out, lr.original_max);
  }
  if (net.config().io_channels != 1) throw ConfigError("pure 2D execution needs a single-channel network");
  Volume hr(lr.slices, lr.height * r, lr.width * r);
  hr.original_max = lr.original_max;
  for (std::size_t s = 0; s < lr.slices; ++s) {
    const Tensor out = net.forward(lr.slice_tensor(s));
    net.clear_cache();
    std::copy(out.data().begin(), out.data().end(), hr.slice(s).begin());
  }
  return hr;
}

Volume bicubic_upscale(const Volume& lr, std::size_t r) {
  const Tensor up = bicubic_resize(lr.as_channels(), Scale::up(r));
  return Volume::from_channels(up, lr.original_max);
}

std::vector<EvalRow> evaluate_checkpoint(const std::filesystem::path& checkpoint,
                                         const std::filesystem::path& manifest) {
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  const TrainConfig config = parse_config(ckpt.config_text);
  Network net(config.network);
  load_parameters(net, ckpt);

  auto entries = read_manifest(manifest);
  std::vector<ManifestEntry> selected;
  for (const auto& e : entries) {
    if (e.split == "test") selected.push_back(e);
  }
  if (selected.empty()) selected = entries;
  if (selected.empty()) throw ConfigError("manifest " + manifest.string() + " lists no volumes");

  const std::size_t r = config.network.scale;
  std::vector<EvalRow> rows;
  for (const auto& e : selected) {
    const VolumePair pair =
        make_pair(e.path.stem().string(), load_volume(e.path), config.dataset.degradation, r);
    const auto ours = evaluate_volume(super_resolve(net, pair.lr, config.dataset.execution), pair.hr);
    const auto base = evaluate_volume(bicubic_upscale(pair.lr, r), pair.hr);
    rows.push_back({pair.id, ours.psnr_db, ours.ssim, base.psnr_db, base.ssim});
  }
  return rows;
}

void write_eval_csv(const std::vector<EvalRow>& rows, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  os << "volume,psnr,ssim,bicubic_psnr,bicubic_ssim\n" << std::setprecision(10);
  for (const auto& r : rows) {
    os << r.volume << ',' << r.psnr << ',' << r.ssim << ',' << r.bicubic_psnr << ',' << r.bicubic_ssim << '\n';
  }
}

std::string format_eval_table(const std::vector<EvalRow>& rows) {
  std::size_t name_width = 6;
  for (const auto& r : rows) name_width = std::max(name_width, r.volume.size());
  std::ostringstream os;
  const auto line = [&](const std::string& name, double p, double s, double bp, double bs) {
    os << std::left << std::setw(static_cast<int>(name_width)) << name << std::right << std::fixed
       << std::setprecision(3) << std::setw(10) << p << std::setprecision(4) << std::setw(9) << s
       << std::setprecision(3) << std::setw(13) << bp << std::setprecision(4) << std::setw(13) << bs << '\n';
  };
  os << std::left << std::setw(static_cast<int>(name_width)) << "volume" << std::right << std::setw(10) << "psnr"
     << std::setw(9) << "ssim" << std::setw(13) << "bicubic_psnr" << std::setw(13) << "bicubic_ssim" << '\n';
  double sums[4] = {0, 0, 0, 0};
  for (const auto& r : rows) {
    line(r.volume, r.psnr, r.ssim, r.bicubic_psnr, r.bicubic_ssim);
    sums[0] += r.psnr;
    sums[1] += r.ssim;
    sums[2] += r.bicubic_psnr;
    sums[3] += r.bicubic_ssim;
  }
  if (!rows.empty()) {
    const auto n = static_cast<double>(rows.size());
    line("mean", sums[0] / n, sums[1] / n, sums[2] / n, sums[3] / n);
  }
  return os.str();
}

}  // namespace cssfn
