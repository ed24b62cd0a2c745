#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cssfn/dataset.hpp"
#include "cssfn/network.hpp"
#include "cssfn/volume.hpp"

namespace cssfn {

/// Runs the network over a degraded volume: slice by slice under pure 2D,
/// all slices at once as channels under pseudo 3D.
Volume super_resolve(Network& net, const Volume& lr, Execution execution);

/// Bicubic interpolation of every slice by r.
Volume bicubic_upscale(const Volume& lr, std::size_t r);

struct EvalRow {
  std::string volume;
  double psnr = 0.0;
  double ssim = 0.0;
  double bicubic_psnr = 0.0;
  double bicubic_ssim = 0.0;
};

/// Scores the checkpointed network on the test entries of a manifest (all
/// entries when none is marked test), degrading each HR volume the way the
/// checkpoint was trained.
std::vector<EvalRow> evaluate_checkpoint(const std::filesystem::path& checkpoint,
                                         const std::filesystem::path& manifest);

void write_eval_csv(const std::vector<EvalRow>& rows, const std::filesystem::path& path);
/// Aligned plain-text table with a trailing mean row.
std::string format_eval_table(const std::vector<EvalRow>& rows);

}  // namespace cssfn
