#include "cssfn/metrics.hpp"

#include <cmath>
#include <numeric>

#include "cssfn/error.hpp"

namespace cssfn {
namespace {

std::vector<double> gaussian_window(std::size_t size, double sigma) {
  std::vector<double> g(size);
  const double centre = static_cast<double>(size - 1) / 2.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double d = static_cast<double>(i) - centre;
    g[i] = std::exp(-d * d / (2.0 * sigma * sigma));
  }
  const double total = std::accumulate(g.begin(), g.end(), 0.0);
  for (double& v : g) v /= total;
  return g;
}

// Separable valid-region filtering of an (h, w) image with a 1D kernel.
std::vector<double> filter_valid(std::span<const double> img, std::size_t h, std::size_t w,
                                 const std::vector<double>& k) {
  const std::size_t n = k.size();
  const std::size_t oh = h - n + 1;
  const std::size_t ow = w - n + 1;
  std::vector<double> rows(oh * w, 0.0);
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t t = 0; t < n; ++t) {
      const double* src = img.data() + (y + t) * w;
      double* dst = rows.data() + y * w;
      for (std::size_t x = 0; x < w; ++x) dst[x] += k[t] * src[x];
    }
  std::vector<double> out(oh * ow, 0.0);
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t t = 0; t < n; ++t) acc += k[t] * rows[y * w + x + t];
      out[y * ow + x] = acc;
    }
  return out;
}

}  // namespace

double psnr(std::span<const double> a, std::span<const double> b, double peak) {
  if (a.size() != b.size() || a.empty()) throw ConfigError("psnr: images must be non-empty and equally sized");
  if (!(peak > 0.0)) throw ConfigError("psnr: peak must be positive");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(a.size());
  if (mse == 0.0) return kInfinitePsnr;
  return 20.0 * std::log10(peak) - 10.0 * std::log10(mse);
}

double ssim(std::span<const double> a, std::span<const double> b, std::size_t height, std::size_t width,
            const SsimOptions& options) {
  if (a.size() != b.size() || a.size() != height * width) throw ConfigError("ssim: shape mismatch");
  if (height < options.window || width < options.window) {
    throw ConfigError("ssim: image " + std::to_string(height) + "x" + std::to_string(width) + " smaller than the " +
                      std::to_string(options.window) + "x" + std::to_string(options.window) + " window");
  }
  const auto g = gaussian_window(options.window, options.sigma);
  std::vector<double> aa(a.size());
  std::vector<double> bb(a.size());
  std::vector<double> ab(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  const auto mu_a = filter_valid(a, height, width, g);
  const auto mu_b = filter_valid(b, height, width, g);
  const auto e_aa = filter_valid(aa, height, width, g);
  const auto e_bb = filter_valid(bb, height, width, g);
  const auto e_ab = filter_valid(ab, height, width, g);

  const double c1 = (options.k1 * options.peak) * (options.k1 * options.peak);
  const double c2 = (options.k2 * options.peak) * (options.k2 * options.peak);
  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double var_a = e_aa[i] - mu_a[i] * mu_a[i];
    const double var_b = e_bb[i] - mu_b[i] * mu_b[i];
    const double cov = e_ab[i] - mu_a[i] * mu_b[i];
    const double num = (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2);
    const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (var_a + var_b + c2);
    total += num / den;
  }
  return total / static_cast<double>(mu_a.size());
}

MetricReport evaluate_volume(const Volume& pred, const Volume& ref) {
  if (pred.slices != ref.slices || pred.height != ref.height || pred.width != ref.width) {
    throw ConfigError("evaluate_volume: dimension mismatch");
  }
  MetricReport report;
  for (std::size_t s = 0; s < ref.slices; ++s) {
    report.slice_psnr.push_back(psnr(pred.slice(s), ref.slice(s)));
    report.slice_ssim.push_back(ssim(pred.slice(s), ref.slice(s), ref.height, ref.width));
  }
  const auto n = static_cast<double>(ref.slices);
  report.psnr_db = std::accumulate(report.slice_psnr.begin(), report.slice_psnr.end(), 0.0) / n;
  report.ssim = std::accumulate(report.slice_ssim.begin(), report.slice_ssim.end(), 0.0) / n;
  return report;
}

}  // namespace cssfn
