#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "cssfn/error.hpp"
#include "cssfn/metrics.hpp"
#include "oracles.hpp"

using namespace cssfn;

namespace {

std::vector<double> random_image(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform();
  return v;
}

double direct_psnr(const std::vector<double>& a, const std::vector<double>& b) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i] - b[i]) * (a[i] - b[i]);
  return static_cast<double>(10.0L * std::log10(static_cast<long double>(a.size()) / s));
}

}  // namespace

TEST(Psnr, IdenticalIsInfinite) {
  const std::vector<double> a(64, 0.3);
  EXPECT_EQ(psnr(a, a), kInfinitePsnr);
  EXPECT_TRUE(std::isinf(psnr(a, a)));
}

TEST(Psnr, UniformTenthIsTwentyDecibels) {
  Rng rng(1);
  const auto a = random_image(256, rng);
  auto b = a;
  for (double& v : b) v += 0.1;
  EXPECT_NEAR(psnr(a, b), 20.0, 1e-12);
  const std::vector<double> z(100, 0.5);
  const std::vector<double> w(100, 0.6);
  EXPECT_NEAR(psnr(z, w), 20.0, 1e-12);
}

TEST(Psnr, MatchesDirectSummation) {
  Rng rng(2);
  const auto a = random_image(999, rng);
  const auto b = random_image(999, rng);
  EXPECT_NEAR(psnr(a, b), direct_psnr(a, b), 1e-10);
}

TEST(Psnr, SymmetricPermutationInvariantMonotone) {
  Rng rng(3);
  const auto a = random_image(100, rng);
  const auto b = random_image(100, rng);
  EXPECT_EQ(psnr(a, b), psnr(b, a));
  auto pa = a;
  auto pb = b;
  std::reverse(pa.begin(), pa.end());
  std::reverse(pb.begin(), pb.end());
  EXPECT_NEAR(psnr(pa, pb), psnr(a, b), 1e-12);
  auto worse = b;
  for (std::size_t i = 0; i < b.size(); ++i) worse[i] = a[i] + 1.5 * (b[i] - a[i]);
  EXPECT_LT(psnr(a, worse), psnr(a, b));
}

TEST(Psnr, ShapeMismatchRejected) {
  EXPECT_THROW(psnr(std::vector<double>(3), std::vector<double>(4)), ConfigError);
}

TEST(Ssim, IdenticalIsExactlyOne) {
  Rng rng(4);
  const auto a = random_image(20 * 24, rng);
  EXPECT_EQ(ssim(a, a, 20, 24), 1.0);
}

TEST(Ssim, ConstantPair) {
  const std::vector<double> a(16 * 16, 0.5);
  const std::vector<double> b(16 * 16, 0.6);
  const double want = (2 * 0.3 + 1e-4) / (0.25 + 0.36 + 1e-4);
  EXPECT_NEAR(ssim(a, b, 16, 16), want, 1e-12);
  EXPECT_NEAR(ssim(a, b, 16, 16), 0.98361, 1e-5);
}

TEST(Ssim, SymmetricAndBounded) {
  Rng rng(5);
  const auto a = random_image(30 * 30, rng);
  const auto b = random_image(30 * 30, rng);
  EXPECT_NEAR(ssim(a, b, 30, 30), ssim(b, a, 30, 30), 1e-15);
  EXPECT_LE(ssim(a, b, 30, 30), 1.0);
  EXPECT_GE(ssim(a, b, 30, 30), -1.0);
}

TEST(Ssim, MatchesDirectWindowedEvaluation) {
  // Direct 2D Gaussian weighting of one 11x11 window per valid position.
  Rng rng(6);
  const std::size_t h = 13;
  const std::size_t w = 14;
  const auto a = random_image(h * w, rng);
  const auto b = random_image(h * w, rng);
  std::vector<double> g(11);
  for (int i = 0; i < 11; ++i) g[i] = std::exp(-(i - 5.0) * (i - 5.0) / 4.5);
  const double gs = std::accumulate(g.begin(), g.end(), 0.0);
  double total = 0.0;
  for (std::size_t y = 0; y + 11 <= h; ++y)
    for (std::size_t x = 0; x + 11 <= w; ++x) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (std::size_t i = 0; i < 11; ++i)
        for (std::size_t j = 0; j < 11; ++j) {
          const double k = g[i] * g[j] / (gs * gs);
          const double va = a[(y + i) * w + x + j];
          const double vb = b[(y + i) * w + x + j];
          ma += k * va;
          mb += k * vb;
          saa += k * va * va;
          sbb += k * vb * vb;
          sab += k * va * vb;
        }
      const double c1 = 1e-4;
      const double c2 = 9e-4;
      total += (2 * ma * mb + c1) * (2 * (sab - ma * mb) + c2) /
               ((ma * ma + mb * mb + c1) * (saa - ma * ma + sbb - mb * mb + c2));
    }
  EXPECT_NEAR(ssim(a, b, h, w), total / ((h - 10) * (w - 10)), 1e-12);
}

TEST(Ssim, RejectsSmallOrMismatched) {
  EXPECT_THROW(ssim(std::vector<double>(100), std::vector<double>(100), 10, 10), ConfigError);
  EXPECT_THROW(ssim(std::vector<double>(144), std::vector<double>(143), 12, 12), ConfigError);
}

TEST(EvaluateVolume, IdentityAndAggregation) {
  Rng rng(7);
  Volume ref(4, 12, 12);
  for (double& v : ref.data) v = rng.uniform();
  const auto same = evaluate_volume(ref, ref);
  EXPECT_EQ(same.psnr_db, kInfinitePsnr);
  EXPECT_EQ(same.ssim, 1.0);

  Volume pred = ref;
  for (double& v : pred.slice(2)) v = std::min(1.0, v + 0.05);
  for (double& v : pred.slice(0)) v = std::max(0.0, v - 0.02);
  const auto report = evaluate_volume(pred, ref);
  ASSERT_EQ(report.slice_psnr.size(), 4u);
  const double ps = std::accumulate(report.slice_psnr.begin(), report.slice_psnr.end(), 0.0) / 4.0;
  const double ss = std::accumulate(report.slice_ssim.begin(), report.slice_ssim.end(), 0.0) / 4.0;
  EXPECT_EQ(report.psnr_db, ps);
  EXPECT_EQ(report.ssim, ss);
  EXPECT_THROW(evaluate_volume(Volume(3, 12, 12), ref), ConfigError);
}

TEST(EvaluateVolume, OneCorruptedSliceLowersMeanByItsShare) {
  Rng rng(8);
  Volume ref(4, 12, 12);
  for (double& v : ref.data) v = rng.uniform();
  Volume pred = ref;
  for (double& v : pred.slice(1)) v += 0.1;
  const auto report = evaluate_volume(pred, ref);
  const double drop = 1.0 - ssim(pred.slice(1), ref.slice(1), 12, 12);
  EXPECT_NEAR(report.ssim, 1.0 - drop / 4.0, 1e-15);
}
