#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "cssfn/error.hpp"
#include "cssfn/ops.hpp"
#include "cssfn/tape.hpp"
#include "oracles.hpp"

using namespace cssfn;

namespace {

ConvParams random_conv(std::size_t in, std::size_t out, std::size_t k, Rng& rng) {
  ConvParams p(in, out, k);
  p.weight = oracle::random_tensor(p.weight.shape(), rng);
  p.bias = oracle::random_tensor(p.bias.shape(), rng);
  return p;
}

}  // namespace

TEST(Tensor, RejectsEmptyExtents) {
  EXPECT_THROW(Tensor(Shape{1, 0, 2, 2}), ConfigError);
  EXPECT_THROW(Tensor(Shape{1, 1, 2, 2}, std::vector<double>(3)), ConfigError);
}

TEST(Tensor, GradSlotMatchesShape) {
  Tensor t(Shape{2, 3, 4, 5}, 1.5);
  EXPECT_FALSE(t.has_grad());
  EXPECT_EQ(t.grad().size(), t.size());
  EXPECT_TRUE(t.has_grad());
  t.grad()[7] = 2.0;
  t.zero_grad();
  EXPECT_EQ(t.grad()[7], 0.0);
}

TEST(Tensor, DetectsNonFinite) {
  Tensor t(Shape{1, 1, 2, 2});
  EXPECT_TRUE(t.all_finite());
  t.data()[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(t.all_finite());
}

TEST(Conv, OnesKernelOnOnesImage) {
  ConvParams p(1, 1, 3);
  std::fill(p.weight.data().begin(), p.weight.data().end(), 1.0);
  const Tensor out = conv2d_forward(Tensor(Shape{1, 1, 3, 3}, 1.0), p);
  const std::vector<double> expected{4, 6, 4, 6, 9, 6, 4, 6, 4};
  EXPECT_EQ(out.values(), expected);
}

TEST(Conv, IdentityOneByOne) {
  Rng rng(1);
  const Tensor x = oracle::random_tensor(Shape{2, 1, 4, 5}, rng);
  ConvParams p(1, 1, 1);
  p.weight.data()[0] = 1.0;
  EXPECT_EQ(conv2d_forward(x, p).values(), x.values());
}

TEST(Conv, ZeroParametersGiveZeros) {
  Rng rng(2);
  const Tensor out = conv2d_forward(oracle::random_tensor(Shape{1, 3, 5, 5}, rng), ConvParams(3, 4, 3));
  EXPECT_TRUE(std::all_of(out.data().begin(), out.data().end(), [](double v) { return v == 0.0; }));
}

TEST(Conv, MatchesDirectSummation) {
  Rng rng(3);
  for (const std::size_t k : {1u, 3u}) {
    const Tensor x = oracle::random_tensor(Shape{2, 5, 7, 6}, rng);
    const ConvParams p = random_conv(5, 4, k, rng);
    const Tensor got = conv2d_forward(x, p);
    const Tensor want = oracle::conv(x, p.weight, p.bias);
    ASSERT_EQ(got.shape(), want.shape());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got.data()[i], want.data()[i], 1e-12);
  }
}

TEST(Conv, ChannelMismatchIsConfigError) {
  EXPECT_THROW(conv2d_forward(Tensor(Shape{1, 2, 3, 3}), ConvParams(3, 1, 3)), ConfigError);
}

TEST(Conv, LinearInInputAndParameters) {
  Rng rng(4);
  const Tensor a = oracle::random_tensor(Shape{1, 2, 4, 4}, rng);
  const Tensor b = oracle::random_tensor(Shape{1, 2, 4, 4}, rng);
  ConvParams p = random_conv(2, 3, 3, rng);
  std::fill(p.bias.data().begin(), p.bias.data().end(), 0.0);
  const Tensor sum = conv2d_forward(add(a, b), p);
  const Tensor parts = add(conv2d_forward(a, p), conv2d_forward(b, p));
  for (std::size_t i = 0; i < sum.size(); ++i) EXPECT_NEAR(sum.data()[i], parts.data()[i], 1e-12);

  ConvParams p2 = random_conv(2, 3, 3, rng);
  ConvParams both(2, 3, 3);
  for (std::size_t i = 0; i < both.weight.size(); ++i) both.weight.data()[i] = p.weight.data()[i] + p2.weight.data()[i];
  for (std::size_t i = 0; i < both.bias.size(); ++i) both.bias.data()[i] = p.bias.data()[i] + p2.bias.data()[i];
  const Tensor lhs = conv2d_forward(a, both);
  const Tensor rhs = add(conv2d_forward(a, p), conv2d_forward(a, p2));
  for (std::size_t i = 0; i < lhs.size(); ++i) EXPECT_NEAR(lhs.data()[i], rhs.data()[i], 1e-12);
}

TEST(ConvBackward, ZeroUpstreamGivesZeroGradients) {
  Rng rng(5);
  const Tensor x = oracle::random_tensor(Shape{1, 2, 3, 3}, rng);
  const ConvParams p = random_conv(2, 2, 3, rng);
  const auto g = conv2d_backward(x, p, Tensor(Shape{1, 2, 3, 3}), true);
  for (const Tensor* t : {&g.input, &g.weight, &g.bias}) {
    EXPECT_TRUE(std::all_of(t->data().begin(), t->data().end(), [](double v) { return v == 0.0; }));
  }
}

TEST(ConvBackward, IdentityKernelPassesGradient) {
  Rng rng(6);
  const Tensor x = oracle::random_tensor(Shape{1, 1, 3, 4}, rng);
  ConvParams p(1, 1, 1);
  p.weight.data()[0] = 1.0;
  const Tensor up = oracle::random_tensor(x.shape(), rng);
  EXPECT_EQ(conv2d_backward(x, p, up, true).input.values(), up.values());
}

TEST(ConvBackward, BiasGradientIsPlaneSum) {
  Rng rng(7);
  const Tensor x = oracle::random_tensor(Shape{2, 2, 3, 3}, rng);
  const ConvParams p = random_conv(2, 3, 3, rng);
  const Tensor up = oracle::random_tensor(Shape{2, 3, 3, 3}, rng);
  const auto g = conv2d_backward(x, p, up, false);
  for (std::size_t o = 0; o < 3; ++o) {
    double s = 0.0;
    for (std::size_t b = 0; b < 2; ++b)
      for (const double v : up.plane(b, o)) s += v;
    EXPECT_NEAR(g.bias.data()[o], s, 1e-12);
  }
}

TEST(ConvBackward, MatchesFiniteDifferences) {
  Rng rng(8);
  Tensor x = oracle::random_tensor(Shape{1, 2, 2, 2}, rng);
  ConvParams p = random_conv(2, 3, 3, rng);
  const Tensor probe = oracle::random_tensor(Shape{1, 3, 2, 2}, rng);
  const auto f = [&] { return oracle::project(conv2d_forward(x, p), probe); };
  const auto g = conv2d_backward(x, p, probe, true);
  EXPECT_LT(oracle::max_relative_error(g.input.values(), oracle::numeric_gradient(x, f)), 1e-6);
  EXPECT_LT(oracle::max_relative_error(g.weight.values(), oracle::numeric_gradient(p.weight, f)), 1e-6);
  EXPECT_LT(oracle::max_relative_error(g.bias.values(), oracle::numeric_gradient(p.bias, f)), 1e-6);
}

TEST(ConvBackward, ShapeMismatchIsConfigError) {
  const ConvParams p(1, 2, 3);
  EXPECT_THROW(conv2d_backward(Tensor(Shape{1, 1, 3, 3}), p, Tensor(Shape{1, 1, 3, 3}), true), ConfigError);
}

TEST(Relu, Values) {
  const Tensor out = relu(Tensor(Shape{1, 1, 1, 3}, {-1.0, 0.0, 2.0}));
  EXPECT_EQ(out.values(), (std::vector<double>{0.0, 0.0, 2.0}));
}

TEST(Relu, NegativeInputBlocksGradient) {
  const Tensor x(Shape{1, 1, 2, 2}, {-1.0, -2.0, -0.5, -3.0});
  const Tensor g = relu_backward(x, Tensor(x.shape(), 1.0));
  EXPECT_TRUE(std::all_of(g.data().begin(), g.data().end(), [](double v) { return v == 0.0; }));
  EXPECT_EQ(relu_backward(Tensor(Shape{1, 1, 1, 1}, 0.0), Tensor(Shape{1, 1, 1, 1}, 1.0)).data()[0], 0.0);
}

TEST(Relu, MatchesFiniteDifferencesAwayFromZero) {
  Rng rng(9);
  Tensor x = oracle::random_tensor(Shape{1, 2, 3, 3}, rng);
  for (double& v : x.data()) v = v < 0 ? v - 0.1 : v + 0.1;
  const Tensor probe = oracle::random_tensor(x.shape(), rng);
  const auto f = [&] { return oracle::project(relu(x), probe); };
  EXPECT_LT(oracle::max_relative_error(relu_backward(x, probe).values(), oracle::numeric_gradient(x, f)), 1e-6);
}

TEST(Concat, SingleIsIdentity) {
  Rng rng(10);
  const Tensor a = oracle::random_tensor(Shape{2, 3, 2, 2}, rng);
  EXPECT_EQ(concat_channels(std::vector<Tensor>{a}).values(), a.values());
}

TEST(Concat, StacksInOrder) {
  Rng rng(11);
  const std::vector<Tensor> parts{oracle::random_tensor(Shape{1, 4, 3, 3}, rng),
                                  oracle::random_tensor(Shape{1, 8, 3, 3}, rng),
                                  oracle::random_tensor(Shape{1, 4, 3, 3}, rng)};
  const Tensor all = concat_channels(parts);
  EXPECT_EQ(all.shape(), (Shape{1, 16, 3, 3}));
  for (std::size_t c = 0; c < 8; ++c) {
    const auto got = all.plane(0, 4 + c);
    const auto want = parts[1].plane(0, c);
    EXPECT_TRUE(std::equal(got.begin(), got.end(), want.begin()));
  }
  const std::vector<std::size_t> widths{4, 8, 4};
  const auto back = split_channels(all, widths);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(back[i].values(), parts[i].values());
}

TEST(Concat, SpatialMismatchIsConfigError) {
  const std::vector<Tensor> parts{Tensor(Shape{1, 1, 3, 3}), Tensor(Shape{1, 1, 3, 4})};
  EXPECT_THROW(concat_channels(parts), ConfigError);
}

TEST(Split, EqualParts) {
  Rng rng(12);
  const Tensor x = oracle::random_tensor(Shape{1, 256, 2, 2}, rng);
  const auto parts = split_channels(x, 4);
  ASSERT_EQ(parts.size(), 4u);
  for (const auto& p : parts) EXPECT_EQ(p.shape().c, 64u);
  EXPECT_EQ(split_channels(x, 1).front().values(), x.values());
  EXPECT_EQ(concat_channels(parts).values(), x.values());
}

TEST(Split, IndivisibleNamesChannelsAndQ) {
  try {
    (void)split_channels(Tensor(Shape{1, 256, 1, 1}), 3);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("256"), std::string::npos);
    EXPECT_NE(msg.find('3'), std::string::npos);
  }
}

TEST(PixelShuffle, FourChannelsToTwoByTwo) {
  const Tensor out = pixel_shuffle(Tensor(Shape{1, 4, 1, 1}, {1.0, 2.0, 3.0, 4.0}), 2);
  EXPECT_EQ(out.shape(), (Shape{1, 1, 2, 2}));
  EXPECT_EQ(out.values(), (std::vector<double>{1.0, 2.0, 3.0, 4.0}));
}

TEST(PixelShuffle, IndexConventionAndInverse) {
  Rng rng(13);
  const Tensor x = oracle::random_tensor(Shape{1, 16, 2, 2}, rng);
  const Tensor y = pixel_shuffle(x, 4);
  ASSERT_EQ(y.shape(), (Shape{1, 1, 8, 8}));
  // Brute-force inverse index map.
  Tensor back(x.shape());
  for (std::size_t yy = 0; yy < 8; ++yy)
    for (std::size_t xx = 0; xx < 8; ++xx) back.at(0, (yy % 4) * 4 + xx % 4, yy / 4, xx / 4) = y.at(0, 0, yy, xx);
  EXPECT_EQ(back.values(), x.values());
  EXPECT_EQ(pixel_unshuffle(y, 4).values(), x.values());

  auto a = x.values();
  auto b = y.values();
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
}

TEST(PixelShuffle, IndivisibleChannelsIsConfigError) {
  EXPECT_THROW(pixel_shuffle(Tensor(Shape{1, 6, 2, 2}), 2), ConfigError);
}

TEST(Bicubic, ConstantIsPreserved) {
  for (const Scale s : {Scale::up(2), Scale::up(3), Scale::up(4), Scale::down(2), Scale::down(3), Scale::down(4)}) {
    const Tensor out = bicubic_resize(Tensor(Shape{1, 2, 12, 24}, 0.37), s);
    for (const double v : out.data()) EXPECT_NEAR(v, 0.37, 1e-12);
  }
}

TEST(Bicubic, KernelValues) {
  EXPECT_DOUBLE_EQ(cubic_kernel(0.0), 1.0);
  EXPECT_DOUBLE_EQ(cubic_kernel(1.0), 0.0);
  EXPECT_DOUBLE_EQ(cubic_kernel(2.0), 0.0);
  // a = -0.5: K(0.5) = 1.5/8 - 2.5/4 + 1.
  EXPECT_DOUBLE_EQ(cubic_kernel(0.5), 0.5625);
  EXPECT_DOUBLE_EQ(cubic_kernel(1.5), -0.0625);
}

TEST(Bicubic, RampReproducedInInterior) {
  // f(y, x) = 0.3 y + 0.7 x + 1 sampled at pixel centres; the upscaled grid
  // samples the same plane at (dst + 0.5) / 2 - 0.5.
  const std::size_t h = 10;
  const std::size_t w = 12;
  Tensor x(Shape{1, 1, h, w});
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) x.at(0, 0, i, j) = 0.3 * i + 0.7 * j + 1.0;
  const Tensor up = bicubic_resize(x, Scale::up(2));
  for (std::size_t i = 4; i < 2 * h - 4; ++i)
    for (std::size_t j = 4; j < 2 * w - 4; ++j) {
      const double sy = (i + 0.5) / 2.0 - 0.5;
      const double sx = (j + 0.5) / 2.0 - 0.5;
      EXPECT_NEAR(up.at(0, 0, i, j), 0.3 * sy + 0.7 * sx + 1.0, 1e-9);
    }
}

TEST(Bicubic, DownscaleShapeAndDivisibility) {
  EXPECT_EQ(bicubic_resize(Tensor(Shape{1, 1, 240, 240}), Scale::down(3)).shape(), (Shape{1, 1, 80, 80}));
  EXPECT_THROW(bicubic_resize(Tensor(Shape{1, 1, 10, 10}), Scale::down(3)), ConfigError);
}

TEST(L1, ValuesAndGradient) {
  EXPECT_DOUBLE_EQ(l1_loss(Tensor(Shape{1, 1, 1, 1}, 0.5), Tensor(Shape{1, 1, 1, 1}, 0.2)), 0.3);
  Rng rng(14);
  const Tensor t = oracle::random_tensor(Shape{1, 2, 3, 3}, rng);
  EXPECT_EQ(l1_loss(t, t), 0.0);
  const Tensor tie = l1_loss_backward(t, t);
  EXPECT_TRUE(std::all_of(tie.data().begin(), tie.data().end(), [](double v) { return v == 0.0; }));

  Tensor p = oracle::random_tensor(t.shape(), rng);
  const auto f = [&] { return l1_loss(p, t); };
  EXPECT_LT(oracle::max_relative_error(l1_loss_backward(p, t).values(), oracle::numeric_gradient(p, f)), 1e-6);
  EXPECT_THROW(l1_loss(p, Tensor(Shape{1, 1, 3, 3})), ConfigError);
}

TEST(Tape, CompositeGradientsMatchFiniteDifferences) {
  Rng rng(15);
  Tensor x = oracle::random_tensor(Shape{1, 4, 3, 3}, rng);
  ConvParams a = random_conv(2, 2, 3, rng);
  ConvParams b = random_conv(4, 8, 1, rng);
  const Tensor probe = oracle::random_tensor(Shape{1, 2, 6, 6}, rng);

  const auto build = [&](Tape& t) {
    const auto in = t.leaf(x, true);
    const std::vector<std::size_t> widths{2, 2};
    const auto parts = t.split(in, widths);
    const auto h = t.relu(t.conv(parts[0], a));
    const auto joined = t.concat(std::vector<Tape::Var>{t.add(h, parts[1]), t.scale(parts[0], 0.5)});
    return std::pair{in, t.pixel_shuffle(t.conv(joined, b), 2)};
  };
  const auto f = [&] {
    Tape t;
    const auto out = build(t).second;
    return oracle::project(t.value(out), probe);
  };

  Tape tape;
  const auto [in, out] = build(tape);
  a.weight.zero_grad();
  a.bias.zero_grad();
  b.weight.zero_grad();
  b.bias.zero_grad();
  tape.backward(out, probe);
  const auto grad_in = tape.grad(in);
  const auto grad_aw = std::vector<double>(a.weight.grad().begin(), a.weight.grad().end());
  const auto grad_bw = std::vector<double>(b.weight.grad().begin(), b.weight.grad().end());
  const auto grad_bb = std::vector<double>(b.bias.grad().begin(), b.bias.grad().end());

  EXPECT_LT(oracle::max_relative_error(grad_in, oracle::numeric_gradient(x, f)), 1e-6);
  EXPECT_LT(oracle::max_relative_error(grad_aw, oracle::numeric_gradient(a.weight, f)), 1e-6);
  EXPECT_LT(oracle::max_relative_error(grad_bw, oracle::numeric_gradient(b.weight, f)), 1e-6);
  EXPECT_LT(oracle::max_relative_error(grad_bb, oracle::numeric_gradient(b.bias, f)), 1e-6);
}
