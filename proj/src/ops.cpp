#include "cssfn/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "cssfn/error.hpp"

namespace cssfn {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using StridedMap = Eigen::Map<RowMatrix, 0, Eigen::OuterStride<>>;
using ConstStridedMap = Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutableMap = Eigen::Map<RowMatrix>;

// Upper bound on im2col buffer elements; rows of the image are processed in
// chunks so large slices do not need a full (Cin*k*k, H*W) matrix.
constexpr std::size_t kColumnBudget = std::size_t{1} << 22;

void check_conv(const Tensor& input, const ConvParams& params) {
  if (params.weight.shape().h != params.weight.shape().w) {
    throw ConfigError("conv kernel must be square");
  }
  if (input.shape().c != params.in_channels()) {
    throw ConfigError("conv expects " + std::to_string(params.in_channels()) + " input channels, got " +
                      std::to_string(input.shape().c));
  }
  if (params.bias.size() != params.out_channels()) {
    throw ConfigError("conv bias has " + std::to_string(params.bias.size()) + " entries for " +
                      std::to_string(params.out_channels()) + " output channels");
  }
}

std::size_t chunk_rows(std::size_t k_rows, std::size_t height, std::size_t width) {
  const std::size_t per_row = std::max<std::size_t>(1, k_rows * width);
  return std::clamp<std::size_t>(kColumnBudget / per_row, 1, height);
}

// Fills cols (Cin*k*k, rows*W) for image rows [y0, y0 + rows) of item n.
void im2col(const Tensor& input, std::size_t n, std::size_t k, std::size_t y0, std::size_t rows,
            std::vector<double>& cols) {
  const auto& s = input.shape();
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(k / 2);
  const std::size_t span_cols = rows * s.w;
  cols.assign(s.c * k * k * span_cols, 0.0);
  for (std::size_t ci = 0; ci < s.c; ++ci) {
    const auto plane = input.plane(n, ci);
    for (std::size_t dy = 0; dy < k; ++dy) {
      for (std::size_t dx = 0; dx < k; ++dx) {
        double* dst = cols.data() + ((ci * k + dy) * k + dx) * span_cols;
        for (std::size_t yy = 0; yy < rows; ++yy) {
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y0 + yy) + static_cast<std::ptrdiff_t>(dy) - pad;
          if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(s.h)) continue;
          const double* src = plane.data() + static_cast<std::size_t>(sy) * s.w;
          double* row = dst + yy * s.w;
          for (std::size_t x = 0; x < s.w; ++x) {
            const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(x) + static_cast<std::ptrdiff_t>(dx) - pad;
            if (sx >= 0 && sx < static_cast<std::ptrdiff_t>(s.w)) row[x] = src[sx];
          }
        }
      }
    }
  }
}

// Scatter-adds cols back into grad planes of item n (adjoint of im2col).
void col2im(const std::vector<double>& cols, std::size_t n, std::size_t k, std::size_t y0, std::size_t rows,
            Tensor& grad_input) {
  const auto& s = grad_input.shape();
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(k / 2);
  const std::size_t span_cols = rows * s.w;
  for (std::size_t ci = 0; ci < s.c; ++ci) {
    auto plane = grad_input.plane(n, ci);
    for (std::size_t dy = 0; dy < k; ++dy) {
      for (std::size_t dx = 0; dx < k; ++dx) {
        const double* src = cols.data() + ((ci * k + dy) * k + dx) * span_cols;
        for (std::size_t yy = 0; yy < rows; ++yy) {
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y0 + yy) + static_cast<std::ptrdiff_t>(dy) - pad;
          if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(s.h)) continue;
          double* dst = plane.data() + static_cast<std::size_t>(sy) * s.w;
          const double* row = src + yy * s.w;
          for (std::size_t x = 0; x < s.w; ++x) {
            const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(x) + static_cast<std::ptrdiff_t>(dx) - pad;
            if (sx >= 0 && sx < static_cast<std::ptrdiff_t>(s.w)) dst[sx] += row[x];
          }
        }
      }
    }
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ConfigError(std::string(what) + ": shape mismatch " + a.shape().str() + " vs " + b.shape().str());
  }
}

struct AxisWeights {
  std::vector<std::size_t> begin;  // CSR row pointers, size out+1
  std::vector<std::size_t> index;
  std::vector<double> weight;
};

std::size_t reflect(std::ptrdiff_t j, std::size_t n) {
  const auto len = static_cast<std::ptrdiff_t>(n);
  // Half-sample symmetric extension with period 2n.
  std::ptrdiff_t m = j % (2 * len);
  if (m < 0) m += 2 * len;
  return static_cast<std::size_t>(m < len ? m : 2 * len - 1 - m);
}

AxisWeights axis_weights(std::size_t in_len, std::size_t out_len, Scale scale) {
  const double s = scale.value();
  const double kscale = s < 1.0 ? s : 1.0;
  const double support = 2.0 / kscale;
  AxisWeights aw;
  aw.begin.reserve(out_len + 1);
  aw.begin.push_back(0);
  for (std::size_t i = 0; i < out_len; ++i) {
    const double centre =
        (static_cast<double>(i) + 0.5) * static_cast<double>(scale.den) / static_cast<double>(scale.num) - 0.5;
    const auto lo = static_cast<std::ptrdiff_t>(std::ceil(centre - support));
    const auto hi = static_cast<std::ptrdiff_t>(std::floor(centre + support));
    const std::size_t start = aw.weight.size();
    double total = 0.0;
    for (std::ptrdiff_t j = lo; j <= hi; ++j) {
      const double w = kscale * cubic_kernel(kscale * (centre - static_cast<double>(j)));
      if (w == 0.0) continue;
      aw.index.push_back(reflect(j, in_len));
      aw.weight.push_back(w);
      total += w;
    }
    for (std::size_t t = start; t < aw.weight.size(); ++t) aw.weight[t] /= total;
    aw.begin.push_back(aw.weight.size());
  }
  return aw;
}

std::size_t scaled_extent(std::size_t len, Scale scale, const char* axis) {
  if (scale.num == 0 || scale.den == 0) throw ConfigError("resize scale must be positive");
  if ((len * scale.num) % scale.den != 0) {
    throw ConfigError(std::string("resize: ") + axis + " extent " + std::to_string(len) + " not divisible by " +
                      std::to_string(scale.den / std::gcd(scale.den, scale.num)));
  }
  return len * scale.num / scale.den;
}

}  // namespace

Tensor conv2d_forward(const Tensor& input, const ConvParams& params) {
  check_conv(input, params);
  const auto& s = input.shape();
  const std::size_t cout = params.out_channels();
  const std::size_t k = params.kernel();
  const std::size_t krows = s.c * k * k;
  Tensor out(Shape{s.n, cout, s.h, s.w});
  const ConstMap weight(params.weight.data().data(), static_cast<Eigen::Index>(cout), static_cast<Eigen::Index>(krows));
  const auto bias = params.bias.data();
  const std::size_t step = chunk_rows(krows, s.h, s.w);
  std::vector<double> cols;

  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t y0 = 0; y0 < s.h; y0 += step) {
      const std::size_t rows = std::min(step, s.h - y0);
      const auto ncols = static_cast<Eigen::Index>(rows * s.w);
      StridedMap dst(out.data().data() + out.index(n, 0, y0, 0), static_cast<Eigen::Index>(cout), ncols,
                     Eigen::OuterStride<>(static_cast<Eigen::Index>(s.plane())));
      if (k == 1) {
        const ConstStridedMap src(input.data().data() + input.index(n, 0, y0, 0), static_cast<Eigen::Index>(s.c),
                                  ncols, Eigen::OuterStride<>(static_cast<Eigen::Index>(s.plane())));
        dst.noalias() = weight * src;
      } else {
        im2col(input, n, k, y0, rows, cols);
        const ConstMap src(cols.data(), static_cast<Eigen::Index>(krows), ncols);
        dst.noalias() = weight * src;
      }
      for (std::size_t o = 0; o < cout; ++o) dst.row(static_cast<Eigen::Index>(o)).array() += bias[o];
    }
  }
  return out;
}

ConvGrads conv2d_backward(const Tensor& input, const ConvParams& params, const Tensor& grad_out,
                          bool want_input_grad) {
  check_conv(input, params);
  const auto& s = input.shape();
  const std::size_t cout = params.out_channels();
  const std::size_t k = params.kernel();
  const std::size_t krows = s.c * k * k;
  if (grad_out.shape() != Shape{s.n, cout, s.h, s.w}) {
    throw ConfigError("conv backward: grad_out shape " + grad_out.shape().str() + " does not match output " +
                      Shape{s.n, cout, s.h, s.w}.str());
  }

  ConvGrads g;
  g.weight = Tensor(params.weight.shape());
  g.bias = Tensor(params.bias.shape());
  if (want_input_grad) g.input = Tensor(s);

  const ConstMap weight(params.weight.data().data(), static_cast<Eigen::Index>(cout), static_cast<Eigen::Index>(krows));
  MutableMap gweight(g.weight.data().data(), static_cast<Eigen::Index>(cout), static_cast<Eigen::Index>(krows));
  auto gbias = g.bias.data();
  const std::size_t step = chunk_rows(krows, s.h, s.w);
  std::vector<double> cols;

  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t o = 0; o < cout; ++o) {
      const auto plane = grad_out.plane(n, o);
      gbias[o] += std::accumulate(plane.begin(), plane.end(), 0.0);
    }
    for (std::size_t y0 = 0; y0 < s.h; y0 += step) {
      const std::size_t rows = std::min(step, s.h - y0);
      const auto ncols = static_cast<Eigen::Index>(rows * s.w);
      const ConstStridedMap gout(grad_out.data().data() + grad_out.index(n, 0, y0, 0),
                                 static_cast<Eigen::Index>(cout), ncols,
                                 Eigen::OuterStride<>(static_cast<Eigen::Index>(s.plane())));
      if (k == 1) {
        const ConstStridedMap src(input.data().data() + input.index(n, 0, y0, 0), static_cast<Eigen::Index>(s.c),
                                  ncols, Eigen::OuterStride<>(static_cast<Eigen::Index>(s.plane())));
        gweight.noalias() += gout * src.transpose();
        if (want_input_grad) {
          StridedMap gin(g.input.data().data() + g.input.index(n, 0, y0, 0), static_cast<Eigen::Index>(s.c), ncols,
                         Eigen::OuterStride<>(static_cast<Eigen::Index>(s.plane())));
          gin.noalias() += weight.transpose() * gout;
        }
      } else {
        im2col(input, n, k, y0, rows, cols);
        const ConstMap src(cols.data(), static_cast<Eigen::Index>(krows), ncols);
        gweight.noalias() += gout * src.transpose();
        if (want_input_grad) {
          MutableMap gcols(cols.data(), static_cast<Eigen::Index>(krows), ncols);
          gcols.noalias() = weight.transpose() * gout;
          col2im(cols, n, k, y0, rows, g.input);
        }
      }
    }
  }
  return g;
}

Tensor relu(const Tensor& input) {
  Tensor out(input.shape());
  auto dst = out.data();
  const auto src = input.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > 0.0 ? src[i] : 0.0;
  return out;
}

Tensor relu_backward(const Tensor& input, const Tensor& grad_out) {
  require_same_shape(input, grad_out, "relu backward");
  Tensor out(input.shape());
  auto dst = out.data();
  const auto src = input.data();
  const auto g = grad_out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > 0.0 ? g[i] : 0.0;
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out(a.shape());
  auto dst = out.data();
  const auto x = a.data();
  const auto y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) dst[i] = x[i] + y[i];
  return out;
}

Tensor concat_channels(std::span<const Tensor> parts) {
  if (parts.empty()) throw ConfigError("concat of zero tensors");
  const Shape first = parts.front().shape();
  std::size_t channels = 0;
  for (const auto& p : parts) {
    const auto& s = p.shape();
    if (s.n != first.n || s.h != first.h || s.w != first.w) {
      throw ConfigError("concat: part " + s.str() + " does not match " + first.str() + " outside the channel axis");
    }
    channels += s.c;
  }
  Tensor out(Shape{first.n, channels, first.h, first.w});
  const std::size_t plane = first.plane();
  for (std::size_t n = 0; n < first.n; ++n) {
    std::size_t offset = 0;
    for (const auto& p : parts) {
      const auto src = p.data().subspan(n * p.shape().c * plane, p.shape().c * plane);
      std::copy(src.begin(), src.end(), out.data().begin() + static_cast<std::ptrdiff_t>(out.index(n, offset, 0, 0)));
      offset += p.shape().c;
    }
  }
  return out;
}

std::vector<Tensor> split_channels(const Tensor& input, std::span<const std::size_t> widths) {
  const auto& s = input.shape();
  const std::size_t total = std::accumulate(widths.begin(), widths.end(), std::size_t{0});
  if (total != s.c) {
    throw ConfigError("split widths sum to " + std::to_string(total) + " but tensor has " + std::to_string(s.c) +
                      " channels");
  }
  std::vector<Tensor> parts;
  parts.reserve(widths.size());
  std::size_t offset = 0;
  for (const std::size_t width : widths) {
    if (width == 0) throw ConfigError("split width must be positive");
    Tensor part(Shape{s.n, width, s.h, s.w});
    for (std::size_t n = 0; n < s.n; ++n) {
      const auto src = input.data().subspan(input.index(n, offset, 0, 0), width * s.plane());
      std::copy(src.begin(), src.end(), part.data().begin() + static_cast<std::ptrdiff_t>(part.index(n, 0, 0, 0)));
    }
    parts.push_back(std::move(part));
    offset += width;
  }
  return parts;
}

std::vector<Tensor> split_channels(const Tensor& input, std::size_t q) {
  const std::size_t c = input.shape().c;
  if (q == 0 || c % q != 0) {
    throw ConfigError("cannot split C=" + std::to_string(c) + " channels into q=" + std::to_string(q) +
                      " equal groups");
  }
  const std::vector<std::size_t> widths(q, c / q);
  return split_channels(input, widths);
}

Tensor pixel_shuffle(const Tensor& input, std::size_t r) {
  const auto& s = input.shape();
  if (r < 1 || s.c % (r * r) != 0) {
    throw ConfigError("pixel_shuffle: r^2=" + std::to_string(r * r) + " does not divide C=" + std::to_string(s.c));
  }
  const std::size_t oc = s.c / (r * r);
  Tensor out(Shape{s.n, oc, s.h * r, s.w * r});
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < oc; ++c)
      for (std::size_t dy = 0; dy < r; ++dy)
        for (std::size_t dx = 0; dx < r; ++dx) {
          const auto src = input.plane(n, c * r * r + dy * r + dx);
          for (std::size_t y = 0; y < s.h; ++y)
            for (std::size_t x = 0; x < s.w; ++x) out.at(n, c, r * y + dy, r * x + dx) = src[y * s.w + x];
        }
  return out;
}

Tensor pixel_unshuffle(const Tensor& input, std::size_t r) {
  const auto& s = input.shape();
  if (r < 1 || s.h % r != 0 || s.w % r != 0) {
    throw ConfigError("pixel_unshuffle: r=" + std::to_string(r) + " does not divide " + s.str());
  }
  const std::size_t h = s.h / r;
  const std::size_t w = s.w / r;
  Tensor out(Shape{s.n, s.c * r * r, h, w});
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c; ++c)
      for (std::size_t dy = 0; dy < r; ++dy)
        for (std::size_t dx = 0; dx < r; ++dx) {
          auto dst = out.plane(n, c * r * r + dy * r + dx);
          for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) dst[y * w + x] = input.at(n, c, r * y + dy, r * x + dx);
        }
  return out;
}

double cubic_kernel(double x) {
  constexpr double a = -0.5;
  const double t = std::abs(x);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

Tensor bicubic_resize(const Tensor& input, Scale scale) {
  const auto& s = input.shape();
  const std::size_t oh = scaled_extent(s.h, scale, "height");
  const std::size_t ow = scaled_extent(s.w, scale, "width");
  const AxisWeights wy = axis_weights(s.h, oh, scale);
  const AxisWeights wx = axis_weights(s.w, ow, scale);

  Tensor out(Shape{s.n, s.c, oh, ow});
  std::vector<double> rows(oh * s.w);
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      const auto src = input.plane(n, c);
      // vertical pass: (h, w) -> (oh, w)
      for (std::size_t i = 0; i < oh; ++i) {
        double* dst = rows.data() + i * s.w;
        std::fill(dst, dst + s.w, 0.0);
        for (std::size_t t = wy.begin[i]; t < wy.begin[i + 1]; ++t) {
          const double* line = src.data() + wy.index[t] * s.w;
          const double w = wy.weight[t];
          for (std::size_t x = 0; x < s.w; ++x) dst[x] += w * line[x];
        }
      }
      // horizontal pass: (oh, w) -> (oh, ow)
      auto dst = out.plane(n, c);
      for (std::size_t i = 0; i < oh; ++i) {
        const double* line = rows.data() + i * s.w;
        for (std::size_t j = 0; j < ow; ++j) {
          double acc = 0.0;
          for (std::size_t t = wx.begin[j]; t < wx.begin[j + 1]; ++t) acc += wx.weight[t] * line[wx.index[t]];
          dst[i * ow + j] = acc;
        }
      }
    }
  }
  return out;
}

double l1_loss(const Tensor& pred, const Tensor& target) {
  require_same_shape(pred, target, "l1_loss");
  const auto p = pred.data();
  const auto t = target.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - t[i]);
  return sum / static_cast<double>(p.size());
}

Tensor l1_loss_backward(const Tensor& pred, const Tensor& target) {
  require_same_shape(pred, target, "l1_loss backward");
  Tensor g(pred.shape());
  const auto p = pred.data();
  const auto t = target.data();
  auto out = g.data();
  const double inv = 1.0 / static_cast<double>(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - t[i];
    out[i] = d > 0.0 ? inv : (d < 0.0 ? -inv : 0.0);
  }
  return g;
}

}  // namespace cssfn
