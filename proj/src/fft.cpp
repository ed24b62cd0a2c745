#include "fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace cssfn::fft {
namespace {

// FFTW planning is not thread safe; execution on distinct arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::vector<Complex> transform(const std::vector<Complex>& in, std::size_t h, std::size_t w, int sign) {
  std::vector<Complex> out(in.size());
  std::vector<Complex> scratch(in);
  fftw_plan plan = nullptr;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_2d(static_cast<int>(h), static_cast<int>(w),
                            reinterpret_cast<fftw_complex*>(scratch.data()),
                            reinterpret_cast<fftw_complex*>(out.data()), sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace

std::vector<Complex> forward2d(const std::vector<Complex>& grid, std::size_t h, std::size_t w) {
  return transform(grid, h, w, FFTW_FORWARD);
}

std::vector<Complex> inverse2d(const std::vector<Complex>& spectrum, std::size_t h, std::size_t w) {
  auto out = transform(spectrum, h, w, FFTW_BACKWARD);
  const double norm = 1.0 / static_cast<double>(h * w);
  for (auto& v : out) v *= norm;
  return out;
}

}  // namespace cssfn::fft
