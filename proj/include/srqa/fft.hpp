#pragma once

#include "srqa/error.hpp"
#include "srqa/image.hpp"

#include <fftw3.h>

#include <complex>
#include <memory>
#include <mutex>
#include <vector>

namespace srqa {

namespace detail {

// FFTW planning is not thread-safe; execution of distinct plans is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};

} // namespace detail

/// Forward, unnormalised, unshifted 2-D DFT of a real plane, row-major
/// height x width.
inline std::vector<std::complex<double>> dft2d(const LumaPlane& plane) {
  const int w = plane.width(), h = plane.height();
  const std::size_t n = plane.size();
  std::unique_ptr<fftw_complex, detail::FftwFree> buffer(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
  if (!buffer) fail(ErrorKind::IoError, "FFT buffer allocation failed");

  fftw_plan plan;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    plan = fftw_plan_dft_2d(h, w, buffer.get(), buffer.get(), FFTW_FORWARD, FFTW_ESTIMATE);
  }
  auto samples = plane.samples();
  for (std::size_t i = 0; i < n; ++i) {
    buffer.get()[i][0] = samples[i];
    buffer.get()[i][1] = 0.0;
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }

  std::vector<std::complex<double>> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {buffer.get()[i][0], buffer.get()[i][1]};
  return out;
}

} // namespace srqa
