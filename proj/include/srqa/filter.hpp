#pragma once

#include "srqa/error.hpp"
#include "srqa/image.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace srqa {

/// Normalised 1-D Gaussian taps over [-radius, radius].
inline std::vector<double> gaussian_taps(double sigma, int radius) {
  if (sigma <= 0.0) fail(ErrorKind::InvalidArgument, "gaussian sigma must be positive");
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    taps[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    total += taps[i + radius];
  }
  for (double& t : taps) t /= total;
  return taps;
}

/// Separable Gaussian blur with clamp-to-edge borders. The default radius
/// keeps truncated tail mass below 1e-8.
inline LumaPlane gaussian_blur(const LumaPlane& plane, double sigma, int radius = -1) {
  if (radius < 0) radius = static_cast<int>(std::ceil(6.0 * sigma));
  const auto taps = gaussian_taps(sigma, radius);
  const int w = plane.width(), h = plane.height();
  std::vector<double> tmp(plane.size()), out(plane.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += taps[k + radius] * plane.at(std::clamp(x + k, 0, w - 1), y);
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += taps[k + radius] * tmp[static_cast<std::size_t>(std::clamp(y + k, 0, h - 1)) * w + x];
      out[static_cast<std::size_t>(y) * w + x] = std::clamp(acc, 0.0, 255.0);
    }
  return LumaPlane(w, h, std::move(out));
}

} // namespace srqa
