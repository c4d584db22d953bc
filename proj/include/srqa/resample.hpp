#pragma once

#include "srqa/error.hpp"
#include "srqa/image.hpp"
#include "srqa/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace srqa {

enum class KernelKind { Nearest, Bilinear, Bicubic, Lanczos2, Box };

constexpr std::string_view to_string(KernelKind kind) noexcept {
  switch (kind) {
    case KernelKind::Nearest: return "nearest";
    case KernelKind::Bilinear: return "bilinear";
    case KernelKind::Bicubic: return "bicubic";
    case KernelKind::Lanczos2: return "lanczos2";
    case KernelKind::Box: return "box";
  }
  return "unknown";
}

inline std::optional<KernelKind> parse_kernel(std::string_view name) {
  for (auto kind : {KernelKind::Nearest, KernelKind::Bilinear, KernelKind::Bicubic,
                    KernelKind::Lanczos2, KernelKind::Box})
    if (name == to_string(kind)) return kind;
  if (name == "lanczos") return KernelKind::Lanczos2;
  return std::nullopt;
}

/// Integer resampling factor. 1 is the identity; 2..5 are the factors the
/// degradation study covers. Larger values are accepted with a warning.
class ScaleFactor {
public:
  explicit ScaleFactor(int value) : value_(value) {
    if (value < 1) fail(ErrorKind::InvalidArgument, "scale factor must be >= 1");
    if (value > 5) log_warning("scale factor " + std::to_string(value) + " is outside 1..5");
  }
  int value() const noexcept { return value_; }
  friend bool operator==(ScaleFactor, ScaleFactor) = default;

private:
  int value_;
};

namespace detail {

inline double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

inline double kernel_support(KernelKind kind) {
  switch (kind) {
    case KernelKind::Nearest:
    case KernelKind::Box: return 0.5;
    case KernelKind::Bilinear: return 1.0;
    case KernelKind::Bicubic:
    case KernelKind::Lanczos2: return 2.0;
  }
  return 1.0;
}

/// Keys cubic convolution with a = -0.5.
inline double keys_cubic(double x) {
  constexpr double a = -0.5;
  x = std::abs(x);
  if (x < 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

inline double kernel_value(KernelKind kind, double x) {
  switch (kind) {
    case KernelKind::Nearest:
    case KernelKind::Box: return (x >= -0.5 && x < 0.5) ? 1.0 : 0.0;
    case KernelKind::Bilinear: {
      const double ax = std::abs(x);
      return ax < 1.0 ? 1.0 - ax : 0.0;
    }
    case KernelKind::Bicubic: return keys_cubic(x);
    case KernelKind::Lanczos2: return std::abs(x) < 2.0 ? sinc(x) * sinc(x / 2.0) : 0.0;
  }
  return 0.0;
}

/// Normalised taps for one output sample. Indices are already clamped.
struct Taps {
  std::vector<int> index;
  std::vector<double> weight;
};

/// One-dimensional weight table. Source coordinate of output sample d is
/// (d + 0.5) * src/dst - 0.5, or d / sample_step when the source holds every
/// sample_step-th sample of the output grid. When shrinking, the kernel is
/// stretched by src/dst so every source sample contributes (Box then
/// averages the covered region).
inline std::vector<Taps> build_taps(int src_len, int dst_len, KernelKind kind,
                                    int sample_step = 0) {
  std::vector<Taps> table(static_cast<std::size_t>(dst_len));
  const double ratio = sample_step > 0 ? 1.0 / sample_step
                                       : static_cast<double>(src_len) / dst_len;
  auto source_coord = [&](int d) {
    return sample_step > 0 ? static_cast<double>(d) / sample_step : (d + 0.5) * ratio - 0.5;
  };
  if (kind == KernelKind::Nearest) {
    for (int d = 0; d < dst_len; ++d) {
      int s = static_cast<int>(std::floor(source_coord(d) + 0.5));
      table[d].index.push_back(std::clamp(s, 0, src_len - 1));
      table[d].weight.push_back(1.0);
    }
    return table;
  }
  const double stretch = std::max(1.0, ratio);
  const double support = kernel_support(kind) * stretch;
  for (int d = 0; d < dst_len; ++d) {
    const double center = source_coord(d);
    const int first = static_cast<int>(std::floor(center - support));
    const int last = static_cast<int>(std::ceil(center + support));
    Taps& taps = table[d];
    double total = 0.0;
    for (int j = first; j <= last; ++j) {
      const double w = kernel_value(kind, (j - center) / stretch);
      if (w == 0.0) continue;
      const int clamped = std::clamp(j, 0, src_len - 1);
      auto it = std::find(taps.index.begin(), taps.index.end(), clamped);
      if (it == taps.index.end()) {
        taps.index.push_back(clamped);
        taps.weight.push_back(w);
      } else {
        taps.weight[static_cast<std::size_t>(it - taps.index.begin())] += w;
      }
      total += w;
    }
    if (taps.index.empty() || total == 0.0) {
      taps.index.assign(1, std::clamp(static_cast<int>(std::floor(center + 0.5)), 0, src_len - 1));
      taps.weight.assign(1, 1.0);
      continue;
    }
    for (double& w : taps.weight) w /= total;
  }
  return table;
}

/// Separable resampling of one channel stored with the given stride.
inline std::vector<double> resample_channel(const std::vector<double>& src, int src_w, int src_h,
                                            int dst_w, int dst_h, KernelKind kind,
                                            int sample_step = 0) {
  const auto col_taps = build_taps(src_w, dst_w, kind, sample_step);
  const auto row_taps = build_taps(src_h, dst_h, kind, sample_step);

  std::vector<double> horizontal(static_cast<std::size_t>(dst_w) * src_h);
  for (int y = 0; y < src_h; ++y) {
    const double* row = src.data() + static_cast<std::size_t>(y) * src_w;
    double* out = horizontal.data() + static_cast<std::size_t>(y) * dst_w;
    for (int x = 0; x < dst_w; ++x) {
      const Taps& t = col_taps[x];
      double acc = 0.0;
      for (std::size_t k = 0; k < t.index.size(); ++k) acc += t.weight[k] * row[t.index[k]];
      out[x] = acc;
    }
  }

  std::vector<double> result(static_cast<std::size_t>(dst_w) * dst_h);
  for (int y = 0; y < dst_h; ++y) {
    const Taps& t = row_taps[y];
    double* out = result.data() + static_cast<std::size_t>(y) * dst_w;
    for (int x = 0; x < dst_w; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < t.index.size(); ++k)
        acc += t.weight[k] * horizontal[static_cast<std::size_t>(t.index[k]) * dst_w + x];
      out[x] = std::clamp(acc, 0.0, 255.0);
    }
  }
  return result;
}

inline void require_target(int w, int h) {
  if (w <= 0 || h <= 0)
    fail(ErrorKind::InvalidArgument, "resize target must be positive, got " + std::to_string(w) +
                                         "x" + std::to_string(h));
}

inline int ceil_div(int value, int divisor) { return (value + divisor - 1) / divisor; }

inline void require_decimatable(int w, int h, ScaleFactor factor) {
  if (w < factor.value() || h < factor.value())
    fail(ErrorKind::DimensionTooSmall, std::to_string(w) + "x" + std::to_string(h) +
                                           " is too small to decimate by " +
                                           std::to_string(factor.value()));
}

} // namespace detail

namespace detail {

inline LumaPlane resample(const LumaPlane& plane, int target_w, int target_h, KernelKind kernel,
                          int sample_step) {
  require_target(target_w, target_h);
  std::vector<double> src(plane.samples().begin(), plane.samples().end());
  return LumaPlane(target_w, target_h,
                   resample_channel(src, plane.width(), plane.height(), target_w, target_h,
                                    kernel, sample_step));
}

inline RasterImage resample(const RasterImage& img, int target_w, int target_h, KernelKind kernel,
                            int sample_step) {
  require_target(target_w, target_h);
  const int c = img.channels();
  const std::size_t src_n = static_cast<std::size_t>(img.width()) * img.height();
  const std::size_t dst_n = static_cast<std::size_t>(target_w) * target_h;
  std::vector<std::uint8_t> out(dst_n * c);
  std::vector<double> channel(src_n);
  for (int ch = 0; ch < c; ++ch) {
    for (std::size_t i = 0; i < src_n; ++i) channel[i] = img.samples()[i * c + ch];
    auto res = resample_channel(channel, img.width(), img.height(), target_w, target_h, kernel,
                                sample_step);
    for (std::size_t i = 0; i < dst_n; ++i)
      out[i * c + ch] = static_cast<std::uint8_t>(std::lround(res[i]));
  }
  return RasterImage(target_w, target_h, c, std::move(out));
}

} // namespace detail

/// Resamples to the target size. Results are clamped to [0,255].
inline LumaPlane resize(const LumaPlane& plane, int target_w, int target_h, KernelKind kernel) {
  return detail::resample(plane, target_w, target_h, kernel, 0);
}

/// Per-channel resampling, rounded back to 8 bits.
inline RasterImage resize(const RasterImage& img, int target_w, int target_h, KernelKind kernel) {
  return detail::resample(img, target_w, target_h, kernel, 0);
}

/// Keeps every factor-th sample along both axes, starting at index 0. No
/// anti-alias filtering.
inline LumaPlane decimate(const LumaPlane& plane, ScaleFactor factor) {
  detail::require_decimatable(plane.width(), plane.height(), factor);
  const int f = factor.value();
  const int w = detail::ceil_div(plane.width(), f);
  const int h = detail::ceil_div(plane.height(), f);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < plane.height(); y += f)
    for (int x = 0; x < plane.width(); x += f) out.push_back(plane.at(x, y));
  return LumaPlane(w, h, std::move(out));
}

inline RasterImage decimate(const RasterImage& img, ScaleFactor factor) {
  detail::require_decimatable(img.width(), img.height(), factor);
  const int f = factor.value();
  const int c = img.channels();
  const int w = detail::ceil_div(img.width(), f);
  const int h = detail::ceil_div(img.height(), f);
  std::vector<std::uint8_t> out;
  out.reserve(static_cast<std::size_t>(w) * h * c);
  for (int y = 0; y < img.height(); y += f)
    for (int x = 0; x < img.width(); x += f)
      for (int ch = 0; ch < c; ++ch) out.push_back(img.at(x, y, ch));
  return RasterImage(w, h, c, std::move(out));
}

/// Simulated resolution loss: decimate, then interpolate back to the input
/// size. Kept sample k sits at input position k * factor, so interpolation
/// uses that grid rather than the pixel-centre mapping of resize.
template <typename Image>
Image degrade(const Image& image, ScaleFactor factor, KernelKind kernel = KernelKind::Bicubic) {
  if (factor.value() == 1) return image;
  return detail::resample(decimate(image, factor), image.width(), image.height(), kernel,
                          factor.value());
}

} // namespace srqa
