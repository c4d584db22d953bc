#pragma once

#include "srqa/error.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace srqa {

/// 8-bit raster with 1 (gray) or 3 (RGB) interleaved channels, row-major.
class RasterImage {
public:
  RasterImage(int width, int height, int channels, std::vector<std::uint8_t> samples)
      : width_(width), height_(height), channels_(channels), samples_(std::move(samples)) {
    if (width <= 0 || height <= 0)
      fail(ErrorKind::InvalidArgument, "raster dimensions must be positive, got " +
                                           std::to_string(width) + "x" + std::to_string(height));
    if (channels != 1 && channels != 3)
      fail(ErrorKind::InvalidArgument,
           "raster must have 1 or 3 channels, got " + std::to_string(channels));
    if (samples_.size() != sample_count())
      fail(ErrorKind::InvalidArgument, "raster sample count " + std::to_string(samples_.size()) +
                                           " does not match " + std::to_string(sample_count()));
  }

  RasterImage(int width, int height, int channels)
      : RasterImage(width, height, channels,
                    std::vector<std::uint8_t>(checked_count(width, height, channels), 0)) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }

  std::size_t sample_count() const noexcept {
    return static_cast<std::size_t>(width_) * height_ * channels_;
  }

  std::span<const std::uint8_t> samples() const noexcept { return samples_; }
  std::span<std::uint8_t> samples() noexcept { return samples_; }

  std::uint8_t at(int x, int y, int c = 0) const {
    return samples_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  std::uint8_t& at(int x, int y, int c = 0) {
    return samples_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

private:
  static std::size_t checked_count(int width, int height, int channels) {
    if (width <= 0 || height <= 0 || channels <= 0) return 0;
    return static_cast<std::size_t>(width) * height * channels;
  }

  int width_;
  int height_;
  int channels_;
  std::vector<std::uint8_t> samples_;
};

/// Real-valued luminance plane. Every metric in the library consumes this.
class LumaPlane {
public:
  static constexpr double kTolerance = 1e-9;

  LumaPlane(int width, int height, std::vector<double> samples)
      : width_(width), height_(height), samples_(std::move(samples)) {
    if (width <= 0 || height <= 0)
      fail(ErrorKind::InvalidArgument, "plane dimensions must be positive, got " +
                                           std::to_string(width) + "x" + std::to_string(height));
    if (samples_.size() != static_cast<std::size_t>(width) * height)
      fail(ErrorKind::InvalidArgument, "plane sample count does not match dimensions");
    for (double v : samples_) {
      if (!std::isfinite(v) || v < -kTolerance || v > 255.0 + kTolerance)
        fail(ErrorKind::InvalidArgument,
             "luma sample out of range [0,255]: " + std::to_string(v));
    }
  }

  LumaPlane(int width, int height, double fill = 0.0)
      : LumaPlane(width, height,
                  std::vector<double>(width > 0 && height > 0
                                          ? static_cast<std::size_t>(width) * height
                                          : 0,
                                      fill)) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return samples_.size(); }

  std::span<const double> samples() const noexcept { return samples_; }

  double at(int x, int y) const { return samples_[static_cast<std::size_t>(y) * width_ + x]; }

  friend bool operator==(const LumaPlane&, const LumaPlane&) = default;

private:
  int width_;
  int height_;
  std::vector<double> samples_;
};

/// BT.601 full-range luma. Evaluated as an integer dot product over 1000 so
/// that gray pixels map to exactly their value.
inline LumaPlane to_luma(const RasterImage& img) {
  std::vector<double> out(static_cast<std::size_t>(img.width()) * img.height());
  auto in = img.samples();
  if (img.channels() == 1) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = in[i];
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) {
      const int r = in[3 * i], g = in[3 * i + 1], b = in[3 * i + 2];
      out[i] = static_cast<double>(299 * r + 587 * g + 114 * b) / 1000.0;
    }
  }
  return LumaPlane(img.width(), img.height(), std::move(out));
}

/// Rounds a plane to an 8-bit gray raster (half away from zero).
inline RasterImage to_raster(const LumaPlane& plane) {
  std::vector<std::uint8_t> out(plane.size());
  auto in = plane.samples();
  for (std::size_t i = 0; i < out.size(); ++i) {
    double v = std::round(in[i]);
    out[i] = static_cast<std::uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v));
  }
  return RasterImage(plane.width(), plane.height(), 1, std::move(out));
}

inline void require_same_dims(const LumaPlane& a, const LumaPlane& b) {
  if (a.width() != b.width() || a.height() != b.height())
    fail(ErrorKind::DimensionMismatch,
         "plane dimensions differ: " + std::to_string(a.width()) + "x" +
             std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
             std::to_string(b.height()));
}

} // namespace srqa
