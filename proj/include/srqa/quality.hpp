#pragma once

#include "srqa/error.hpp"
#include "srqa/filter.hpp"
#include "srqa/image.hpp"
#include "srqa/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace srqa {

struct QualityScores {
  double psnr = std::numeric_limits<double>::infinity();
  double ssim = 1.0;
  std::optional<double> lpips; ///< from a sidecar file, never computed here

  friend bool operator==(const QualityScores&, const QualityScores&) = default;
};

/// Peak signal-to-noise ratio in dB with peak 255. Identical planes give +inf.
inline double psnr(const LumaPlane& reference, const LumaPlane& test) {
  require_same_dims(reference, test);
  auto a = reference.samples();
  auto b = test.samples();
  double sse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sse += d * d;
  }
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / static_cast<double>(a.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

namespace detail {

/// "Valid" separable filtering: output shrinks by window-1 in each axis.
inline std::vector<double> filter_valid(const std::vector<double>& src, int w, int h,
                                        const std::vector<double>& taps) {
  const int k = static_cast<int>(taps.size());
  const int ow = w - k + 1, oh = h - k + 1;
  std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      const double* row = src.data() + static_cast<std::size_t>(y) * w + x;
      for (int i = 0; i < k; ++i) acc += taps[i] * row[i];
      tmp[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < k; ++i) acc += taps[i] * tmp[static_cast<std::size_t>(y + i) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  return out;
}

} // namespace detail

/// Mean structural similarity: 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03, dynamic range 255, evaluated over fully covered window
/// positions only.
inline double ssim(const LumaPlane& reference, const LumaPlane& test) {
  require_same_dims(reference, test);
  constexpr int kWindow = 11;
  if (reference.width() < kWindow || reference.height() < kWindow)
    fail(ErrorKind::TooSmall, "SSIM needs both dimensions >= 11");
  if (reference == test) return 1.0;

  constexpr double c1 = (0.01 * 255.0) * (0.01 * 255.0);
  constexpr double c2 = (0.03 * 255.0) * (0.03 * 255.0);
  const auto taps = gaussian_taps(1.5, kWindow / 2);
  const int w = reference.width(), h = reference.height();

  std::vector<double> x(reference.samples().begin(), reference.samples().end());
  std::vector<double> y(test.samples().begin(), test.samples().end());
  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mu_x = detail::filter_valid(x, w, h, taps);
  const auto mu_y = detail::filter_valid(y, w, h, taps);
  const auto e_xx = detail::filter_valid(xx, w, h, taps);
  const auto e_yy = detail::filter_valid(yy, w, h, taps);
  const auto e_xy = detail::filter_valid(xy, w, h, taps);

  double total = 0.0;
  for (std::size_t i = 0; i < mu_x.size(); ++i) {
    const double mx = mu_x[i], my = mu_y[i];
    const double vx = e_xx[i] - mx * mx;
    const double vy = e_yy[i] - my * my;
    const double cxy = e_xy[i] - mx * my;
    total += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) /
             ((mx * mx + my * my + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mu_x.size());
}

inline QualityScores compare_pair(const RasterImage& hq, const RasterImage& lq,
                                  std::optional<double> lpips_sidecar = std::nullopt) {
  if (hq.width() != lq.width() || hq.height() != lq.height())
    fail(ErrorKind::DimensionMismatch, "image pair dimensions differ");
  const LumaPlane a = to_luma(hq);
  const LumaPlane b = to_luma(lq);
  return QualityScores{psnr(a, b), ssim(a, b), lpips_sidecar};
}

/// Parses an `image_id,lpips` CSV.
inline std::map<std::string, double> load_lpips_sidecar(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::SchemaError, "empty LPIPS sidecar");
  if (!line.empty() && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3); // BOM
  auto header = split_csv_line(line);
  if (header.size() != 2 || header[0] != "image_id" || header[1] != "lpips")
    fail(ErrorKind::SchemaError, "LPIPS sidecar header must be 'image_id,lpips'");
  std::map<std::string, double> values;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 2) fail(ErrorKind::SchemaError, "bad LPIPS row: '" + line + "'");
    const double v = parse_double(fields[1], "lpips");
    if (!(v >= 0.0)) fail(ErrorKind::SchemaError, "LPIPS must be >= 0: '" + line + "'");
    values[fields[0]] = v;
  }
  return values;
}

struct PsnrHistogram {
  std::vector<double> bin_edges; ///< ascending, size == counts.size() + 1
  std::vector<std::size_t> counts;
  std::size_t infinite_count = 0; ///< identical pairs land here
  std::size_t total = 0;
  double min_value = 0.0; ///< finite extremes, meaningful when counts is non-empty
  double max_value = 0.0;
};

/// Fixed-width bins starting at the smallest finite PSNR.
inline PsnrHistogram psnr_histogram(const std::vector<double>& psnr_values, double bin_width) {
  if (!(bin_width > 0.0)) fail(ErrorKind::InvalidArgument, "bin width must be positive");
  if (psnr_values.empty()) fail(ErrorKind::EmptyInput, "no PSNR values to histogram");
  PsnrHistogram hist;
  hist.total = psnr_values.size();
  std::vector<double> finite;
  for (double v : psnr_values) {
    if (std::isinf(v) && v > 0) {
      ++hist.infinite_count;
    } else if (std::isfinite(v)) {
      finite.push_back(v);
    } else {
      fail(ErrorKind::InvalidArgument, "PSNR values must be finite or +inf");
    }
  }
  if (finite.empty()) return hist;
  const auto [lo_it, hi_it] = std::minmax_element(finite.begin(), finite.end());
  const double lo = *lo_it, hi = *hi_it;
  hist.min_value = lo;
  hist.max_value = hi;
  const auto bins = static_cast<std::size_t>(std::floor((hi - lo) / bin_width)) + 1;
  hist.counts.assign(bins, 0);
  for (std::size_t i = 0; i <= bins; ++i) hist.bin_edges.push_back(lo + bin_width * i);
  for (double v : finite) {
    auto b = static_cast<std::size_t>(std::floor((v - lo) / bin_width));
    ++hist.counts[std::min(b, bins - 1)];
  }
  return hist;
}

inline std::vector<double> psnr_values(const std::vector<QualityScores>& scores) {
  std::vector<double> out;
  out.reserve(scores.size());
  for (const auto& s : scores) out.push_back(s.psnr);
  return out;
}

inline PsnrHistogram psnr_histogram(const std::vector<QualityScores>& scores, double bin_width) {
  return psnr_histogram(psnr_values(scores), bin_width);
}

/// Width of the finite support, max - min.
inline double histogram_support(const PsnrHistogram& hist) {
  return hist.counts.empty() ? 0.0 : hist.max_value - hist.min_value;
}

inline std::string histogram_csv(const PsnrHistogram& hist) {
  std::string out = "bin_low,bin_high,count\n";
  for (std::size_t i = 0; i < hist.counts.size(); ++i)
    out += format_double(hist.bin_edges[i]) + "," + format_double(hist.bin_edges[i + 1]) + "," +
           std::to_string(hist.counts[i]) + "\n";
  if (hist.infinite_count > 0) out += "inf,inf," + std::to_string(hist.infinite_count) + "\n";
  return out;
}

} // namespace srqa
