#pragma once

#include "srqa/error.hpp"
#include "srqa/fft.hpp"
#include "srqa/image.hpp"
#include "srqa/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace srqa {

/// Sums of DFT magnitudes over equal-width annuli of normalised radius.
///
/// Radius is measured from the centred zero-frequency bin and normalised by
/// the half-diagonal, so ring i covers [i/N, (i+1)/N) and the last ring is
/// closed at 1 (it contains the corner bins).
struct RingSpectrum {
  int ring_count = 0;
  std::vector<double> boundaries; ///< ring_count + 1 values, 0 .. 1
  std::vector<double> energies;   ///< absolute magnitude sums per ring
  double total = 0.0;
};

/// Ring that a centred frequency offset (dy, dx) falls into. Uses exact
/// integer comparisons on squared distances, so bins on a boundary are never
/// misassigned by rounding.
inline int ring_of_offset(std::int64_t dy, std::int64_t dx, std::int64_t radius_sq,
                          int ring_count) {
  const std::int64_t d2 = dy * dy + dx * dx;
  const std::int64_t n2 = static_cast<std::int64_t>(ring_count) * ring_count;
  // largest i with i^2 * R^2 <= N^2 * d^2
  int i = static_cast<int>(std::floor(ring_count * std::sqrt(static_cast<double>(d2) /
                                                             static_cast<double>(radius_sq))));
  i = std::clamp(i, 0, ring_count);
  while (i > 0 && static_cast<std::int64_t>(i) * i * radius_sq > n2 * d2) --i;
  while (i < ring_count && static_cast<std::int64_t>(i + 1) * (i + 1) * radius_sq <= n2 * d2) ++i;
  return std::min(i, ring_count - 1);
}

/// Centred offset of unshifted DFT index u along an axis of length n. After
/// the zero-frequency shift, DC sits at floor(n/2).
inline std::int64_t centred_offset(int u, int n) { return ((u + n / 2) % n) - n / 2; }

/// Ring index for every unshifted DFT bin of an h x w spectrum.
inline std::vector<int> ring_assignment(int height, int width, int ring_count) {
  const std::int64_t cy = height / 2, cx = width / 2;
  const std::int64_t radius_sq = cy * cy + cx * cx;
  std::vector<int> rings(static_cast<std::size_t>(height) * width);
  for (int v = 0; v < height; ++v)
    for (int u = 0; u < width; ++u)
      rings[static_cast<std::size_t>(v) * width + u] =
          ring_of_offset(centred_offset(v, height), centred_offset(u, width), radius_sq, ring_count);
  return rings;
}

inline RingSpectrum compute_ring_spectrum(const LumaPlane& plane, int ring_count = 10) {
  if (ring_count < 2) fail(ErrorKind::InvalidArgument, "ring count must be >= 2");
  if (plane.width() < 4 || plane.height() < 4)
    fail(ErrorKind::TooSmall, "ring spectrum needs both dimensions >= 4");

  const auto spectrum = dft2d(plane);
  const auto rings = ring_assignment(plane.height(), plane.width(), ring_count);

  RingSpectrum out;
  out.ring_count = ring_count;
  out.energies.assign(static_cast<std::size_t>(ring_count), 0.0);
  for (int i = 0; i <= ring_count; ++i)
    out.boundaries.push_back(static_cast<double>(i) / ring_count);
  for (std::size_t k = 0; k < spectrum.size(); ++k) out.energies[rings[k]] += std::abs(spectrum[k]);
  out.total = std::accumulate(out.energies.begin(), out.energies.end(), 0.0);
  return out;
}

/// Fraction of the total magnitude carried by rings >= cutoff_ring.
inline double high_frequency_share(const RingSpectrum& spectrum, int cutoff_ring) {
  if (cutoff_ring < 0 || cutoff_ring >= spectrum.ring_count)
    fail(ErrorKind::InvalidArgument, "cutoff ring " + std::to_string(cutoff_ring) +
                                         " outside [0," + std::to_string(spectrum.ring_count) +
                                         ")");
  if (!(spectrum.total > 0.0)) fail(ErrorKind::ZeroTotal, "spectrum has zero total energy");
  double high = 0.0;
  for (int i = cutoff_ring; i < spectrum.ring_count; ++i) high += spectrum.energies[i];
  return std::clamp(high / spectrum.total, 0.0, 1.0);
}

struct LabeledSpectrum {
  std::string label;
  RingSpectrum spectrum;
};

namespace detail {

inline void require_common_ring_count(const std::vector<LabeledSpectrum>& spectra) {
  if (spectra.empty()) fail(ErrorKind::EmptyInput, "no spectra to emit");
  for (const auto& s : spectra)
    if (s.spectrum.ring_count != spectra.front().spectrum.ring_count)
      fail(ErrorKind::InvalidArgument, "spectra have different ring counts");
}

inline std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

} // namespace detail

inline std::string ring_bars_csv(const std::vector<LabeledSpectrum>& spectra) {
  detail::require_common_ring_count(spectra);
  std::string out = "label,ring_index,r_min,r_max,energy\n";
  for (const auto& [label, s] : spectra)
    for (int i = 0; i < s.ring_count; ++i)
      out += label + "," + std::to_string(i) + "," + format_double(s.boundaries[i]) + "," +
             format_double(s.boundaries[i + 1]) + "," + format_double(s.energies[i]) + "\n";
  return out;
}

/// Grouped bar chart, one group per ring, log10 energy on the vertical axis.
inline std::string ring_bars_svg(const std::vector<LabeledSpectrum>& spectra) {
  detail::require_common_ring_count(spectra);
  constexpr double kWidth = 1000, kHeight = 420, kLeft = 60, kBottom = 40, kTop = 40;
  static constexpr const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                            "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  const int rings = spectra.front().spectrum.ring_count;
  double max_log = 1.0;
  for (const auto& s : spectra)
    for (double e : s.spectrum.energies) max_log = std::max(max_log, std::log10(1.0 + e));
  const double plot_w = kWidth - kLeft - 20, plot_h = kHeight - kBottom - kTop;
  const double group_w = plot_w / rings;
  const double bar_w = group_w * 0.8 / static_cast<double>(spectra.size());

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1000\" height=\"420\">\n";
  svg += "<rect width=\"1000\" height=\"420\" fill=\"white\"/>\n";
  for (std::size_t k = 0; k < spectra.size(); ++k) {
    const char* color = kColors[k % std::size(kColors)];
    for (int i = 0; i < rings; ++i) {
      const double h = plot_h * std::log10(1.0 + spectra[k].spectrum.energies[i]) / max_log;
      const double x = kLeft + i * group_w + group_w * 0.1 + k * bar_w;
      svg += "<rect x=\"" + format_fixed(x, 2) + "\" y=\"" +
             format_fixed(kTop + plot_h - h, 2) + "\" width=\"" + format_fixed(bar_w, 2) +
             "\" height=\"" + format_fixed(h, 2) + "\" fill=\"" + color + "\"/>\n";
    }
    svg += "<text x=\"" + format_fixed(kLeft + 10 + 160.0 * k, 2) +
           "\" y=\"20\" font-size=\"12\" fill=\"" + color + "\">" +
           detail::xml_escape(spectra[k].label) + "</text>\n";
  }
  for (int i = 0; i < rings; ++i)
    svg += "<text x=\"" + format_fixed(kLeft + (i + 0.5) * group_w, 2) + "\" y=\"" +
           format_fixed(kHeight - 15, 2) + "\" font-size=\"11\" text-anchor=\"middle\">" +
           std::to_string(i) + "</text>\n";
  svg += "<text x=\"12\" y=\"" + format_fixed(kTop + plot_h / 2, 2) +
         "\" font-size=\"11\" transform=\"rotate(-90 12 " + format_fixed(kTop + plot_h / 2, 2) +
         ")\">log10(1 + energy)</text>\n";
  svg += "</svg>\n";
  return svg;
}

/// Writes the ring CSV, and the SVG chart when a path for it is given.
inline void emit_ring_bars(const std::vector<LabeledSpectrum>& spectra,
                           const std::filesystem::path& csv_path,
                           const std::optional<std::filesystem::path>& svg_path = std::nullopt) {
  write_text_file(csv_path, ring_bars_csv(spectra));
  if (svg_path) write_text_file(*svg_path, ring_bars_svg(spectra));
}

} // namespace srqa
