#pragma once

#include "srqa/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace srqa {

/// Binary mask as uncompressed COCO run lengths: column-major pixel order,
/// runs alternate starting with background (the first count may be 0).
struct RleMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> counts;

  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(height) * width; }

  friend bool operator==(const RleMask&, const RleMask&) = default;
};

/// Total of all runs must cover the grid exactly.
inline void validate_rle(const RleMask& m) {
  if (m.height <= 0 || m.width <= 0) fail(ErrorKind::SchemaError, "RLE grid must be positive");
  std::uint64_t sum = 0;
  for (auto c : m.counts) sum += c;
  if (sum != m.pixel_count())
    fail(ErrorKind::SchemaError, "RLE counts sum to " + std::to_string(sum) + ", expected " +
                                     std::to_string(m.pixel_count()));
}

inline std::size_t rle_area(const RleMask& m) {
  std::size_t area = 0;
  for (std::size_t i = 1; i < m.counts.size(); i += 2) area += m.counts[i];
  return area;
}

/// Encodes a row-major 0/1 bitmap.
inline RleMask rle_encode(const std::vector<std::uint8_t>& bits, int height, int width) {
  if (bits.size() != static_cast<std::size_t>(height) * width)
    fail(ErrorKind::InvalidArgument, "bitmap size does not match grid");
  RleMask m{height, width, {}};
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (int x = 0; x < width; ++x)
    for (int y = 0; y < height; ++y) {
      const std::uint8_t b = bits[static_cast<std::size_t>(y) * width + x] ? 1 : 0;
      if (b != current) {
        m.counts.push_back(run);
        run = 0;
        current = b;
      }
      ++run;
    }
  m.counts.push_back(run);
  return m;
}

/// Decodes to a row-major 0/1 bitmap.
inline std::vector<std::uint8_t> rle_decode(const RleMask& m) {
  validate_rle(m);
  std::vector<std::uint8_t> bits(m.pixel_count(), 0);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < m.counts.size(); ++i) {
    for (std::uint32_t k = 0; k < m.counts[i]; ++k, ++pos) {
      if (i % 2 == 1) {
        const auto x = pos / static_cast<std::size_t>(m.height);
        const auto y = pos % static_cast<std::size_t>(m.height);
        bits[y * static_cast<std::size_t>(m.width) + x] = 1;
      }
    }
  }
  return bits;
}

/// Size of the intersection, by merging the two run lists.
inline std::size_t rle_intersection(const RleMask& a, const RleMask& b) {
  std::size_t ia = 0, ib = 0;
  std::uint64_t ra = a.counts.empty() ? 0 : a.counts[0];
  std::uint64_t rb = b.counts.empty() ? 0 : b.counts[0];
  bool va = false, vb = false;
  std::size_t inter = 0;
  while (ia < a.counts.size() && ib < b.counts.size()) {
    const std::uint64_t step = std::min(ra, rb);
    if (va && vb) inter += step;
    ra -= step;
    rb -= step;
    while (ra == 0 && ++ia < a.counts.size()) {
      ra = a.counts[ia];
      va = !va;
    }
    while (rb == 0 && ++ib < b.counts.size()) {
      rb = b.counts[ib];
      vb = !vb;
    }
  }
  return inter;
}

inline double mask_iou(const RleMask& a, const RleMask& b) {
  if (a.height != b.height || a.width != b.width)
    fail(ErrorKind::GridMismatch, "masks are on different grids: " + std::to_string(a.height) +
                                      "x" + std::to_string(a.width) + " vs " +
                                      std::to_string(b.height) + "x" + std::to_string(b.width));
  const std::size_t inter = rle_intersection(a, b);
  const std::size_t uni = rle_area(a) + rle_area(b) - inter;
  if (uni == 0) fail(ErrorKind::BothEmpty, "IoU of two empty masks is undefined");
  return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Decodes the compact string form of COCO counts (6-bit chunks offset by
/// 48, deltas against the count two positions back after the third).
inline std::vector<std::uint32_t> rle_counts_from_string(std::string_view s) {
  std::vector<std::int64_t> counts;
  std::size_t p = 0;
  while (p < s.size()) {
    std::int64_t x = 0;
    int k = 0;
    bool more = true;
    while (more) {
      if (p >= s.size()) fail(ErrorKind::SchemaError, "truncated RLE string");
      const std::int64_t c = static_cast<std::int64_t>(s[p]) - 48;
      if (c < 0 || c > 63) fail(ErrorKind::SchemaError, "invalid character in RLE string");
      x |= (c & 0x1f) << (5 * k);
      more = (c & 0x20) != 0;
      ++p;
      ++k;
      if (!more && (c & 0x10)) x |= static_cast<std::int64_t>(-1) * (std::int64_t{1} << (5 * k));
    }
    if (counts.size() > 2) x += counts[counts.size() - 2];
    counts.push_back(x);
  }
  std::vector<std::uint32_t> out;
  out.reserve(counts.size());
  for (auto c : counts) {
    if (c < 0) fail(ErrorKind::SchemaError, "negative run in RLE string");
    out.push_back(static_cast<std::uint32_t>(c));
  }
  return out;
}

/// Inverse of rle_counts_from_string.
inline std::string rle_counts_to_string(const std::vector<std::uint32_t>& counts) {
  std::string s;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    std::int64_t x = counts[i];
    if (i > 2) x -= counts[i - 2];
    bool more = true;
    while (more) {
      std::int64_t c = x & 0x1f;
      x >>= 5;
      more = (c & 0x10) ? x != -1 : x != 0;
      if (more) c |= 0x20;
      s.push_back(static_cast<char>(c + 48));
    }
  }
  return s;
}

/// Rasterises polygons ([x0,y0,x1,y1,...] in pixel coordinates, pixel (0,0)
/// spanning [0,1)^2) by even-odd testing of pixel centres. Multiple polygons
/// are united.
inline RleMask rle_from_polygons(const std::vector<std::vector<double>>& polygons, int height,
                                 int width) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(height) * width, 0);
  for (const auto& poly : polygons) {
    if (poly.size() < 6 || poly.size() % 2 != 0)
      fail(ErrorKind::SchemaError, "polygon needs at least three x,y points");
    const std::size_t n = poly.size() / 2;
    for (int y = 0; y < height; ++y) {
      const double py = y + 0.5;
      std::vector<double> crossings;
      for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const double xi = poly[2 * i], yi = poly[2 * i + 1];
        const double xj = poly[2 * j], yj = poly[2 * j + 1];
        if ((yi > py) != (yj > py)) crossings.push_back(xi + (py - yi) * (xj - xi) / (yj - yi));
      }
      std::sort(crossings.begin(), crossings.end());
      for (std::size_t c = 0; c + 1 < crossings.size(); c += 2) {
        const int x0 = std::max(0, static_cast<int>(std::ceil(crossings[c] - 0.5)));
        const int x1 = std::min(width - 1, static_cast<int>(std::ceil(crossings[c + 1] - 0.5)) - 1);
        for (int x = x0; x <= x1; ++x) bits[static_cast<std::size_t>(y) * width + x] = 1;
      }
    }
  }
  return rle_encode(bits, height, width);
}

} // namespace srqa
