#pragma once

// Seeded image generators for fixtures, tests and the `synth` subcommand.
// All randomness goes through mt19937_64 with hand-rolled distributions, so
// output is identical across standard libraries.

#include "srqa/filter.hpp"
#include "srqa/image.hpp"
#include "srqa/resample.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace srqa::synth {

class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) { // inclusive
    return lo + static_cast<int>(uniform() * (hi - lo + 1));
  }
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

private:
  std::mt19937_64 engine_;
};

inline double clamp255(double v) { return std::clamp(v, 0.0, 255.0); }

inline LumaPlane noise_plane(int w, int h, std::uint64_t seed, double lo = 0.0, double hi = 255.0) {
  Rng rng(seed);
  std::vector<double> v(static_cast<std::size_t>(w) * h);
  for (double& x : v) x = rng.uniform(lo, hi);
  return LumaPlane(w, h, std::move(v));
}

/// Squares of side `square` alternating between lo and hi, starting with lo
/// at the origin.
inline LumaPlane checkerboard(int w, int h, int square, double lo = 0.0, double hi = 255.0) {
  std::vector<double> v(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      v[static_cast<std::size_t>(y) * w + x] = ((x / square + y / square) % 2 == 0) ? lo : hi;
  return LumaPlane(w, h, std::move(v));
}

inline LumaPlane horizontal_ramp(int w, int h, double start, double step) {
  std::vector<double> v(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) v[static_cast<std::size_t>(y) * w + x] = start + step * x;
  return LumaPlane(w, h, std::move(v));
}

/// Stained-smear stand-in: pale background, soft-edged elliptical cells with
/// darker nuclei, and fine grain. `detail` scales the grain and adds thin
/// fibres, for images meant to carry high-frequency content.
inline RasterImage cell_image(int w, int h, std::uint64_t seed, double detail = 1.0) {
  Rng rng(seed);
  std::vector<double> r(static_cast<std::size_t>(w) * h), g(r.size()), b(r.size());
  const double bg_r = rng.uniform(215, 240), bg_g = rng.uniform(200, 230), bg_b = rng.uniform(220, 245);
  std::fill(r.begin(), r.end(), bg_r);
  std::fill(g.begin(), g.end(), bg_g);
  std::fill(b.begin(), b.end(), bg_b);

  const int cells = std::max(4, w * h / 1800);
  for (int c = 0; c < cells; ++c) {
    const double cx = rng.uniform(0, w), cy = rng.uniform(0, h);
    const double ax = rng.uniform(5, 16), ay = rng.uniform(5, 16);
    const double angle = rng.uniform(0, std::numbers::pi);
    const double nucleus = rng.uniform(0.35, 0.6);
    const double cr = rng.uniform(150, 200), cg = rng.uniform(110, 160), cb = rng.uniform(170, 215);
    const double nr = rng.uniform(60, 110), ng = rng.uniform(30, 70), nb = rng.uniform(100, 150);
    const double ca = std::cos(angle), sa = std::sin(angle);
    const int x0 = std::max(0, static_cast<int>(cx - 18)), x1 = std::min(w - 1, static_cast<int>(cx + 18));
    const int y0 = std::max(0, static_cast<int>(cy - 18)), y1 = std::min(h - 1, static_cast<int>(cy + 18));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
        const double u = (dx * ca + dy * sa) / ax, v = (-dx * sa + dy * ca) / ay;
        const double d = std::sqrt(u * u + v * v);
        const double body = 1.0 / (1.0 + std::exp((d - 1.0) * 12.0));
        const double core = 1.0 / (1.0 + std::exp((d - nucleus) * 20.0));
        const auto i = static_cast<std::size_t>(y) * w + x;
        r[i] = r[i] * (1 - body) + (cr * (1 - core) + nr * core) * body;
        g[i] = g[i] * (1 - body) + (cg * (1 - core) + ng * core) * body;
        b[i] = b[i] * (1 - body) + (cb * (1 - core) + nb * core) * body;
      }
  }

  if (detail > 1.0) {
    const int fibres = static_cast<int>(detail * w / 16);
    for (int f = 0; f < fibres; ++f) {
      double x = rng.uniform(0, w), y = rng.uniform(0, h);
      double heading = rng.uniform(0, 2 * std::numbers::pi);
      const double shade = rng.uniform(-70, -30);
      for (int step = 0; step < 60; ++step) {
        heading += rng.uniform(-0.25, 0.25);
        x += std::cos(heading);
        y += std::sin(heading);
        const int xi = static_cast<int>(x), yi = static_cast<int>(y);
        if (xi < 0 || yi < 0 || xi >= w || yi >= h) break;
        const auto i = static_cast<std::size_t>(yi) * w + xi;
        r[i] += shade;
        g[i] += shade;
        b[i] += shade * 0.7;
      }
    }
  }

  const double grain = 4.0 * detail;
  std::vector<std::uint8_t> out(r.size() * 3);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double n = grain * rng.normal();
    out[3 * i] = static_cast<std::uint8_t>(std::lround(clamp255(r[i] + n)));
    out[3 * i + 1] = static_cast<std::uint8_t>(std::lround(clamp255(g[i] + n)));
    out[3 * i + 2] = static_cast<std::uint8_t>(std::lround(clamp255(b[i] + n)));
  }
  return RasterImage(w, h, 3, std::move(out));
}

struct PlanePair {
  LumaPlane hq;
  LumaPlane lq;
};

/// Defocus-style pair with random blur strength and sensor noise, mimicking
/// a knob-turned acquisition.
inline PlanePair defocus_pair(int w, int h, std::uint64_t seed) {
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  LumaPlane hq = to_luma(cell_image(w, h, seed));
  const double sigma = rng.uniform(0.3, 3.5);
  const double noise = rng.uniform(0.0, 10.0);
  LumaPlane blurred = gaussian_blur(hq, sigma);
  std::vector<double> v(blurred.samples().begin(), blurred.samples().end());
  for (double& x : v) x = clamp255(x + noise * rng.normal());
  return {std::move(hq), LumaPlane(w, h, std::move(v))};
}

/// Fixed-factor pair: decimate by `factor` and interpolate back bicubically.
inline PlanePair bicubic_pair(int w, int h, std::uint64_t seed, int factor = 2) {
  LumaPlane hq = to_luma(cell_image(w, h, seed));
  LumaPlane lq = degrade(hq, ScaleFactor(factor), KernelKind::Bicubic);
  return {std::move(hq), std::move(lq)};
}

inline RasterImage gray_raster(const LumaPlane& plane) { return to_raster(plane); }

} // namespace srqa::synth
