#include "oracles.hpp"

#include "srqa/filter.hpp"
#include "srqa/png_io.hpp"
#include "srqa/resample.hpp"
#include "srqa/ring_spectrum.hpp"
#include "srqa/synth.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <numeric>
#include <sstream>

namespace fs = std::filesystem;
using namespace srqa;

namespace {

double sum_abs(const std::vector<std::complex<double>>& spectrum) {
  double total = 0.0;
  for (const auto& c : spectrum) total += std::abs(c);
  return total;
}

std::vector<int> bin_counts(int h, int w, int rings) {
  std::vector<int> counts(rings, 0);
  for (int r : ring_assignment(h, w, rings)) ++counts[r];
  return counts;
}

LumaPlane cyclic_shift(const LumaPlane& p, int dx, int dy) {
  const int w = p.width(), h = p.height();
  std::vector<double> out(p.samples().size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      out[static_cast<std::size_t>((y + dy) % h) * w + (x + dx) % w] = p.at(x, y);
  return LumaPlane(w, h, std::move(out));
}

int count_lines(const std::string& text) {
  return static_cast<int>(std::count(text.begin(), text.end(), '\n'));
}

} // namespace

TEST(Dft, MatchesDirectOracle) {
  for (auto [w, h] : {std::pair{8, 8}, std::pair{7, 5}, std::pair{6, 9}}) {
    const auto p = synth::noise_plane(w, h, w * 100 + h);
    const auto fast = dft2d(p);
    const auto slow = oracle::direct_dft({p.samples().begin(), p.samples().end()}, w, h);
    ASSERT_EQ(fast.size(), slow.size());
    for (std::size_t i = 0; i < fast.size(); ++i) EXPECT_LT(std::abs(fast[i] - slow[i]), 1e-8);
  }
}

TEST(RingAssignment, AgreesWithFloatingRadiusAwayFromBoundaries) {
  for (auto [w, h] : {std::pair{8, 8}, std::pair{9, 7}, std::pair{64, 40}, std::pair{33, 33}}) {
    for (int rings : {2, 4, 10, 13}) {
      const auto assigned = ring_assignment(h, w, rings);
      const double cy = h / 2, cx = w / 2;
      for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u) {
          const int row = static_cast<int>(centred_offset(v, h) + h / 2);
          const int col = static_cast<int>(centred_offset(u, w) + w / 2);
          const double scaled = std::hypot(row - cy, col - cx) / std::hypot(cy, cx) * rings;
          if (std::abs(scaled - std::round(scaled)) < 1e-9) continue;
          EXPECT_EQ(assigned[static_cast<std::size_t>(v) * w + u],
                    oracle::ring_by_radius(row, col, h, w, rings));
        }
    }
  }
}

TEST(RingAssignment, DcInFirstRingCornerInLast) {
  const auto a = ring_assignment(8, 8, 4);
  EXPECT_EQ(a[0], 0);
  // unshifted (4,4) is the Nyquist corner, at exactly the half-diagonal
  EXPECT_EQ(a[4 * 8 + 4], 3);
}

TEST(RingSpectrum, ConstantPlaneHasOnlyDc) {
  const int n = 16;
  const auto s = compute_ring_spectrum(LumaPlane(n, n, 9.0), 5);
  EXPECT_NEAR(s.energies[0], n * n * 9.0, 1e-9);
  for (int i = 1; i < 5; ++i) EXPECT_NEAR(s.energies[i], 0.0, 1e-9);
  EXPECT_NEAR(high_frequency_share(s, 1), 0.0, 1e-12);
  EXPECT_EQ(high_frequency_share(s, 0), 1.0);
}

TEST(RingSpectrum, ImpulseEnergyEqualsBinCount) {
  for (int y0 : {0, 3, 7})
    for (int x0 : {0, 5}) {
      std::vector<double> samples(64, 0.0);
      samples[y0 * 8 + x0] = 1.0;
      const LumaPlane p(8, 8, std::move(samples));
      const auto slow = oracle::direct_dft({p.samples().begin(), p.samples().end()}, 8, 8);
      for (const auto& c : slow) EXPECT_NEAR(std::abs(c), 1.0, 1e-12);
      const auto s = compute_ring_spectrum(p, 4);
      const auto counts = bin_counts(8, 8, 4);
      for (int i = 0; i < 4; ++i) EXPECT_NEAR(s.energies[i], counts[i], 1e-12);
    }
}

TEST(RingSpectrum, ShapeInvariants) {
  const auto s = compute_ring_spectrum(synth::noise_plane(20, 12, 3), 7);
  EXPECT_EQ(s.ring_count, 7);
  ASSERT_EQ(s.energies.size(), 7u);
  ASSERT_EQ(s.boundaries.size(), 8u);
  EXPECT_EQ(s.boundaries.front(), 0.0);
  EXPECT_EQ(s.boundaries.back(), 1.0);
  for (std::size_t i = 1; i < s.boundaries.size(); ++i) EXPECT_LT(s.boundaries[i - 1], s.boundaries[i]);
  for (double e : s.energies) EXPECT_GE(e, 0.0);
}

TEST(RingSpectrum, ConservesTotalMagnitude) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    synth::Rng rng(seed);
    const int w = rng.integer(8, 64), h = rng.integer(8, 64);
    const auto p = synth::noise_plane(w, h, seed);
    const auto s = compute_ring_spectrum(p, rng.integer(2, 12));
    const double reference = sum_abs(oracle::direct_dft({p.samples().begin(), p.samples().end()}, w, h));
    const double rings = std::accumulate(s.energies.begin(), s.energies.end(), 0.0);
    EXPECT_NEAR(rings / reference, 1.0, 1e-6);
    EXPECT_NEAR(s.total / reference, 1.0, 1e-6);
  }
}

TEST(RingSpectrum, CyclicShiftInvariant) {
  const auto p = synth::noise_plane(24, 18, 8);
  const auto base = compute_ring_spectrum(p, 10);
  for (auto [dx, dy] : {std::pair{1, 0}, std::pair{5, 7}, std::pair{23, 17}}) {
    const auto moved = compute_ring_spectrum(cyclic_shift(p, dx, dy), 10);
    for (int i = 0; i < 10; ++i) EXPECT_NEAR(moved.energies[i] / base.energies[i], 1.0, 1e-6);
  }
}

TEST(RingSpectrum, ScalesLinearly) {
  const auto p = synth::noise_plane(16, 16, 4, 0.0, 100.0);
  std::vector<double> scaled(p.samples().begin(), p.samples().end());
  for (auto& v : scaled) v *= 2.5;
  const auto a = compute_ring_spectrum(p, 6);
  const auto b = compute_ring_spectrum(LumaPlane(16, 16, std::move(scaled)), 6);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(b.energies[i], 2.5 * a.energies[i], 1e-9 * b.energies[i]);
}

TEST(RingSpectrum, HighShareFallsWithBlur) {
  const auto board = synth::checkerboard(32, 32, 2);
  double previous = high_frequency_share(compute_ring_spectrum(board, 10), 5);
  for (double sigma : {1.0, 2.0, 3.0}) {
    const double current = high_frequency_share(compute_ring_spectrum(gaussian_blur(board, sigma), 10), 5);
    EXPECT_LT(current, previous) << sigma;
    previous = current;
  }
  const double f2 = high_frequency_share(compute_ring_spectrum(degrade(board, ScaleFactor(2)), 10), 5);
  const double f5 = high_frequency_share(compute_ring_spectrum(degrade(board, ScaleFactor(5)), 10), 5);
  EXPECT_LT(f2, high_frequency_share(compute_ring_spectrum(board, 10), 5));
  EXPECT_LT(f5, f2);
}

TEST(RingSpectrum, OuterRingsFallWithDegradation) {
  const auto image = to_luma(load_image(fs::path(SRQA_TEST_DATA) / "detail_256.png"));
  const auto original = compute_ring_spectrum(image, 10);
  const auto f2 = compute_ring_spectrum(degrade(image, ScaleFactor(2)), 10);
  const auto f5 = compute_ring_spectrum(degrade(image, ScaleFactor(5)), 10);
  for (int i = 5; i < 10; ++i) {
    EXPECT_GT(original.energies[i], f2.energies[i]) << i;
    EXPECT_GT(f2.energies[i], f5.energies[i]) << i;
  }
}

TEST(RingSpectrum, Errors) {
  EXPECT_THROW(compute_ring_spectrum(LumaPlane(3, 8), 4), Error);
  EXPECT_THROW(compute_ring_spectrum(LumaPlane(8, 8), 1), Error);
  const auto blank = compute_ring_spectrum(LumaPlane(8, 8, 0.0), 4);
  try {
    high_frequency_share(blank, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroTotal);
  }
  const auto s = compute_ring_spectrum(LumaPlane(8, 8, 1.0), 4);
  EXPECT_THROW(high_frequency_share(s, 4), Error);
  EXPECT_THROW(high_frequency_share(s, -1), Error);
}

TEST(RingBars, CsvRows) {
  const auto one = compute_ring_spectrum(synth::noise_plane(8, 8, 1), 3);
  const auto csv = ring_bars_csv({{"a", one}});
  EXPECT_EQ(count_lines(csv), 4);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "label,ring_index,r_min,r_max,energy");

  const auto x = compute_ring_spectrum(synth::noise_plane(16, 16, 2), 10);
  const auto y = compute_ring_spectrum(synth::noise_plane(16, 16, 3), 10);
  const auto two = ring_bars_csv({{"orig", x}, {"f2", y}});
  EXPECT_EQ(count_lines(two), 21);
  std::istringstream in(two);
  std::string line;
  std::getline(in, line);
  int orig = 0, f2 = 0;
  while (std::getline(in, line)) (line.rfind("orig,", 0) == 0 ? orig : f2) += 1;
  EXPECT_EQ(orig, 10);
  EXPECT_EQ(f2, 10);
  EXPECT_THROW(ring_bars_csv({{"a", one}, {"b", x}}), Error);
}

TEST(RingBars, WritesCsvAndSvg) {
  const auto dir = fs::temp_directory_path() / "srqa_test_ring";
  fs::create_directories(dir);
  const auto s = compute_ring_spectrum(synth::noise_plane(16, 16, 2), 10);
  emit_ring_bars({{"<img>", s}}, dir / "bars.csv", dir / "bars.svg");
  EXPECT_TRUE(fs::exists(dir / "bars.csv"));
  const auto svg = read_text_file(dir / "bars.svg");
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("&lt;img&gt;"), std::string::npos);
  EXPECT_THROW(emit_ring_bars({{"a", s}}, "/nonexistent_dir_srqa/bars.csv"), Error);
}
