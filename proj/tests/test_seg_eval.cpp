#include "oracles.hpp"

#include "srqa/rle.hpp"
#include "srqa/seg_eval.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <random>

namespace fs = std::filesystem;
using namespace srqa;
using oracle::rect_mask;

namespace {

const fs::path kData = SRQA_TEST_DATA;

void expect_kind(ErrorKind kind, auto&& fn) {
  try {
    fn();
    ADD_FAILURE() << "no error raised";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

std::vector<std::uint8_t> random_bits(std::mt19937& rng, int h, int w, unsigned density) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(h) * w);
  for (auto& b : bits) b = (rng() % 100) < density ? 1 : 0;
  return bits;
}

} // namespace

TEST(Rle, EncodeDecodeRoundTrip) {
  std::mt19937 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const int h = 1 + rng() % 20, w = 1 + rng() % 20;
    const auto bits = random_bits(rng, h, w, rng() % 101);
    const auto m = rle_encode(bits, h, w);
    EXPECT_EQ(rle_decode(m), bits);
    EXPECT_EQ(rle_area(m), static_cast<std::size_t>(std::count(bits.begin(), bits.end(), 1)));
  }
}

TEST(Rle, ColumnMajorCounts) {
  // 2x2 grid with only (x=1, y=0) set: column-major order is (0,0),(0,1),(1,0),(1,1)
  const auto m = rle_encode({0, 1, 0, 0}, 2, 2);
  EXPECT_EQ(m.counts, (std::vector<std::uint32_t>{2, 1, 1}));
  const auto starts_set = rle_encode({1, 1, 1, 1}, 2, 2);
  EXPECT_EQ(starts_set.counts, (std::vector<std::uint32_t>{0, 4}));
}

TEST(Rle, CompressedStringsMatchReferenceEncoder) {
  // strings produced by pycocotools.mask.encode
  EXPECT_EQ(rle_counts_to_string(rect_mask(0, 0, 3, 3).counts), "04400000P1");
  std::vector<std::uint8_t> bits(64 * 64, 0);
  for (int y = 6; y < 20; ++y)
    for (int x = 4; x < 16; ++x) bits[y * 64 + x] = 1;
  for (int x = 40; x < 60; ++x) bits[30 * 64 + x] = 1;
  const auto m = rle_encode(bits, 64, 64);
  const std::string reference =
      "V8>b1000000000000000000000h`1Ce_N0000000000000000000000000000000000000R7";
  EXPECT_EQ(rle_counts_to_string(m.counts), reference);
  EXPECT_EQ(rle_counts_from_string(reference), m.counts);
}

TEST(Rle, CompressedStringRoundTrip) {
  std::mt19937 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::uint32_t> counts(rng() % 30);
    for (auto& c : counts) c = (rng() % 4 == 0) ? rng() % 100000 : rng() % 40;
    EXPECT_EQ(rle_counts_from_string(rle_counts_to_string(counts)), counts);
  }
}

TEST(Rle, ValidationAndPolygons) {
  EXPECT_THROW(validate_rle(RleMask{4, 4, {3, 4}}), Error);
  EXPECT_THROW(rle_from_polygons({{0, 0, 1, 1}}, 4, 4), Error);
  const auto rect = rle_from_polygons({{2, 1, 6, 1, 6, 4, 2, 4}}, 8, 8);
  const auto bits = rle_decode(rect);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x)
      EXPECT_EQ(bits[y * 8 + x], (x >= 2 && x < 6 && y >= 1 && y < 4) ? 1 : 0) << x << "," << y;
}

TEST(Rle, PolygonAreaNearGeometricArea) {
  const std::vector<double> quad = {10, 5, 20, 5, 22, 15, 8, 16};
  double twice = 0.0, perimeter = 0.0;
  for (std::size_t i = 0, j = 3; i < 4; j = i++) {
    twice += quad[2 * j] * quad[2 * i + 1] - quad[2 * i] * quad[2 * j + 1];
    perimeter += std::hypot(quad[2 * i] - quad[2 * j], quad[2 * i + 1] - quad[2 * j + 1]);
  }
  const double area = std::abs(twice) / 2.0;
  const auto m = rle_from_polygons({quad}, 32, 32);
  EXPECT_LE(std::abs(static_cast<double>(rle_area(m)) - area), perimeter / 2.0);
}

TEST(MaskIou, Examples) {
  const auto a = rect_mask(0, 0, 3, 3), b = rect_mask(2, 2, 5, 5);
  EXPECT_DOUBLE_EQ(mask_iou(a, b), 4.0 / 28.0);
  EXPECT_EQ(mask_iou(a, a), 1.0);
  EXPECT_EQ(mask_iou(rect_mask(0, 0, 1, 1), rect_mask(5, 5, 6, 6)), 0.0);
  expect_kind(ErrorKind::GridMismatch, [&] { mask_iou(a, rect_mask(0, 0, 1, 1, 9)); });
  const RleMask empty{8, 8, {64}};
  expect_kind(ErrorKind::BothEmpty, [&] { mask_iou(empty, empty); });
}

TEST(MaskIou, SymmetricAndMatchesDenseOracle) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const int h = 1 + rng() % 12, w = 1 + rng() % 12;
    auto ba = random_bits(rng, h, w, 40), bb = random_bits(rng, h, w, 40);
    ba[0] = 1;
    const auto a = rle_encode(ba, h, w), b = rle_encode(bb, h, w);
    EXPECT_EQ(mask_iou(a, b), mask_iou(b, a));
    EXPECT_DOUBLE_EQ(mask_iou(a, b), oracle::dense_iou(a, b));
  }
}

TEST(MaskIou, GrowsWhenSharedPixelsAdded) {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    auto ba = random_bits(rng, 8, 8, 30), bb = random_bits(rng, 8, 8, 30);
    ba[0] = 1;
    const double before = mask_iou(rle_encode(ba, 8, 8), rle_encode(bb, 8, 8));
    const int extra = rng() % 64;
    ba[extra] = bb[extra] = 1;
    EXPECT_GE(mask_iou(rle_encode(ba, 8, 8), rle_encode(bb, 8, 8)), before);
  }
}

TEST(MatchAndAp, SinglePairAcrossThresholds) {
  // GT covers 10 pixels, the detection 6 of them: IoU 0.6
  const std::vector gt = {make_instance(1, 1, rect_mask(0, 0, 4, 1))};
  const std::vector det = {make_detection(1, 1, rect_mask(0, 0, 2, 1), 0.9)};
  const auto at50 = match_and_ap(gt, det, 0.5);
  EXPECT_EQ(at50.ap, 1.0);
  EXPECT_EQ(at50.tp, 1);
  EXPECT_EQ(at50.fp, 0);
  EXPECT_EQ(at50.fn, 0);
  const auto at75 = match_and_ap(gt, det, 0.75);
  EXPECT_EQ(at75.ap, 0.0);
  EXPECT_EQ(at75.tp, 0);
  EXPECT_EQ(at75.fn, 1);
  EXPECT_THROW(match_and_ap(gt, det, 1.0), Error);
}

TEST(MatchAndAp, HalfRecallGives51Of101) {
  const std::vector gt = {make_instance(1, 1, rect_mask(0, 0, 4, 1)),
                          make_instance(1, 1, rect_mask(0, 5, 7, 7))};
  // 8 of the first GT's 10 pixels: IoU 0.8
  const std::vector det = {make_detection(1, 1, rect_mask(0, 0, 3, 1), 0.9),
                           make_detection(1, 1, rect_mask(6, 0, 7, 2), 0.8)};
  EXPECT_DOUBLE_EQ(mask_iou(det[0].mask, gt[0].mask), 0.8);
  const auto r = match_and_ap(gt, det, 0.5);
  EXPECT_DOUBLE_EQ(r.ap, 51.0 / 101.0);
  EXPECT_EQ(r.tp, 1);
  EXPECT_EQ(r.fp, 1);
  EXPECT_EQ(r.fn, 1);
  EXPECT_DOUBLE_EQ(oracle::prefix_enumeration_ap({true, false}, 2), 51.0 / 101.0);
}

TEST(MatchAndAp, HigherScoreClaimsGtFirst) {
  const std::vector gt = {make_instance(1, 1, rect_mask(0, 0, 3, 3))};
  const std::vector det = {make_detection(1, 1, rect_mask(0, 0, 3, 2), 0.4),
                           make_detection(1, 1, rect_mask(0, 0, 3, 3), 0.6)};
  const auto r = match_and_ap(gt, det, 0.5);
  EXPECT_EQ(r.tp, 1);
  EXPECT_EQ(r.fp, 1);
  EXPECT_EQ(r.ap, 1.0);
}

TEST(Evaluate, PerfectDetections) {
  std::vector<InstanceRecord> gt;
  std::vector<Detection> det;
  for (int i = 0; i < 3; ++i) {
    gt.push_back(make_instance(1 + i % 2, 1 + i % 2, rect_mask(i, i, i + 3, i + 2)));
    det.push_back(make_detection(1 + i % 2, 1 + i % 2, rect_mask(i, i, i + 3, i + 2), 1.0));
  }
  const auto s = evaluate(gt, det);
  EXPECT_EQ(s.segm_mAP, 1.0);
  EXPECT_EQ(s.ap50, 1.0);
  EXPECT_EQ(s.ap75, 1.0);
  EXPECT_EQ(s.avg_recall, 1.0);
  EXPECT_EQ(s.avg_precision, 1.0);
  EXPECT_EQ(s.tp, 3);
  EXPECT_EQ(s.fn, 0);
  EXPECT_EQ(s.per_class_tp.at(1), 2);
  EXPECT_EQ(s.per_class_tp.at(2), 1);
}

TEST(Evaluate, NoDetections) {
  const std::vector gt = {make_instance(1, 1, rect_mask(0, 0, 2, 2)),
                          make_instance(2, 2, rect_mask(1, 1, 4, 4))};
  const auto s = evaluate(gt, {});
  EXPECT_EQ(s.segm_mAP, 0.0);
  EXPECT_EQ(s.ap50, 0.0);
  EXPECT_EQ(s.avg_precision, 0.0);
  EXPECT_EQ(s.avg_recall, 0.0);
  EXPECT_EQ(s.tp, 0);
  EXPECT_EQ(s.fp, 0);
  EXPECT_EQ(s.fn, 2);
  expect_kind(ErrorKind::EmptyGroundTruth, [] { evaluate({}, {}); });
}

TEST(Evaluate, MatchesOracleOnMicroCases) {
  for (std::uint64_t seed = 1000; seed < 1100; ++seed) {
    const auto c = oracle::micro_case(seed);
    const auto expected = oracle::as_summary(oracle::evaluate(c.gt, c.det));
    const auto actual = evaluate(c.gt, c.det);
    EXPECT_EQ(actual, expected) << "seed " << seed;
  }
}

TEST(Evaluate, BoundsAndOrdering) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto c = oracle::micro_case(seed);
    const auto s = evaluate(c.gt, c.det);
    EXPECT_LE(s.segm_mAP, s.ap50 + 1e-15);
    for (double ap : s.ap_per_threshold) {
      EXPECT_GE(ap, 0.0);
      EXPECT_LE(ap, 1.0);
    }
    EXPECT_GE(s.avg_precision, 0.0);
    EXPECT_LE(s.avg_recall, 1.0);
  }
}

TEST(Evaluate, ApDependsOnlyOnScoreRanking) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto c = oracle::micro_case(seed);
    const auto base = evaluate(c.gt, c.det);
    for (auto& d : c.det) d.score = d.score * d.score * 0.5;
    const auto rescaled = evaluate(c.gt, c.det);
    EXPECT_EQ(rescaled.ap_per_threshold, base.ap_per_threshold) << seed;
    EXPECT_EQ(rescaled.per_class_tp, base.per_class_tp);
  }
}

TEST(Evaluate, IndependentOfInputOrderWithDistinctScores) {
  std::mt19937 rng(12);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto c = oracle::micro_case(seed);
    for (std::size_t i = 0; i < c.det.size(); ++i) c.det[i].score = 0.05 + 0.13 * static_cast<double>(i);
    const auto base = evaluate(c.gt, c.det);
    std::shuffle(c.det.begin(), c.det.end(), rng);
    std::shuffle(c.gt.begin(), c.gt.end(), rng);
    EXPECT_EQ(evaluate(c.gt, c.det), base) << seed;
  }
}

TEST(Evaluate, DeterministicWithTies) {
  const auto c = oracle::micro_case(77);
  EXPECT_EQ(evaluate(c.gt, c.det), evaluate(c.gt, c.det));
}

TEST(PercentChange, WorkedExamples) {
  EXPECT_EQ(percent_change(0.226, 0.279), 23.45);
  EXPECT_EQ(percent_change(0.156, 0.255), 63.46);
  EXPECT_EQ(percent_change(0.5, 0.5), 0.0);
  EXPECT_LT(percent_change(0.226, 0.198), 0.0);
  expect_kind(ErrorKind::ZeroBaseline, [] { percent_change(0.0, 0.3); });
}

TEST(PercentChange, RoundTripsWithinReportingPrecision) {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double b = u(rng), v = u(rng);
    const double p = percent_change(b, v);
    EXPECT_LE(std::abs(b * (1.0 + p / 100.0) - v), 0.005 * b / 100.0 + 1e-15);
  }
}

TEST(Correlation, Examples) {
  EXPECT_DOUBLE_EQ(metric_correlation({{0, 1}, {1, 3}, {2, 5}}), 1.0);
  EXPECT_DOUBLE_EQ(metric_correlation({{0, 1}, {1, -1}, {2, -3}}), -1.0);
  EXPECT_EQ(metric_correlation({{0.3, 20}, {0.1, 25}}), -1.0);
  expect_kind(ErrorKind::DegenerateVariance, [] { metric_correlation({{1, 2}, {1, 3}}); });
  EXPECT_THROW(metric_correlation({{1, 2}}), Error);
}

TEST(Correlation, BicubicFactorRows) {
  const std::vector<std::pair<double, double>> rows = {
      {0.392, 34.98}, {0.276, 32.62}, {0.195, 32.19}, {0.113, 31.68}};
  // raw-moment form, independent of the library's centred sums
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (auto [x, y] : rows) {
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  const double n = 4;
  const double r = (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
  EXPECT_NEAR(metric_correlation(rows), r, 1e-9);
  EXPECT_GT(metric_correlation(rows), 0.8);
}

TEST(CocoJson, LoadsFixtureAndMatchesFrozenSummary) {
  const auto gt = load_ground_truth(kData / "micro_gt.json");
  const auto det = load_detections(kData / "micro_det.json", gt);
  EXPECT_EQ(gt.categories.size(), 2u);
  const auto expected = eval_summary_from_json(parse_json_file(kData / "micro_expected.json"));
  EXPECT_EQ(evaluate(gt.instances, det), expected);
  EXPECT_EQ(eval_summary_from_json(to_json(expected)), expected);
}

TEST(CocoJson, PolygonAnnotationsAndErrors) {
  const auto gt = load_ground_truth(kData / "pipeline" / "gt.json");
  const auto polygons = std::count_if(gt.instances.begin(), gt.instances.end(),
                                      [](const InstanceRecord& g) { return g.category_id == 2; });
  EXPECT_EQ(polygons, 3);

  const nlohmann::json base = nlohmann::json::parse(R"({
    "images": [{"id": 1, "width": 4, "height": 4}],
    "annotations": [{"id": 1, "image_id": 1, "category_id": 1,
                     "segmentation": {"size": [4, 4], "counts": [5, 2, 9]}}]})");
  EXPECT_EQ(ground_truth_from_json(base).instances.front().area, 2u);

  auto wrong_grid = base;
  wrong_grid["annotations"][0]["segmentation"]["size"] = {4, 5};
  wrong_grid["annotations"][0]["segmentation"]["counts"] = {5, 2, 13};
  expect_kind(ErrorKind::GridMismatch, [&] { ground_truth_from_json(wrong_grid); });
  auto unknown_image = base;
  unknown_image["annotations"][0]["image_id"] = 7;
  expect_kind(ErrorKind::SchemaError, [&] { ground_truth_from_json(unknown_image); });
  auto missing = base;
  missing.erase("images");
  expect_kind(ErrorKind::SchemaError, [&] { ground_truth_from_json(missing); });

  const auto set = ground_truth_from_json(base);
  const auto bad_score = nlohmann::json::parse(
      R"([{"image_id": 1, "category_id": 1, "score": 1.5, "segmentation": {"size": [4, 4], "counts": [16]}}])");
  expect_kind(ErrorKind::SchemaError, [&] { detections_from_json(bad_score, set); });
  expect_kind(ErrorKind::SchemaError, [&] { detections_from_json(nlohmann::json::object(), set); });
}

TEST(CocoJson, SummaryCsv) {
  EvalSummary s;
  s.segm_mAP = 0.12346;
  s.ap50 = 0.5;
  EXPECT_EQ(summary_csv(s), "segm_mAP,segm_mAP_50,segm_mAP_75,avg_precision,avg_recall\n"
                            "0.1235,0.5000,0.0000,0.0000,0.0000\n");
}
