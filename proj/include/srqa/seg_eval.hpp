#pragma once

#include "srqa/error.hpp"
#include "srqa/rle.hpp"
#include "srqa/text_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <string>
#include <vector>

namespace srqa {

using ImageId = std::int64_t;
using CategoryId = std::int64_t;

struct InstanceRecord {
  ImageId image_id = 0;
  CategoryId category_id = 0;
  RleMask mask;
  std::size_t area = 0;
};

struct Detection {
  ImageId image_id = 0;
  CategoryId category_id = 0;
  RleMask mask;
  double score = 0.0;
};

inline InstanceRecord make_instance(ImageId image, CategoryId category, RleMask mask) {
  validate_rle(mask);
  const std::size_t area = rle_area(mask);
  if (area == 0)
    fail(ErrorKind::SchemaError,
         "ground-truth instance on image " + std::to_string(image) + " has an empty mask");
  return InstanceRecord{image, category, std::move(mask), area};
}

inline Detection make_detection(ImageId image, CategoryId category, RleMask mask, double score) {
  validate_rle(mask);
  if (!(score >= 0.0 && score <= 1.0))
    fail(ErrorKind::SchemaError, "detection score " + format_double(score) + " outside [0,1]");
  return Detection{image, category, std::move(mask), score};
}

/// IoU thresholds 0.50:0.05:0.95, written as decimal literals so that an IoU
/// exactly equal to a threshold compares as equal.
inline constexpr std::array<double, 10> kIouThresholds = {0.50, 0.55, 0.60, 0.65, 0.70,
                                                          0.75, 0.80, 0.85, 0.90, 0.95};
inline constexpr int kRecallPoints = 101;
inline constexpr int kMaxDetections = 100;
inline constexpr double kOperatingScore = 0.5;

struct CategoryMatch {
  int n_gt = 0;
  int tp = 0;
  int fp = 0;
  int fn = 0;
  double ap = 0.0;
};

struct MatchResult {
  double ap = 0.0; ///< mean over categories that have ground truth
  int tp = 0;
  int fp = 0;
  int fn = 0;
  std::map<CategoryId, CategoryMatch> per_category;
};

namespace detail {

/// One (image, category) evaluation cell with its IoU table cached.
struct EvalCell {
  ImageId image = 0;
  std::vector<std::size_t> gt;  ///< indices into the ground-truth list
  std::vector<std::size_t> det; ///< score-descending, insertion order on ties
  std::vector<double> iou;      ///< det-major, det.size() x gt.size()
};

struct CategoryCells {
  int n_gt = 0;
  std::vector<EvalCell> cells; ///< ascending image id
};

inline std::map<CategoryId, CategoryCells> build_cells(const std::vector<InstanceRecord>& gt,
                                                       const std::vector<Detection>& det) {
  std::map<CategoryId, std::map<ImageId, EvalCell>> grid;
  for (std::size_t i = 0; i < gt.size(); ++i)
    grid[gt[i].category_id][gt[i].image_id].gt.push_back(i);
  for (std::size_t i = 0; i < det.size(); ++i) {
    auto cat = grid.find(det[i].category_id);
    if (cat == grid.end()) continue; // no ground truth for this category
    cat->second[det[i].image_id].det.push_back(i);
  }

  std::map<CategoryId, CategoryCells> out;
  for (auto& [category, images] : grid) {
    CategoryCells& cc = out[category];
    for (auto& [image, cell] : images) {
      cell.image = image;
      cc.n_gt += static_cast<int>(cell.gt.size());
      std::stable_sort(cell.det.begin(), cell.det.end(), [&](std::size_t a, std::size_t b) {
        return det[a].score > det[b].score;
      });
      if (cell.det.size() > static_cast<std::size_t>(kMaxDetections))
        cell.det.resize(kMaxDetections);
      cell.iou.resize(cell.det.size() * cell.gt.size());
      for (std::size_t d = 0; d < cell.det.size(); ++d)
        for (std::size_t g = 0; g < cell.gt.size(); ++g)
          cell.iou[d * cell.gt.size() + g] = mask_iou(det[cell.det[d]].mask, gt[cell.gt[g]].mask);
      cc.cells.push_back(std::move(cell));
    }
  }
  return out;
}

/// Greedy matching in score order. Each detection takes the unmatched
/// ground truth with the highest IoU >= threshold; among equal IoUs the
/// later ground truth wins, as in the reference COCO evaluator.
inline std::vector<bool> match_cell(const EvalCell& cell, double threshold) {
  std::vector<bool> gt_taken(cell.gt.size(), false);
  std::vector<bool> det_tp(cell.det.size(), false);
  for (std::size_t d = 0; d < cell.det.size(); ++d) {
    double best = std::min(threshold, 1.0 - 1e-10);
    std::ptrdiff_t chosen = -1;
    for (std::size_t g = 0; g < cell.gt.size(); ++g) {
      if (gt_taken[g]) continue;
      const double iou = cell.iou[d * cell.gt.size() + g];
      if (iou < best) continue;
      best = iou;
      chosen = static_cast<std::ptrdiff_t>(g);
    }
    if (chosen >= 0) {
      gt_taken[static_cast<std::size_t>(chosen)] = true;
      det_tp[d] = true;
    }
  }
  return det_tp;
}

/// 101-point interpolated AP from score-ordered TP flags.
inline double interpolated_ap(const std::vector<bool>& tp_in_order, int n_gt) {
  const std::size_t n = tp_in_order.size();
  std::vector<double> recall(n), precision(n);
  int tp = 0, fp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    (tp_in_order[i] ? tp : fp) += 1;
    recall[i] = static_cast<double>(tp) / n_gt;
    precision[i] = static_cast<double>(tp) / (tp + fp);
  }
  for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double sum = 0.0;
  for (int r = 0; r < kRecallPoints; ++r) {
    const double level = r / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), level);
    if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / kRecallPoints;
}

inline MatchResult match_categories(const std::map<CategoryId, CategoryCells>& categories,
                                    const std::vector<Detection>& det, double threshold) {
  MatchResult result;
  double ap_sum = 0.0;
  int ap_count = 0;
  for (const auto& [category, cc] : categories) {
    CategoryMatch cm;
    cm.n_gt = cc.n_gt;
    std::vector<std::pair<double, bool>> scored; // image order, then in-cell order
    for (const auto& cell : cc.cells) {
      const auto flags = match_cell(cell, threshold);
      for (std::size_t d = 0; d < cell.det.size(); ++d) {
        scored.emplace_back(det[cell.det[d]].score, flags[d]);
        (flags[d] ? cm.tp : cm.fp) += 1;
      }
    }
    cm.fn = cm.n_gt - cm.tp;
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<bool> flags;
    flags.reserve(scored.size());
    for (const auto& s : scored) flags.push_back(s.second);
    cm.ap = interpolated_ap(flags, cm.n_gt);

    result.tp += cm.tp;
    result.fp += cm.fp;
    result.fn += cm.fn;
    ap_sum += cm.ap;
    ++ap_count;
    result.per_category[category] = cm;
  }
  result.ap = ap_count > 0 ? ap_sum / ap_count : 0.0;
  return result;
}

} // namespace detail

/// COCO-style matching and AP at one IoU threshold. Only categories present
/// in the ground truth are scored; detections of other categories are
/// ignored.
inline MatchResult match_and_ap(const std::vector<InstanceRecord>& gt,
                                const std::vector<Detection>& det, double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0))
    fail(ErrorKind::InvalidArgument, "IoU threshold must lie in (0,1)");
  return detail::match_categories(detail::build_cells(gt, det), det, iou_threshold);
}

struct EvalSummary {
  double segm_mAP = 0.0;
  double ap50 = 0.0;
  double ap75 = 0.0;
  double avg_precision = 0.0; ///< class-macro, IoU 0.50, scores >= 0.5
  double avg_recall = 0.0;    ///< class-macro, IoU 0.50, scores >= 0.5
  std::map<CategoryId, int> per_class_tp; ///< IoU 0.50, all detections
  int tp = 0;
  int fp = 0;
  int fn = 0;
  std::vector<double> ap_per_threshold;

  friend bool operator==(const EvalSummary&, const EvalSummary&) = default;
};

inline EvalSummary evaluate(const std::vector<InstanceRecord>& gt,
                            const std::vector<Detection>& det) {
  if (gt.empty()) fail(ErrorKind::EmptyGroundTruth, "ground truth has no instances");
  const auto cells = detail::build_cells(gt, det);

  EvalSummary summary;
  double total = 0.0;
  for (double t : kIouThresholds) {
    const auto r = detail::match_categories(cells, det, t);
    summary.ap_per_threshold.push_back(r.ap);
    total += r.ap;
    if (t == 0.50) {
      summary.ap50 = r.ap;
      summary.tp = r.tp;
      summary.fp = r.fp;
      summary.fn = r.fn;
      for (const auto& [c, cm] : r.per_category) summary.per_class_tp[c] = cm.tp;
    }
    if (t == 0.75) summary.ap75 = r.ap;
  }
  summary.segm_mAP = total / static_cast<double>(kIouThresholds.size());

  std::vector<Detection> confident;
  for (const auto& d : det)
    if (d.score >= kOperatingScore) confident.push_back(d);
  const auto op = detail::match_categories(detail::build_cells(gt, confident), confident, 0.50);
  double p_sum = 0.0, r_sum = 0.0;
  for (const auto& [c, cm] : op.per_category) {
    p_sum += (cm.tp + cm.fp) > 0 ? static_cast<double>(cm.tp) / (cm.tp + cm.fp) : 0.0;
    r_sum += static_cast<double>(cm.tp) / cm.n_gt;
  }
  const auto n_classes = static_cast<double>(op.per_category.size());
  summary.avg_precision = p_sum / n_classes;
  summary.avg_recall = r_sum / n_classes;
  return summary;
}

/// Relative change in percent, rounded to two decimals.
inline double percent_change(double baseline, double value) {
  if (baseline == 0.0) fail(ErrorKind::ZeroBaseline, "percent change needs a non-zero baseline");
  if (!(baseline > 0.0)) fail(ErrorKind::InvalidArgument, "percent change baseline must be > 0");
  return std::round(10000.0 * (value - baseline) / baseline) / 100.0;
}

/// Pearson correlation of (x, y) points.
inline double metric_correlation(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) fail(ErrorKind::InvalidArgument, "correlation needs >= 2 points");
  const auto n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    syy += (y - my) * (y - my);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0.0 || syy == 0.0)
    fail(ErrorKind::DegenerateVariance, "correlation input has zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// COCO JSON interchange

struct ImageInfo {
  ImageId id = 0;
  int width = 0;
  int height = 0;
  std::string file_name;
};

struct GroundTruthSet {
  std::map<ImageId, ImageInfo> images;
  std::map<CategoryId, std::string> categories;
  std::vector<InstanceRecord> instances;
};

namespace detail {

inline RleMask parse_segmentation(const nlohmann::json& seg, const ImageInfo& image) {
  if (seg.is_array()) {
    std::vector<std::vector<double>> polygons;
    for (const auto& poly : seg) polygons.push_back(poly.get<std::vector<double>>());
    return rle_from_polygons(polygons, image.height, image.width);
  }
  if (!seg.is_object() || !seg.contains("counts") || !seg.contains("size"))
    fail(ErrorKind::SchemaError, "segmentation must be a polygon list or {size, counts}");
  const auto size = seg.at("size").get<std::vector<int>>();
  if (size.size() != 2) fail(ErrorKind::SchemaError, "RLE size must be [height, width]");
  RleMask mask{size[0], size[1], {}};
  const auto& counts = seg.at("counts");
  if (counts.is_string()) {
    mask.counts = rle_counts_from_string(counts.get<std::string>());
  } else {
    mask.counts = counts.get<std::vector<std::uint32_t>>();
  }
  if (mask.height != image.height || mask.width != image.width)
    fail(ErrorKind::GridMismatch, "mask grid " + std::to_string(mask.height) + "x" +
                                      std::to_string(mask.width) + " does not match image " +
                                      std::to_string(image.id));
  validate_rle(mask);
  return mask;
}

inline const ImageInfo& lookup_image(const GroundTruthSet& gt, ImageId id) {
  auto it = gt.images.find(id);
  if (it == gt.images.end())
    fail(ErrorKind::SchemaError, "image id " + std::to_string(id) + " is not in the registry");
  return it->second;
}

} // namespace detail

inline GroundTruthSet ground_truth_from_json(const nlohmann::json& doc) {
  GroundTruthSet gt;
  try {
    for (const auto& img : doc.at("images")) {
      ImageInfo info{img.at("id").get<ImageId>(), img.at("width").get<int>(),
                     img.at("height").get<int>(), img.value("file_name", std::string{})};
      if (info.width <= 0 || info.height <= 0)
        fail(ErrorKind::SchemaError, "image " + std::to_string(info.id) + " has bad dimensions");
      gt.images[info.id] = info;
    }
    if (doc.contains("categories"))
      for (const auto& cat : doc.at("categories"))
        gt.categories[cat.at("id").get<CategoryId>()] = cat.value("name", std::string{});
    for (const auto& ann : doc.at("annotations")) {
      const auto& image = detail::lookup_image(gt, ann.at("image_id").get<ImageId>());
      gt.instances.push_back(make_instance(image.id, ann.at("category_id").get<CategoryId>(),
                                           detail::parse_segmentation(ann.at("segmentation"),
                                                                      image)));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::SchemaError, std::string("ground-truth JSON: ") + e.what());
  }
  return gt;
}

inline std::vector<Detection> detections_from_json(const nlohmann::json& doc,
                                                   const GroundTruthSet& gt) {
  std::vector<Detection> out;
  try {
    if (!doc.is_array()) fail(ErrorKind::SchemaError, "detections must be a JSON array");
    for (const auto& d : doc) {
      const auto& image = detail::lookup_image(gt, d.at("image_id").get<ImageId>());
      out.push_back(make_detection(image.id, d.at("category_id").get<CategoryId>(),
                                   detail::parse_segmentation(d.at("segmentation"), image),
                                   d.at("score").get<double>()));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::SchemaError, std::string("detections JSON: ") + e.what());
  }
  return out;
}

inline nlohmann::json parse_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::SchemaError, "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

inline GroundTruthSet load_ground_truth(const std::filesystem::path& path) {
  return ground_truth_from_json(parse_json_file(path));
}

inline std::vector<Detection> load_detections(const std::filesystem::path& path,
                                              const GroundTruthSet& gt) {
  return detections_from_json(parse_json_file(path), gt);
}

inline nlohmann::json rle_to_json(const RleMask& m) {
  return {{"size", {m.height, m.width}}, {"counts", m.counts}};
}

inline nlohmann::json to_json(const EvalSummary& s) {
  nlohmann::json tp = nlohmann::json::object();
  for (const auto& [c, n] : s.per_class_tp) tp[std::to_string(c)] = n;
  return {{"segm_mAP", s.segm_mAP},
          {"segm_mAP_50", s.ap50},
          {"segm_mAP_75", s.ap75},
          {"avg_precision", s.avg_precision},
          {"avg_recall", s.avg_recall},
          {"per_class_tp", tp},
          {"tp", s.tp},
          {"fp", s.fp},
          {"fn", s.fn},
          {"ap_per_threshold", s.ap_per_threshold}};
}

inline EvalSummary eval_summary_from_json(const nlohmann::json& j) {
  EvalSummary s;
  try {
    s.segm_mAP = j.at("segm_mAP").get<double>();
    s.ap50 = j.at("segm_mAP_50").get<double>();
    s.ap75 = j.at("segm_mAP_75").get<double>();
    s.avg_precision = j.at("avg_precision").get<double>();
    s.avg_recall = j.at("avg_recall").get<double>();
    for (const auto& [k, v] : j.at("per_class_tp").items())
      s.per_class_tp[std::stoll(k)] = v.get<int>();
    s.tp = j.at("tp").get<int>();
    s.fp = j.at("fp").get<int>();
    s.fn = j.at("fn").get<int>();
    s.ap_per_threshold = j.at("ap_per_threshold").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::SchemaError, std::string("evaluation summary JSON: ") + e.what());
  }
  return s;
}

inline std::string summary_csv(const EvalSummary& s) {
  return "segm_mAP,segm_mAP_50,segm_mAP_75,avg_precision,avg_recall\n" +
         format_fixed(s.segm_mAP, 4) + "," + format_fixed(s.ap50, 4) + "," +
         format_fixed(s.ap75, 4) + "," + format_fixed(s.avg_precision, 4) + "," +
         format_fixed(s.avg_recall, 4) + "\n";
}

} // namespace srqa
