#pragma once

#include "srqa/error.hpp"
#include "srqa/image.hpp"
#include "srqa/ring_spectrum.hpp"
#include "srqa/text_io.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace srqa {

enum class FocusClass { Sharp, Blurry };

constexpr std::string_view to_string(FocusClass c) noexcept {
  return c == FocusClass::Sharp ? "sharp" : "blurry";
}

struct CalibrationStats {
  double balanced_accuracy = 0.5;
  int n_sharp = 0;
  int n_blurry = 0;
};

/// Single-feature decision block: an image is Sharp when its high-frequency
/// share is at least `threshold`.
struct FocusModel {
  int ring_count = 10;
  int cutoff_ring = 5;
  double threshold = 0.0;
  CalibrationStats calibration_stats;
};

inline double focus_feature(const LumaPlane& plane, int ring_count, int cutoff_ring) {
  return high_frequency_share(compute_ring_spectrum(plane, ring_count), cutoff_ring);
}

namespace detail {

inline double balanced_accuracy_at(const std::vector<double>& sharp,
                                   const std::vector<double>& blurry, double threshold) {
  const auto sharp_hits = std::count_if(sharp.begin(), sharp.end(),
                                        [&](double f) { return f >= threshold; });
  const auto blurry_hits = std::count_if(blurry.begin(), blurry.end(),
                                         [&](double f) { return f < threshold; });
  return 0.5 * (static_cast<double>(sharp_hits) / static_cast<double>(sharp.size()) +
                static_cast<double>(blurry_hits) / static_cast<double>(blurry.size()));
}

} // namespace detail

/// Threshold search over precomputed features. Candidates are the smallest
/// feature (everything Sharp) and every midpoint between consecutive
/// distinct feature values. Best balanced accuracy wins; ties go to the
/// wider gap, then the lower threshold.
inline FocusModel calibrate_features(const std::vector<double>& sharp,
                                     const std::vector<double>& blurry, int ring_count,
                                     int cutoff_ring) {
  if (sharp.empty() || blurry.empty())
    fail(ErrorKind::EmptyClass, "calibration needs at least one sharp and one blurry image");
  if (ring_count < 2 || cutoff_ring < 0 || cutoff_ring >= ring_count)
    fail(ErrorKind::InvalidArgument, "invalid ring count / cutoff ring");

  std::vector<double> all(sharp);
  all.insert(all.end(), blurry.begin(), blurry.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  double best_threshold = all.front();
  double best_accuracy = detail::balanced_accuracy_at(sharp, blurry, best_threshold);
  double best_margin = 0.0;
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    const double t = 0.5 * (all[i] + all[i + 1]);
    const double margin = all[i + 1] - all[i];
    const double acc = detail::balanced_accuracy_at(sharp, blurry, t);
    if (acc > best_accuracy || (acc == best_accuracy && margin > best_margin)) {
      best_accuracy = acc;
      best_threshold = t;
      best_margin = margin;
    }
  }

  FocusModel model;
  model.ring_count = ring_count;
  model.cutoff_ring = cutoff_ring;
  model.threshold = std::clamp(best_threshold, 0.0, 1.0);
  model.calibration_stats = {std::max(best_accuracy, 0.5), static_cast<int>(sharp.size()),
                             static_cast<int>(blurry.size())};
  return model;
}

inline FocusModel calibrate(const std::vector<LumaPlane>& sharp,
                            const std::vector<LumaPlane>& blurry, int ring_count = 10,
                            int cutoff_ring = 5) {
  if (sharp.empty() || blurry.empty())
    fail(ErrorKind::EmptyClass, "calibration needs at least one sharp and one blurry image");
  std::vector<double> fs, fb;
  for (const auto& p : sharp) fs.push_back(focus_feature(p, ring_count, cutoff_ring));
  for (const auto& p : blurry) fb.push_back(focus_feature(p, ring_count, cutoff_ring));
  return calibrate_features(fs, fb, ring_count, cutoff_ring);
}

inline FocusClass classify_feature(double feature, const FocusModel& model) {
  return feature >= model.threshold ? FocusClass::Sharp : FocusClass::Blurry;
}

/// Blank (zero-spectrum) images are routed to Blurry so they still receive
/// enhancement.
inline FocusClass classify(const LumaPlane& plane, const FocusModel& model) {
  const auto spectrum = compute_ring_spectrum(plane, model.ring_count);
  if (!(spectrum.total > 0.0)) {
    log_warning("blank image has zero spectrum; classified as blurry");
    return FocusClass::Blurry;
  }
  return classify_feature(high_frequency_share(spectrum, model.cutoff_ring), model);
}

inline std::string to_text(const FocusModel& model) {
  std::string out;
  out += "ring_count=" + std::to_string(model.ring_count) + "\n";
  out += "cutoff_ring=" + std::to_string(model.cutoff_ring) + "\n";
  out += "threshold=" + format_double(model.threshold) + "\n";
  out += "balanced_accuracy=" + format_double(model.calibration_stats.balanced_accuracy) + "\n";
  out += "n_sharp=" + std::to_string(model.calibration_stats.n_sharp) + "\n";
  out += "n_blurry=" + std::to_string(model.calibration_stats.n_blurry) + "\n";
  return out;
}

inline FocusModel focus_model_from_text(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::SchemaError, "bad model line: '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) fail(ErrorKind::SchemaError, "focus model is missing '" + key + "'");
    return it->second;
  };
  auto get_int = [&](const std::string& key) {
    try {
      return std::stoi(get(key));
    } catch (const std::logic_error&) {
      fail(ErrorKind::SchemaError, "focus model field '" + key + "' is not an integer");
    }
  };
  FocusModel model;
  model.ring_count = get_int("ring_count");
  model.cutoff_ring = get_int("cutoff_ring");
  model.threshold = parse_double(get("threshold"), "threshold");
  model.calibration_stats.balanced_accuracy =
      parse_double(get("balanced_accuracy"), "balanced_accuracy");
  model.calibration_stats.n_sharp = get_int("n_sharp");
  model.calibration_stats.n_blurry = get_int("n_blurry");
  if (model.ring_count < 2 || model.cutoff_ring < 0 || model.cutoff_ring >= model.ring_count)
    fail(ErrorKind::SchemaError, "focus model ring_count/cutoff_ring out of range");
  if (!(model.threshold >= 0.0 && model.threshold <= 1.0))
    fail(ErrorKind::SchemaError, "focus model threshold outside [0,1]");
  return model;
}

inline void save_focus_model(const FocusModel& model, const std::filesystem::path& path) {
  write_text_file(path, to_text(model));
}

inline FocusModel load_focus_model(const std::filesystem::path& path) {
  return focus_model_from_text(read_text_file(path));
}

} // namespace srqa
