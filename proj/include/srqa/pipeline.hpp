#pragma once

#include "srqa/error.hpp"
#include "srqa/focus.hpp"
#include "srqa/image.hpp"
#include "srqa/manifest.hpp"
#include "srqa/parallel.hpp"
#include "srqa/png_io.hpp"
#include "srqa/quality.hpp"
#include "srqa/resample.hpp"
#include "srqa/seg_eval.hpp"
#include "srqa/subprocess.hpp"
#include "srqa/text_io.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace srqa {

enum class Ordering { None, SrFirst, SubsampleFirst };

constexpr std::string_view to_string(Ordering o) noexcept {
  switch (o) {
    case Ordering::None: return "none";
    case Ordering::SrFirst: return "sr_first";
    case Ordering::SubsampleFirst: return "subsample_first";
  }
  return "unknown";
}

inline Ordering parse_ordering(std::string_view s) {
  if (s == "none") return Ordering::None;
  if (s == "sr_first") return Ordering::SrFirst;
  if (s == "subsample_first") return Ordering::SubsampleFirst;
  fail(ErrorKind::SchemaError, "unknown ordering '" + std::string(s) +
                                   "' (expected none, sr_first or subsample_first)");
}

/// Command templates must contain `{input}` and `{output}` exactly once each.
inline void validate_command_template(std::string_view tmpl) {
  for (std::string_view key : {std::string_view("{input}"), std::string_view("{output}")}) {
    std::size_t count = 0;
    for (auto pos = tmpl.find(key); pos != std::string_view::npos; pos = tmpl.find(key, pos + 1))
      ++count;
    if (count != 1)
      fail(ErrorKind::InvalidTemplate, "SR command template must contain " + std::string(key) +
                                           " exactly once, found " + std::to_string(count));
  }
}

inline std::string expand_command_template(std::string tmpl, const std::filesystem::path& input,
                                           const std::filesystem::path& output) {
  validate_command_template(tmpl);
  tmpl.replace(tmpl.find("{input}"), 7, shell_quote(input.string()));
  tmpl.replace(tmpl.find("{output}"), 8, shell_quote(output.string()));
  return tmpl;
}

/// Runs an external super-resolution tool on one PNG and returns its decoded
/// output. The output must be `scale` times the input, or the input size for
/// tools that resize back themselves.
inline RasterImage run_external_sr(const std::string& command_template,
                                   const std::filesystem::path& input_path,
                                   const std::filesystem::path& output_path,
                                   std::chrono::seconds timeout, ScaleFactor scale) {
  if (!std::filesystem::exists(input_path))
    fail(ErrorKind::FileNotFound, "SR input not found: '" + input_path.string() + "'");
  const auto in = read_png_header(input_path);
  std::error_code ec;
  std::filesystem::remove(output_path, ec);

  const auto result = run_shell(expand_command_template(command_template, input_path, output_path),
                                std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
  if (result.timed_out)
    fail(ErrorKind::Timeout,
         "SR command exceeded " + std::to_string(timeout.count()) + " s on '" +
             input_path.string() + "'");
  if (result.exit_code != 0)
    fail(ErrorKind::NonZeroExit, "SR command exited with code " +
                                     std::to_string(result.exit_code) + "; stderr: " +
                                     result.stderr_text);
  if (!std::filesystem::exists(output_path))
    fail(ErrorKind::MissingOutput, "SR command produced no file at '" + output_path.string() + "'");

  RasterImage out = load_image(output_path);
  const int ew = in.width * scale.value(), eh = in.height * scale.value();
  const bool scaled = out.width() == ew && out.height() == eh;
  const bool same = out.width() == in.width && out.height() == in.height;
  if (!scaled && !same)
    fail(ErrorKind::BadOutputDims,
         "SR output is " + std::to_string(out.width()) + "x" + std::to_string(out.height()) +
             ", expected " + std::to_string(ew) + "x" + std::to_string(eh) + " (or " +
             std::to_string(in.width) + "x" + std::to_string(in.height) + ")");
  return out;
}

/// Upscaling backend. The pipeline never depends on how SR is done.
class SuperResolver {
public:
  virtual ~SuperResolver() = default;
  virtual ScaleFactor scale() const = 0;
  /// `scratch_stem` names a per-job prefix for any temporary files.
  virtual RasterImage upscale(const RasterImage& input,
                              const std::filesystem::path& scratch_stem) const = 0;
};

class ExternalSuperResolver final : public SuperResolver {
public:
  ExternalSuperResolver(std::string command_template, ScaleFactor scale,
                        std::chrono::seconds timeout)
      : template_(std::move(command_template)), scale_(scale), timeout_(timeout) {
    validate_command_template(template_);
  }

  ScaleFactor scale() const override { return scale_; }

  RasterImage upscale(const RasterImage& input,
                      const std::filesystem::path& scratch_stem) const override {
    const auto in_path = std::filesystem::path(scratch_stem.string() + ".sr_in.png");
    const auto out_path = std::filesystem::path(scratch_stem.string() + ".sr_out.png");
    save_image(input, in_path);
    return run_external_sr(template_, in_path, out_path, timeout_, scale_);
  }

private:
  std::string template_;
  ScaleFactor scale_;
  std::chrono::seconds timeout_;
};

/// Classical interpolation standing in for a learned model.
class InterpolatingSuperResolver final : public SuperResolver {
public:
  InterpolatingSuperResolver(ScaleFactor scale, KernelKind kernel = KernelKind::Bicubic)
      : scale_(scale), kernel_(kernel) {}

  ScaleFactor scale() const override { return scale_; }

  RasterImage upscale(const RasterImage& input, const std::filesystem::path&) const override {
    return resize(input, input.width() * scale_.value(), input.height() * scale_.value(), kernel_);
  }

private:
  ScaleFactor scale_;
  KernelKind kernel_;
};

namespace detail {

inline RasterImage fit_to(const RasterImage& img, int w, int h, KernelKind kernel) {
  if (img.width() == w && img.height() == h) return img;
  return resize(img, w, h, kernel);
}

} // namespace detail

/// Applies SR under the given ordering and returns an image of target size.
///  - None / SrFirst: upscale, then resize to the target.
///  - SubsampleFirst: decimate by the SR scale, upscale, then fit the target.
inline RasterImage apply_sr(const RasterImage& input, const SuperResolver& sr, Ordering ordering,
                            int target_w, int target_h, const std::filesystem::path& scratch_stem,
                            KernelKind down_kernel = KernelKind::Bicubic) {
  if (ordering == Ordering::SubsampleFirst) {
    const RasterImage small = decimate(input, sr.scale());
    return detail::fit_to(sr.upscale(small, scratch_stem), target_w, target_h, down_kernel);
  }
  return detail::fit_to(sr.upscale(input, scratch_stem), target_w, target_h, down_kernel);
}

struct OrderingRecord {
  std::size_t index = 0;
  QualityScores sr_first;
  QualityScores subsample_first;
};

struct OrderingResult {
  std::vector<RasterImage> sr_first_images;
  std::vector<RasterImage> subsample_first_images;
  std::vector<OrderingRecord> records;
  double mean_psnr_sr_first = 0.0;
  double mean_psnr_subsample_first = 0.0;
};

/// Runs both orderings on every LQ image and scores each result against its
/// HQ counterpart. Outputs have the HQ size.
inline OrderingResult ordering_experiment(const std::vector<RasterImage>& hq_images,
                                          const std::vector<RasterImage>& lq_images,
                                          const SuperResolver& sr,
                                          const std::filesystem::path& scratch_dir,
                                          int workers = 1) {
  if (hq_images.size() != lq_images.size())
    fail(ErrorKind::InvalidArgument, "HQ and LQ image lists differ in length");
  if (hq_images.empty()) fail(ErrorKind::EmptyInput, "ordering experiment needs images");
  const std::size_t n = hq_images.size();
  std::vector<std::optional<RasterImage>> a(n), b(n);
  std::vector<OrderingRecord> records(n);
  parallel_for(n, workers, [&](std::size_t i) {
    const auto& hq = hq_images[i];
    const auto stem = scratch_dir / ("ordering_" + std::to_string(i));
    a[i] = apply_sr(lq_images[i], sr, Ordering::SrFirst, hq.width(), hq.height(),
                    stem.string() + "_srfirst");
    b[i] = apply_sr(lq_images[i], sr, Ordering::SubsampleFirst, hq.width(), hq.height(),
                    stem.string() + "_subfirst");
    records[i] = {i, compare_pair(hq, *a[i]), compare_pair(hq, *b[i])};
  });
  OrderingResult result;
  for (std::size_t i = 0; i < n; ++i) {
    result.sr_first_images.push_back(std::move(*a[i]));
    result.subsample_first_images.push_back(std::move(*b[i]));
    result.mean_psnr_sr_first += records[i].sr_first.psnr / static_cast<double>(n);
    result.mean_psnr_subsample_first += records[i].subsample_first.psnr / static_cast<double>(n);
  }
  result.records = std::move(records);
  return result;
}

// ---------------------------------------------------------------------------
// End-to-end run

struct VariantSpec {
  std::string name;
  std::filesystem::path detections;
};

struct PipelineConfig {
  std::string sr_command;
  int sr_scale = 2;
  Ordering ordering = Ordering::None;
  std::optional<std::filesystem::path> focus_model_path;
  int workers = 1;
  int timeout_seconds = 300;
  /// Annotation grid the SR output must land on; defaults to the HQ size.
  std::optional<std::pair<int, int>> target_size;
  KernelKind down_kernel = KernelKind::Bicubic;
  std::filesystem::path work_dir = "pipeline_work";

  std::optional<std::filesystem::path> manifest_path;
  std::optional<std::filesystem::path> gt_path;
  std::optional<std::filesystem::path> lpips_path;
  std::vector<VariantSpec> variants;
  std::string baseline_variant;

  void validate() const {
    if (!sr_command.empty()) validate_command_template(sr_command);
    if (sr_scale < 1) fail(ErrorKind::SchemaError, "sr_scale must be >= 1");
    if (workers < 1) fail(ErrorKind::SchemaError, "workers must be >= 1");
    if (timeout_seconds < 1) fail(ErrorKind::SchemaError, "timeout_seconds must be >= 1");
    if (target_size && (target_size->first <= 0 || target_size->second <= 0))
      fail(ErrorKind::SchemaError, "target size must be positive");
    if (!variants.empty()) {
      bool found = false;
      for (const auto& v : variants) found = found || v.name == baseline_variant;
      if (!found)
        fail(ErrorKind::SchemaError, "baseline_variant '" + baseline_variant +
                                         "' does not name a variant");
    }
  }
};

/// Reads the config JSON. Relative paths resolve against the config file's
/// directory.
inline PipelineConfig pipeline_config_from_json(const nlohmann::json& doc,
                                                const std::filesystem::path& base_dir) {
  PipelineConfig c;
  auto resolve = [&](const std::string& s) {
    std::filesystem::path p(s);
    return p.is_absolute() ? p : base_dir / p;
  };
  try {
    c.sr_command = doc.value("sr_command", std::string{});
    c.sr_scale = doc.value("sr_scale", 2);
    c.ordering = parse_ordering(doc.value("ordering", std::string("none")));
    if (doc.contains("focus_model")) c.focus_model_path = resolve(doc.at("focus_model").get<std::string>());
    c.workers = doc.value("workers", 1);
    c.timeout_seconds = doc.value("timeout_seconds", 300);
    if (doc.contains("target_width") || doc.contains("target_height"))
      c.target_size = std::pair{doc.at("target_width").get<int>(),
                                doc.at("target_height").get<int>()};
    if (doc.contains("down_kernel")) {
      auto k = parse_kernel(doc.at("down_kernel").get<std::string>());
      if (!k) fail(ErrorKind::SchemaError, "unknown down_kernel");
      c.down_kernel = *k;
    }
    c.work_dir = resolve(doc.value("work_dir", std::string("pipeline_work")));
    if (doc.contains("manifest")) c.manifest_path = resolve(doc.at("manifest").get<std::string>());
    if (doc.contains("gt")) c.gt_path = resolve(doc.at("gt").get<std::string>());
    if (doc.contains("lpips")) c.lpips_path = resolve(doc.at("lpips").get<std::string>());
    if (doc.contains("variants"))
      for (const auto& v : doc.at("variants"))
        c.variants.push_back({v.at("name").get<std::string>(),
                              resolve(v.at("detections").get<std::string>())});
    c.baseline_variant =
        doc.value("baseline_variant", c.variants.empty() ? std::string{} : c.variants[0].name);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::SchemaError, std::string("pipeline config: ") + e.what());
  }
  c.validate();
  return c;
}

inline PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  return pipeline_config_from_json(parse_json_file(path), path.parent_path());
}

struct ImageRecord {
  std::string image_id;
  bool routed_to_sr = false;
  std::optional<FocusClass> focus;
  std::optional<QualityScores> input_quality; ///< LQ vs HQ
  std::optional<QualityScores> quality;       ///< pipeline output vs HQ
  std::filesystem::path output_path;
  std::optional<std::string> error;
  std::map<std::string, double> timings_ms; ///< not part of the canonical report
};

struct StageCounts {
  int succeeded = 0;
  int failed = 0;
  int total() const { return succeeded + failed; }
};

struct VariantResult {
  std::string name;
  std::optional<EvalSummary> summary;
  std::optional<std::string> error;
};

struct RunReport {
  std::vector<ImageRecord> records;
  std::vector<VariantResult> variants;
  std::string baseline_variant;
  std::map<std::string, StageCounts> stages;
};

/// One row of the variant comparison table. Percent changes are always
/// derived from the mAP values at output time.
struct VariantRow {
  std::string variant;
  std::optional<double> map50;
  std::optional<double> map75;
};

struct VariantTableRow {
  VariantRow row;
  std::optional<double> change50;
  std::optional<double> change75;
};

inline std::vector<VariantTableRow> variant_table(const std::vector<VariantRow>& rows,
                                                  const std::string& baseline) {
  const VariantRow* base = nullptr;
  for (const auto& r : rows)
    if (r.variant == baseline) base = &r;
  if (!base) fail(ErrorKind::InvalidArgument, "baseline variant '" + baseline + "' not found");
  auto change = [](std::optional<double> b, std::optional<double> v) -> std::optional<double> {
    if (!b || !v || *b <= 0.0) return std::nullopt;
    return percent_change(*b, *v);
  };
  std::vector<VariantTableRow> out;
  for (const auto& r : rows)
    out.push_back({r, change(base->map50, r.map50), change(base->map75, r.map75)});
  return out;
}

inline std::string variant_table_csv(const std::vector<VariantTableRow>& table) {
  auto cell = [](std::optional<double> v, int decimals) {
    return v ? format_fixed(*v, decimals) : std::string("n/a");
  };
  std::string out =
      "variant,segm_mAP_50,segm_mAP_75,segm_mAP_50_percent_change,segm_mAP_75_percent_change\n";
  for (const auto& t : table)
    out += t.row.variant + "," + cell(t.row.map50, 4) + "," + cell(t.row.map75, 4) + "," +
           cell(t.change50, 2) + "," + cell(t.change75, 2) + "\n";
  return out;
}

inline std::vector<VariantRow> variant_rows(const RunReport& report) {
  std::vector<VariantRow> rows;
  for (const auto& v : report.variants) {
    VariantRow r{v.name, std::nullopt, std::nullopt};
    if (v.summary) {
      r.map50 = v.summary->ap50;
      r.map75 = v.summary->ap75;
    }
    rows.push_back(r);
  }
  return rows;
}

namespace detail {

inline std::string safe_file_stem(const std::string& id) {
  std::string out;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    out += ok ? c : '_';
  }
  return out.empty() ? std::string("image") : out;
}

class StageTimer {
public:
  explicit StageTimer(std::map<std::string, double>& sink, std::string stage)
      : sink_(sink), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    sink_[stage_] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                              start_)
                        .count();
  }

private:
  std::map<std::string, double>& sink_;
  std::string stage_;
  std::chrono::steady_clock::time_point start_;
};

inline nlohmann::json quality_json(const QualityScores& q) {
  return {{"psnr", psnr_to_json(q.psnr)},
          {"ssim", q.ssim},
          {"lpips", q.lpips ? nlohmann::json(*q.lpips) : nlohmann::json("n/a")}};
}

inline nlohmann::json optional_number(std::optional<double> v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

} // namespace detail

/// Inputs that run_pipeline consumes, already loaded.
struct PipelineInputs {
  const DatasetManifest* manifest = nullptr;
  const GroundTruthSet* ground_truth = nullptr; ///< needed only when variants are given
  const FocusModel* focus_model = nullptr;      ///< without one, every image is routed to SR
  const SuperResolver* super_resolver = nullptr;
  std::map<std::string, double> lpips;
};

/// Per image: classify, route blurry images through SR, score against HQ.
/// Then evaluate each variant's detection file. Every failure is recorded
/// on its record and the run continues.
inline RunReport run_pipeline(const PipelineInputs& in, const PipelineConfig& config) {
  config.validate();
  if (!in.manifest) fail(ErrorKind::InvalidArgument, "pipeline needs a manifest");
  const auto& pairs = in.manifest->pairs;
  std::filesystem::create_directories(config.work_dir);

  RunReport report;
  report.baseline_variant = config.baseline_variant;
  report.records.resize(pairs.size());

  struct StageFlags {
    std::map<std::string, bool> ok; ///< stage -> succeeded, only for attempted stages
  };
  std::vector<StageFlags> flags(pairs.size());

  parallel_for(pairs.size(), config.workers, [&](std::size_t i) {
    const ImagePair& pair = pairs[i];
    ImageRecord& rec = report.records[i];
    auto& ok = flags[i].ok;
    rec.image_id = pair.id;
    const std::string stem = detail::safe_file_stem(pair.id);
    std::string stage = "load";
    std::optional<double> lpips;
    if (auto it = in.lpips.find(pair.id); it != in.lpips.end()) lpips = it->second;
    try {
      RasterImage hq = [&] {
        detail::StageTimer t(rec.timings_ms, "load");
        return load_image(pair.hq);
      }();
      const RasterImage lq = load_image(pair.lq);
      ok["load"] = true;

      const int tw = config.target_size ? config.target_size->first : hq.width();
      const int th = config.target_size ? config.target_size->second : hq.height();
      if (hq.width() != tw || hq.height() != th) hq = resize(hq, tw, th, config.down_kernel);

      stage = "classify";
      if (in.focus_model) {
        detail::StageTimer t(rec.timings_ms, "classify");
        rec.focus = classify(to_luma(lq), *in.focus_model);
        rec.routed_to_sr = *rec.focus == FocusClass::Blurry;
        ok["classify"] = true;
      } else {
        rec.routed_to_sr = true;
      }

      RasterImage output = detail::fit_to(lq, tw, th, config.down_kernel);
      rec.output_path = pair.lq;
      if (rec.routed_to_sr) {
        stage = "sr";
        if (!in.super_resolver)
          fail(ErrorKind::InvalidArgument, "image routed to SR but no SR backend configured");
        detail::StageTimer t(rec.timings_ms, "sr");
        output = apply_sr(lq, *in.super_resolver, config.ordering, tw, th,
                          config.work_dir / stem, config.down_kernel);
        rec.output_path = config.work_dir / (stem + ".png");
        save_image(output, rec.output_path);
        ok["sr"] = true;
      }

      stage = "quality";
      {
        detail::StageTimer t(rec.timings_ms, "quality");
        rec.quality = compare_pair(hq, output, lpips);
        if (lq.width() == hq.width() && lq.height() == hq.height())
          rec.input_quality = compare_pair(hq, lq);
      }
      ok["quality"] = true;
    } catch (const Error& e) {
      ok[stage] = false;
      rec.error = stage + ": " + std::string(e.name()) + ": " + e.what();
    } catch (const std::exception& e) {
      ok[stage] = false;
      rec.error = stage + ": " + e.what();
    }
  });

  for (const auto& f : flags)
    for (const auto& [stage, succeeded] : f.ok)
      (succeeded ? report.stages[stage].succeeded : report.stages[stage].failed) += 1;

  for (const auto& v : config.variants) {
    VariantResult vr;
    vr.name = v.name;
    try {
      if (!in.ground_truth)
        fail(ErrorKind::InvalidArgument, "variants need ground truth ('gt' in config)");
      vr.summary = evaluate(in.ground_truth->instances,
                            load_detections(v.detections, *in.ground_truth));
      report.stages["evaluate"].succeeded += 1;
    } catch (const Error& e) {
      vr.error = std::string(e.name()) + ": " + e.what();
      report.stages["evaluate"].failed += 1;
    }
    report.variants.push_back(std::move(vr));
  }
  return report;
}

/// Canonical (timing-free) report. Byte-identical for identical inputs.
inline nlohmann::json canonical_json(const RunReport& report) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : report.records) {
    nlohmann::json j{{"image_id", r.image_id},
                     {"routed_to_sr", r.routed_to_sr},
                     {"output_path", r.output_path.string()}};
    j["focus"] = r.focus ? nlohmann::json(std::string(to_string(*r.focus))) : nlohmann::json();
    j["quality"] = r.quality ? detail::quality_json(*r.quality) : nlohmann::json();
    j["input_quality"] =
        r.input_quality ? detail::quality_json(*r.input_quality) : nlohmann::json();
    j["error"] = r.error ? nlohmann::json(*r.error) : nlohmann::json();
    records.push_back(j);
  }

  nlohmann::json variants = nlohmann::json::array();
  std::vector<VariantTableRow> table;
  if (!report.variants.empty()) table = variant_table(variant_rows(report), report.baseline_variant);
  for (std::size_t i = 0; i < report.variants.size(); ++i) {
    const auto& v = report.variants[i];
    nlohmann::json j{{"variant", v.name}};
    j["summary"] = v.summary ? to_json(*v.summary) : nlohmann::json();
    j["error"] = v.error ? nlohmann::json(*v.error) : nlohmann::json();
    j["segm_mAP_50"] = detail::optional_number(table[i].row.map50);
    j["segm_mAP_75"] = detail::optional_number(table[i].row.map75);
    j["segm_mAP_50_percent_change"] = detail::optional_number(table[i].change50);
    j["segm_mAP_75_percent_change"] = detail::optional_number(table[i].change75);
    variants.push_back(j);
  }

  nlohmann::json stages = nlohmann::json::object();
  for (const auto& [name, c] : report.stages)
    stages[name] = {{"succeeded", c.succeeded}, {"failed", c.failed}, {"total", c.total()}};

  int routed = 0, failed = 0;
  for (const auto& r : report.records) {
    routed += r.routed_to_sr ? 1 : 0;
    failed += r.error ? 1 : 0;
  }
  return {{"records", records},
          {"variants", variants},
          {"baseline_variant", report.baseline_variant},
          {"stages", stages},
          {"image_count", report.records.size()},
          {"routed_to_sr", routed},
          {"failed_images", failed}};
}

inline nlohmann::json to_json(const RunReport& report) {
  nlohmann::json timings = nlohmann::json::object();
  for (const auto& r : report.records) timings[r.image_id] = r.timings_ms;
  return {{"canonical", canonical_json(report)}, {"timings", timings}};
}

inline std::string records_csv(const RunReport& report) {
  std::string out = "image_id,routed_to_sr,psnr,ssim,lpips,error\n";
  for (const auto& r : report.records) {
    out += r.image_id + "," + (r.routed_to_sr ? "true" : "false") + ",";
    if (r.quality) {
      out += format_double(r.quality->psnr) + "," + format_double(r.quality->ssim) + "," +
             (r.quality->lpips ? format_double(*r.quality->lpips) : std::string("n/a"));
    } else {
      out += "n/a,n/a,n/a";
    }
    std::string err = r.error.value_or("");
    for (char& c : err)
      if (c == ',' || c == '\n') c = ' ';
    out += "," + err + "\n";
  }
  return out;
}

} // namespace srqa
