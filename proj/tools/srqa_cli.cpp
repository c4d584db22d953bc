// srqa: command-line front end. Machine-readable results go to --out (and
// the other named output flags); stdout carries a short human summary.

#include "srqa/error.hpp"
#include "srqa/focus.hpp"
#include "srqa/manifest.hpp"
#include "srqa/pipeline.hpp"
#include "srqa/png_io.hpp"
#include "srqa/quality.hpp"
#include "srqa/resample.hpp"
#include "srqa/ring_spectrum.hpp"
#include "srqa/seg_eval.hpp"
#include "srqa/synth.hpp"
#include "srqa/text_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#ifndef SRQA_VERSION
#define SRQA_VERSION "dev"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitDomainError = 1;
constexpr int kExitUsageError = 2;

const std::vector<std::string> kKernelNames{"nearest", "bilinear", "bicubic", "lanczos2", "lanczos", "box"};

srqa::KernelKind kernel_from_name(const std::string& name) {
  const auto kind = srqa::parse_kernel(name);
  if (!kind) throw CLI::ValidationError("--kernel", "unknown kernel '" + name + "'");
  return *kind;
}

void write_json(const fs::path& path, const json& doc) {
  srqa::write_text_file(path, doc.dump(2) + "\n");
}

struct ImageOptions {
  std::string input;
  std::string out;
  int factor = 2;
  std::string kernel = "bicubic";
  int width = 0;
  int height = 0;
};

struct MetricsOptions {
  std::vector<std::string> images;
  std::optional<double> lpips;
  std::string manifest;
  double bin_width = 1.0;
  std::string out;
};

struct RingOptions {
  std::vector<std::string> images;
  int rings = 10;
  int cutoff = -1;
  std::string out;
  std::string svg;
};

struct FocusOptions {
  std::vector<std::string> sharp;
  std::vector<std::string> blurry;
  std::vector<std::string> images;
  std::string model;
  int rings = 10;
  int cutoff = -1;
  std::string out;
};

struct SegOptions {
  std::string gt;
  std::string det;
  std::string out;
  std::string csv;
};

struct ManifestOptions {
  std::string manifest;
  std::string bands = "40:60,25:75,0:100";
  double floor_db = srqa::kMisPairFloorDb;
  std::string out;
  std::string summary;
};

struct PipelineOptions {
  std::string config;
  std::string out;
  std::string table;
  std::string records;
  std::optional<int> workers;
};

struct OrderingOptions {
  std::string manifest;
  std::string sr_command;
  std::string sr_kernel = "bicubic";
  int scale = 4;
  int timeout = 300;
  int workers = 1;
  std::string work_dir;
  std::string out;
};

struct ReportOptions {
  std::vector<std::string> evals;
  std::vector<std::string> rows;
  std::string baseline;
  std::string out;
};

struct SynthOptions {
  std::string kind = "cells";
  int width = 64;
  int height = 64;
  std::uint64_t seed = 1;
  double sigma = 0.0;
  std::string out;
};

int default_cutoff(int rings, int cutoff) { return cutoff >= 0 ? cutoff : rings / 2; }

srqa::LumaPlane load_luma(const std::string& path) { return srqa::to_luma(srqa::load_image(path)); }

// ---------------------------------------------------------------------------

void run_degrade(const ImageOptions& o) {
  const auto img = srqa::load_image(o.input);
  const auto out = srqa::degrade(img, srqa::ScaleFactor(o.factor), kernel_from_name(o.kernel));
  srqa::save_image(out, o.out);
  std::cout << "degraded " << o.input << " by factor " << o.factor << " ("
            << o.kernel << "), " << out.width() << "x" << out.height() << " -> "
            << o.out << "\n";
}

void run_resize(const ImageOptions& o) {
  const auto img = srqa::load_image(o.input);
  int w = o.width, h = o.height;
  if (w == 0 && h == 0) {
    w = img.width() * o.factor;
    h = img.height() * o.factor;
  } else if (w == 0 || h == 0) {
    throw CLI::ValidationError("--width/--height", "give both or neither");
  }
  const auto out = srqa::resize(img, w, h, kernel_from_name(o.kernel));
  srqa::save_image(out, o.out);
  std::cout << "resized " << img.width() << "x" << img.height() << " -> " << w << "x" << h
            << " (" << o.kernel << ") -> " << o.out << "\n";
}

void run_metrics(const MetricsOptions& o) {
  if (!o.manifest.empty()) {
    auto manifest = srqa::load_manifest(o.manifest);
    const auto reports = srqa::validate_pairs(manifest);
    std::vector<double> values;
    for (const auto& r : reports) values.push_back(r.psnr);
    const auto hist = srqa::psnr_histogram(values, o.bin_width);
    srqa::write_text_file(o.out, srqa::histogram_csv(hist));
    std::cout << "PSNR histogram over " << hist.total << " pairs, support "
              << srqa::format_fixed(srqa::histogram_support(hist), 3) << " dB, "
              << hist.infinite_count << " identical -> " << o.out << "\n";
    return;
  }
  if (o.images.size() != 2) throw CLI::ValidationError("images", "metrics needs HQ and LQ images");
  const auto q = srqa::compare_pair(srqa::load_image(o.images[0]), srqa::load_image(o.images[1]),
                                    o.lpips);
  json doc{{"hq", o.images[0]},
           {"lq", o.images[1]},
           {"psnr", srqa::psnr_to_json(q.psnr)},
           {"ssim", q.ssim},
           {"lpips", q.lpips ? json(*q.lpips) : json("n/a")}};
  write_json(o.out, doc);
  std::cout << "PSNR " << srqa::format_fixed(q.psnr, 4) << " dB, SSIM "
            << srqa::format_fixed(q.ssim, 5) << ", LPIPS "
            << (q.lpips ? srqa::format_double(*q.lpips) : std::string("n/a")) << "\n";
}

void run_ringspec(const RingOptions& o) {
  std::vector<srqa::LabeledSpectrum> spectra;
  const int cutoff = default_cutoff(o.rings, o.cutoff);
  for (const auto& path : o.images) {
    auto spectrum = srqa::compute_ring_spectrum(load_luma(path), o.rings);
    std::cout << fs::path(path).filename().string() << ": high-frequency share (rings >= "
              << cutoff << ") "
              << srqa::format_fixed(srqa::high_frequency_share(spectrum, cutoff), 6) << "\n";
    spectra.push_back({fs::path(path).stem().string(), std::move(spectrum)});
  }
  srqa::emit_ring_bars(spectra, o.out,
                       o.svg.empty() ? std::nullopt : std::optional<fs::path>(o.svg));
  std::cout << spectra.size() * static_cast<std::size_t>(o.rings) << " ring rows -> " << o.out
            << "\n";
}

void run_calibrate(const FocusOptions& o) {
  std::vector<srqa::LumaPlane> sharp, blurry;
  for (const auto& p : o.sharp) sharp.push_back(load_luma(p));
  for (const auto& p : o.blurry) blurry.push_back(load_luma(p));
  const auto model = srqa::calibrate(sharp, blurry, o.rings, default_cutoff(o.rings, o.cutoff));
  srqa::save_focus_model(model, o.out);
  std::cout << "threshold " << srqa::format_fixed(model.threshold, 6) << ", balanced accuracy "
            << srqa::format_fixed(model.calibration_stats.balanced_accuracy, 4) << " ("
            << model.calibration_stats.n_sharp << " sharp, " << model.calibration_stats.n_blurry
            << " blurry) -> " << o.out << "\n";
}

void run_classify(const FocusOptions& o) {
  const auto model = srqa::load_focus_model(o.model);
  std::string csv = "image,feature,class\n";
  int sharp = 0;
  for (const auto& path : o.images) {
    const auto plane = load_luma(path);
    const auto cls = srqa::classify(plane, model);
    const auto spectrum = srqa::compute_ring_spectrum(plane, model.ring_count);
    const std::string feature =
        spectrum.total > 0 ? srqa::format_double(srqa::high_frequency_share(spectrum, model.cutoff_ring))
                           : std::string("n/a");
    csv += path + "," + feature + "," + std::string(srqa::to_string(cls)) + "\n";
    sharp += cls == srqa::FocusClass::Sharp ? 1 : 0;
  }
  srqa::write_text_file(o.out, csv);
  std::cout << sharp << " sharp, " << o.images.size() - sharp << " blurry -> " << o.out << "\n";
}

void run_segeval(const SegOptions& o) {
  const auto gt = srqa::load_ground_truth(o.gt);
  const auto det = srqa::load_detections(o.det, gt);
  const auto s = srqa::evaluate(gt.instances, det);
  write_json(o.out, srqa::to_json(s));
  if (!o.csv.empty()) srqa::write_text_file(o.csv, srqa::summary_csv(s));
  std::cout << "segm_mAP " << srqa::format_fixed(s.segm_mAP, 4) << ", AP50 "
            << srqa::format_fixed(s.ap50, 4) << ", AP75 " << srqa::format_fixed(s.ap75, 4)
            << ", precision " << srqa::format_fixed(s.avg_precision, 4) << ", recall "
            << srqa::format_fixed(s.avg_recall, 4) << " (" << gt.instances.size() << " GT, "
            << det.size() << " detections)\n";
}

void ensure_psnr(srqa::DatasetManifest& manifest) {
  bool missing = false;
  for (const auto& p : manifest.pairs) missing = missing || !p.psnr_cached;
  if (missing) srqa::validate_pairs(manifest);
}

void run_split(const ManifestOptions& o) {
  auto manifest = srqa::load_manifest(o.manifest);
  ensure_psnr(manifest);
  const auto bands = srqa::spectrum_split(manifest, srqa::parse_band_spec(o.bands));
  write_json(o.out, srqa::to_json(manifest));
  if (!o.summary.empty()) srqa::write_text_file(o.summary, srqa::split_summary_csv(bands));
  for (const auto& b : bands)
    std::cout << srqa::to_string(b.band) << ": [" << srqa::format_fixed(b.psnr_low, 3) << ", "
              << srqa::format_fixed(b.psnr_high, 3) << "] dB, " << b.count << " pairs\n";
}

void run_validate(const ManifestOptions& o) {
  auto manifest = srqa::load_manifest(o.manifest);
  const auto reports = srqa::validate_pairs(manifest, o.floor_db);
  srqa::write_text_file(o.out, srqa::validation_csv(reports));
  int dup = 0, mis = 0;
  for (const auto& r : reports) {
    dup += r.flag == srqa::PairFlag::Duplicate ? 1 : 0;
    mis += r.flag == srqa::PairFlag::MisPaired ? 1 : 0;
  }
  std::cout << reports.size() << " pairs checked: " << dup << " duplicate, " << mis
            << " likely mis-paired -> " << o.out << "\n";
}

void run_pipeline_cmd(const PipelineOptions& o) {
  auto config = srqa::load_pipeline_config(o.config);
  if (o.workers) config.workers = *o.workers;
  config.validate();
  if (!config.manifest_path) srqa::fail(srqa::ErrorKind::SchemaError, "config needs 'manifest'");
  const auto manifest = srqa::load_manifest(*config.manifest_path);
  std::optional<srqa::GroundTruthSet> gt;
  if (config.gt_path) gt = srqa::load_ground_truth(*config.gt_path);
  std::optional<srqa::FocusModel> model;
  if (config.focus_model_path) model = srqa::load_focus_model(*config.focus_model_path);
  std::unique_ptr<srqa::SuperResolver> sr;
  if (!config.sr_command.empty())
    sr = std::make_unique<srqa::ExternalSuperResolver>(config.sr_command,
                                                       srqa::ScaleFactor(config.sr_scale),
                                                       std::chrono::seconds(config.timeout_seconds));
  srqa::PipelineInputs inputs;
  inputs.manifest = &manifest;
  inputs.ground_truth = gt ? &*gt : nullptr;
  inputs.focus_model = model ? &*model : nullptr;
  inputs.super_resolver = sr.get();
  if (config.lpips_path) inputs.lpips = srqa::load_lpips_sidecar(*config.lpips_path);

  const auto report = srqa::run_pipeline(inputs, config);
  write_json(o.out, srqa::to_json(report));
  if (!report.variants.empty()) {
    const auto table = srqa::variant_table(srqa::variant_rows(report), report.baseline_variant);
    if (!o.table.empty()) srqa::write_text_file(o.table, srqa::variant_table_csv(table));
    std::cout << srqa::variant_table_csv(table);
  }
  if (!o.records.empty()) srqa::write_text_file(o.records, srqa::records_csv(report));
  int routed = 0, failed = 0;
  for (const auto& r : report.records) {
    routed += r.routed_to_sr ? 1 : 0;
    failed += r.error ? 1 : 0;
  }
  std::cout << report.records.size() << " images, " << routed << " routed to SR, " << failed
            << " failed -> " << o.out << "\n";
}

void run_ordering(const OrderingOptions& o) {
  const auto manifest = srqa::load_manifest(o.manifest);
  std::vector<srqa::RasterImage> hq, lq;
  for (const auto& p : manifest.pairs) {
    hq.push_back(srqa::load_image(p.hq));
    lq.push_back(srqa::load_image(p.lq));
  }
  std::unique_ptr<srqa::SuperResolver> sr;
  if (o.sr_command.empty()) {
    sr = std::make_unique<srqa::InterpolatingSuperResolver>(srqa::ScaleFactor(o.scale),
                                                             kernel_from_name(o.sr_kernel));
  } else {
    sr = std::make_unique<srqa::ExternalSuperResolver>(o.sr_command, srqa::ScaleFactor(o.scale),
                                                       std::chrono::seconds(o.timeout));
  }
  const fs::path work = o.work_dir.empty() ? fs::path(o.out).parent_path() / "ordering_work"
                                           : fs::path(o.work_dir);
  fs::create_directories(work);
  const auto result = srqa::ordering_experiment(hq, lq, *sr, work, o.workers);
  json records = json::array();
  for (const auto& r : result.records)
    records.push_back({{"pair_id", manifest.pairs[r.index].id},
                       {"sr_first", srqa::detail::quality_json(r.sr_first)},
                       {"subsample_first", srqa::detail::quality_json(r.subsample_first)}});
  write_json(o.out, {{"scale", o.scale},
                     {"records", records},
                     {"mean_psnr_sr_first", srqa::psnr_to_json(result.mean_psnr_sr_first)},
                     {"mean_psnr_subsample_first",
                      srqa::psnr_to_json(result.mean_psnr_subsample_first)}});
  std::cout << "mean PSNR: SR first " << srqa::format_fixed(result.mean_psnr_sr_first, 3)
            << " dB, subsample first " << srqa::format_fixed(result.mean_psnr_subsample_first, 3)
            << " dB -> " << o.out << "\n";
}

std::pair<std::string, std::string> split_assignment(const std::string& text, const char* flag) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0)
    throw CLI::ValidationError(flag, "expected NAME=VALUE, got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

void run_report(const ReportOptions& o) {
  std::vector<srqa::VariantRow> rows;
  for (const auto& e : o.evals) {
    auto [name, path] = split_assignment(e, "--eval");
    const auto s = srqa::eval_summary_from_json(srqa::parse_json_file(path));
    rows.push_back({name, s.ap50, s.ap75});
  }
  for (const auto& r : o.rows) {
    auto [name, values] = split_assignment(r, "--row");
    const auto colon = values.find(':');
    if (colon == std::string::npos)
      throw CLI::ValidationError("--row", "expected NAME=MAP50:MAP75, got '" + r + "'");
    rows.push_back({name, srqa::parse_double(values.substr(0, colon), "segm_mAP_50"),
                    srqa::parse_double(values.substr(colon + 1), "segm_mAP_75")});
  }
  if (rows.empty()) throw CLI::ValidationError("--eval/--row", "give at least one variant");
  const std::string baseline = o.baseline.empty() ? rows.front().variant : o.baseline;
  const auto csv = srqa::variant_table_csv(srqa::variant_table(rows, baseline));
  srqa::write_text_file(o.out, csv);
  std::cout << csv;
}

void run_synth(const SynthOptions& o) {
  srqa::RasterImage img(1, 1, 1);
  if (o.kind == "noise") {
    img = srqa::to_raster(srqa::synth::noise_plane(o.width, o.height, o.seed));
  } else if (o.kind == "checkerboard") {
    img = srqa::to_raster(srqa::synth::checkerboard(o.width, o.height, 4));
  } else if (o.kind == "cells") {
    img = srqa::synth::cell_image(o.width, o.height, o.seed);
  } else {
    img = srqa::synth::cell_image(o.width, o.height, o.seed, 3.0);
  }
  if (o.sigma > 0) img = srqa::to_raster(srqa::gaussian_blur(srqa::to_luma(img), o.sigma));
  srqa::save_image(img, o.out);
  std::cout << o.kind << " " << o.width << "x" << o.height << " seed " << o.seed << " -> " << o.out
            << "\n";
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Super-resolution and segmentation quality toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("srqa ") + SRQA_VERSION);

  auto kernel_check = CLI::IsMember(kKernelNames, CLI::ignore_case);
  std::function<void()> action;

  ImageOptions degrade_opts;
  auto* degrade = app.add_subcommand("degrade", "decimate then interpolate back to the input size");
  degrade->add_option("input", degrade_opts.input, "input PNG")->required()->check(CLI::ExistingFile);
  degrade->add_option("--factor", degrade_opts.factor, "scale factor")->check(CLI::Range(1, 64));
  degrade->add_option("--kernel", degrade_opts.kernel, "interpolation kernel")->check(kernel_check);
  degrade->add_option("--out", degrade_opts.out, "output PNG")->required();
  degrade->callback([&] { action = [&] { run_degrade(degrade_opts); }; });

  ImageOptions resize_opts;
  auto* resize = app.add_subcommand("resize", "resample to a target size");
  resize->add_option("input", resize_opts.input, "input PNG")->required()->check(CLI::ExistingFile);
  resize->add_option("--width", resize_opts.width, "target width")->check(CLI::PositiveNumber);
  resize->add_option("--height", resize_opts.height, "target height")->check(CLI::PositiveNumber);
  resize->add_option("--factor", resize_opts.factor, "upscale factor when no size is given")
      ->check(CLI::Range(1, 64));
  resize->add_option("--kernel", resize_opts.kernel, "interpolation kernel")->check(kernel_check);
  resize->add_option("--out", resize_opts.out, "output PNG")->required();
  resize->callback([&] { action = [&] { run_resize(resize_opts); }; });

  MetricsOptions metrics_opts;
  auto* metrics = app.add_subcommand("metrics", "PSNR/SSIM of a pair, or a manifest PSNR histogram");
  metrics->add_option("images", metrics_opts.images, "HQ and LQ PNGs")->check(CLI::ExistingFile);
  metrics->add_option("--lpips", metrics_opts.lpips, "LPIPS value to attach")->check(CLI::NonNegativeNumber);
  metrics->add_option("--manifest", metrics_opts.manifest, "histogram every pair of a manifest")
      ->check(CLI::ExistingFile);
  metrics->add_option("--bin-width", metrics_opts.bin_width, "histogram bin width in dB")
      ->check(CLI::PositiveNumber);
  metrics->add_option("--out", metrics_opts.out, "JSON (pair) or CSV (histogram)")->required();
  metrics->callback([&] { action = [&] { run_metrics(metrics_opts); }; });

  RingOptions ring_opts;
  auto* ringspec = app.add_subcommand("ringspec", "ring-energy spectrum per image");
  ringspec->add_option("images", ring_opts.images, "PNGs")->required()->check(CLI::ExistingFile);
  ringspec->add_option("--rings", ring_opts.rings, "number of rings")->check(CLI::Range(2, 1000));
  ringspec->add_option("--cutoff", ring_opts.cutoff, "first high-frequency ring (default rings/2)");
  ringspec->add_option("--out", ring_opts.out, "ring CSV")->required();
  ringspec->add_option("--svg", ring_opts.svg, "optional bar chart");
  ringspec->callback([&] { action = [&] { run_ringspec(ring_opts); }; });

  FocusOptions cal_opts;
  auto* calibrate = app.add_subcommand("calibrate-focus", "fit the sharp/blurry threshold");
  calibrate->add_option("--sharp", cal_opts.sharp, "sharp PNGs")->required()->check(CLI::ExistingFile);
  calibrate->add_option("--blurry", cal_opts.blurry, "blurry PNGs")->required()->check(CLI::ExistingFile);
  calibrate->add_option("--rings", cal_opts.rings, "number of rings")->check(CLI::Range(2, 1000));
  calibrate->add_option("--cutoff", cal_opts.cutoff, "first high-frequency ring (default rings/2)");
  calibrate->add_option("--out", cal_opts.out, "model file")->required();
  calibrate->callback([&] { action = [&] { run_calibrate(cal_opts); }; });

  FocusOptions cls_opts;
  auto* classify = app.add_subcommand("classify", "label images sharp or blurry");
  classify->add_option("images", cls_opts.images, "PNGs")->required()->check(CLI::ExistingFile);
  classify->add_option("--model", cls_opts.model, "model file")->required()->check(CLI::ExistingFile);
  classify->add_option("--out", cls_opts.out, "CSV")->required();
  classify->callback([&] { action = [&] { run_classify(cls_opts); }; });

  SegOptions seg_opts;
  auto* segeval = app.add_subcommand("segeval", "COCO-style mask AP");
  segeval->add_option("--gt", seg_opts.gt, "ground-truth JSON")->required()->check(CLI::ExistingFile);
  segeval->add_option("--det", seg_opts.det, "detections JSON")->required()->check(CLI::ExistingFile);
  segeval->add_option("--out", seg_opts.out, "summary JSON")->required();
  segeval->add_option("--csv", seg_opts.csv, "summary CSV row");
  segeval->callback([&] { action = [&] { run_segeval(seg_opts); }; });

  ManifestOptions split_opts;
  auto* split = app.add_subcommand("split-spectrum", "label pairs with nested PSNR bands");
  split->add_option("--manifest", split_opts.manifest, "manifest JSON")->required()->check(CLI::ExistingFile);
  split->add_option("--bands", split_opts.bands, "narrow,middle,wide percentile pairs");
  split->add_option("--out", split_opts.out, "labelled manifest JSON")->required();
  split->add_option("--summary", split_opts.summary, "band summary CSV");
  split->callback([&] { action = [&] { run_split(split_opts); }; });

  ManifestOptions val_opts;
  auto* validate = app.add_subcommand("validate-manifest", "flag duplicate and mis-paired images");
  validate->add_option("--manifest", val_opts.manifest, "manifest JSON")->required()->check(CLI::ExistingFile);
  validate->add_option("--floor", val_opts.floor_db, "mis-pair PSNR floor in dB");
  validate->add_option("--out", val_opts.out, "report CSV")->required();
  validate->callback([&] { action = [&] { run_validate(val_opts); }; });

  PipelineOptions pipe_opts;
  auto* pipeline = app.add_subcommand("pipeline", "classify, route through SR, evaluate");
  pipeline->add_option("--config", pipe_opts.config, "pipeline config JSON")->required()->check(CLI::ExistingFile);
  pipeline->add_option("--out", pipe_opts.out, "run report JSON")->required();
  pipeline->add_option("--table", pipe_opts.table, "variant table CSV");
  pipeline->add_option("--records", pipe_opts.records, "per-image CSV");
  pipeline->add_option("--workers", pipe_opts.workers, "parallel jobs (overrides config)")
      ->check(CLI::PositiveNumber);
  pipeline->callback([&] { action = [&] { run_pipeline_cmd(pipe_opts); }; });

  OrderingOptions ord_opts;
  auto* ordering = app.add_subcommand("ordering", "compare SR-first and subsample-first chains");
  ordering->add_option("--manifest", ord_opts.manifest, "manifest JSON")->required()->check(CLI::ExistingFile);
  ordering->add_option("--sr-command", ord_opts.sr_command, "SR template; default is interpolation");
  ordering->add_option("--kernel", ord_opts.sr_kernel, "stand-in SR kernel")->check(kernel_check);
  ordering->add_option("--factor", ord_opts.scale, "SR scale")->check(CLI::Range(1, 64));
  ordering->add_option("--timeout", ord_opts.timeout, "seconds per SR call")->check(CLI::PositiveNumber);
  ordering->add_option("--workers", ord_opts.workers, "parallel jobs")->check(CLI::PositiveNumber);
  ordering->add_option("--work-dir", ord_opts.work_dir, "scratch directory");
  ordering->add_option("--out", ord_opts.out, "JSON")->required();
  ordering->callback([&] { action = [&] { run_ordering(ord_opts); }; });

  ReportOptions rep_opts;
  auto* report = app.add_subcommand("report", "variant table with percent changes");
  report->add_option("--eval", rep_opts.evals, "NAME=summary.json (from segeval)");
  report->add_option("--row", rep_opts.rows, "NAME=MAP50:MAP75");
  report->add_option("--baseline", rep_opts.baseline, "baseline variant (default: first)");
  report->add_option("--out", rep_opts.out, "table CSV")->required();
  report->callback([&] { action = [&] { run_report(rep_opts); }; });

  SynthOptions syn_opts;
  auto* synth = app.add_subcommand("synth", "seeded synthetic test image");
  synth->add_option("--kind", syn_opts.kind, "image kind")
      ->check(CLI::IsMember({"noise", "checkerboard", "cells", "detail"}));
  synth->add_option("--width", syn_opts.width, "width")->check(CLI::PositiveNumber);
  synth->add_option("--height", syn_opts.height, "height")->check(CLI::PositiveNumber);
  synth->add_option("--seed", syn_opts.seed, "generator seed");
  synth->add_option("--blur", syn_opts.sigma, "Gaussian blur sigma applied to the luma")
      ->check(CLI::NonNegativeNumber);
  synth->add_option("--out", syn_opts.out, "output PNG")->required();
  synth->callback([&] { action = [&] { run_synth(syn_opts); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsageError;
  }

  try {
    action();
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.get_name() << ": " << e.what() << "\n";
    return kExitUsageError;
  } catch (const srqa::Error& e) {
    std::cerr << "error: " << e.name() << ": " << e.what() << "\n";
    return kExitDomainError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomainError;
  }
  return 0;
}
