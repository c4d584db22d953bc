#pragma once

#include "srqa/error.hpp"
#include "srqa/parallel.hpp"
#include "srqa/png_io.hpp"
#include "srqa/quality.hpp"
#include "srqa/seg_eval.hpp"
#include "srqa/text_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace srqa {

struct ImagePair {
  std::string id;
  std::filesystem::path hq;
  std::filesystem::path lq;
  int width = 0;
  int height = 0;
  std::optional<double> psnr_cached;
};

enum class Band { Narrow, Middle, Wide };

constexpr std::string_view to_string(Band b) noexcept {
  switch (b) {
    case Band::Narrow: return "narrow";
    case Band::Middle: return "middle";
    case Band::Wide: return "wide";
  }
  return "unknown";
}

/// Percentile interval per band; later bands must contain earlier ones.
struct BandSpec {
  std::array<std::pair<double, double>, 3> percentiles{{{40, 60}, {25, 75}, {0, 100}}};

  void validate() const {
    for (const auto& [lo, hi] : percentiles)
      if (!(lo >= 0 && lo <= hi && hi <= 100))
        fail(ErrorKind::InvalidArgument, "band percentiles must satisfy 0 <= low <= high <= 100");
    for (std::size_t i = 0; i + 1 < percentiles.size(); ++i)
      if (percentiles[i + 1].first > percentiles[i].first ||
          percentiles[i + 1].second < percentiles[i].second)
        fail(ErrorKind::InvalidArgument, "bands must nest: narrow within middle within wide");
  }
};

/// Parses "40:60,25:75,0:100".
inline BandSpec parse_band_spec(std::string_view text) {
  BandSpec spec;
  auto fields = split_csv_line(text);
  if (fields.size() != 3)
    fail(ErrorKind::InvalidArgument, "bands need three low:high percentile pairs");
  for (std::size_t i = 0; i < 3; ++i) {
    auto colon = fields[i].find(':');
    if (colon == std::string::npos)
      fail(ErrorKind::InvalidArgument, "band '" + fields[i] + "' is not low:high");
    spec.percentiles[i] = {parse_double(fields[i].substr(0, colon), "percentile"),
                           parse_double(fields[i].substr(colon + 1), "percentile")};
  }
  spec.validate();
  return spec;
}

struct SpectrumBand {
  Band band = Band::Wide;
  double percentile_low = 0;
  double percentile_high = 100;
  double psnr_low = 0;
  double psnr_high = 0;
  std::size_t count = 0;
};

struct DatasetManifest {
  std::string name;
  std::string notes;
  std::vector<ImagePair> pairs;
  std::map<std::string, std::vector<Band>> band_labels;
  std::vector<SpectrumBand> bands;
};

/// Builds a manifest from its JSON form. Relative paths resolve against
/// base_dir. With check_files, every referenced PNG must exist and each
/// pair must have matching dimensions.
inline DatasetManifest manifest_from_json(const nlohmann::json& doc,
                                          const std::filesystem::path& base_dir,
                                          bool check_files = true) {
  DatasetManifest m;
  try {
    if (!doc.is_object() || !doc.contains("pairs") || !doc.at("pairs").is_array())
      fail(ErrorKind::SchemaError, "manifest must be an object with a 'pairs' array");
    m.name = doc.value("name", std::string{});
    m.notes = doc.value("notes", std::string{});
    std::set<std::string> seen;
    for (const auto& p : doc.at("pairs")) {
      ImagePair pair;
      pair.id = p.at("id").get<std::string>();
      if (!seen.insert(pair.id).second)
        fail(ErrorKind::DuplicatePairId, "duplicate pair id '" + pair.id + "'");
      auto resolve = [&](const std::string& s) {
        std::filesystem::path path(s);
        return path.is_absolute() ? path : base_dir / path;
      };
      pair.hq = resolve(p.at("hq").get<std::string>());
      pair.lq = resolve(p.at("lq").get<std::string>());
      if (p.contains("psnr")) {
        const auto& v = p.at("psnr");
        pair.psnr_cached = v.is_string() ? parse_double(v.get<std::string>(), "psnr")
                                         : v.get<double>();
      }
      m.pairs.push_back(std::move(pair));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::SchemaError, std::string("manifest JSON: ") + e.what());
  }

  if (check_files) {
    std::string missing;
    for (const auto& pair : m.pairs)
      for (const auto* path : {&pair.hq, &pair.lq})
        if (!std::filesystem::exists(*path))
          missing += "\n  pair '" + pair.id + "': " + path->string();
    if (!missing.empty()) fail(ErrorKind::MissingFile, "manifest references missing files:" + missing);
    for (auto& pair : m.pairs) {
      const auto hq = read_png_header(pair.hq);
      const auto lq = read_png_header(pair.lq);
      if (hq.width != lq.width || hq.height != lq.height)
        fail(ErrorKind::DimensionMismatch,
             "pair '" + pair.id + "': HQ is " + std::to_string(hq.width) + "x" +
                 std::to_string(hq.height) + " but LQ is " + std::to_string(lq.width) + "x" +
                 std::to_string(lq.height));
      pair.width = hq.width;
      pair.height = hq.height;
    }
  }
  return m;
}

inline DatasetManifest load_manifest(const std::filesystem::path& path) {
  return manifest_from_json(parse_json_file(path), path.parent_path());
}

enum class PairFlag { Ok, Duplicate, MisPaired };

constexpr std::string_view to_string(PairFlag f) noexcept {
  switch (f) {
    case PairFlag::Ok: return "ok";
    case PairFlag::Duplicate: return "duplicate";
    case PairFlag::MisPaired: return "mispaired";
  }
  return "unknown";
}

struct PairReport {
  std::string id;
  double psnr = 0.0;
  PairFlag flag = PairFlag::Ok;
};

inline constexpr double kMisPairFloorDb = 15.0;

/// Computes luma PSNR for every pair, caches it in the manifest and flags
/// duplicates (+inf) and likely mis-pairings (below floor_db). I/O errors
/// propagate.
inline std::vector<PairReport> validate_pairs(DatasetManifest& manifest,
                                              double floor_db = kMisPairFloorDb,
                                              int workers = 1) {
  std::vector<PairReport> reports(manifest.pairs.size());
  parallel_for(manifest.pairs.size(), workers, [&](std::size_t i) {
    const ImagePair& pair = manifest.pairs[i];
    const auto hq = to_luma(load_image(pair.hq));
    const auto lq = to_luma(load_image(pair.lq));
    PairReport r;
    r.id = pair.id;
    r.psnr = psnr(hq, lq);
    if (std::isinf(r.psnr)) {
      r.flag = PairFlag::Duplicate;
    } else if (r.psnr < floor_db) {
      r.flag = PairFlag::MisPaired;
    }
    reports[i] = std::move(r);
  });
  for (std::size_t i = 0; i < reports.size(); ++i) manifest.pairs[i].psnr_cached = reports[i].psnr;
  return reports;
}

/// Percentile of ascending data with linear interpolation between order
/// statistics (position p/100 * (n-1)).
inline double percentile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) fail(ErrorKind::EmptyInput, "percentile of empty data");
  const double pos = p / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

/// Labels every pair with each PSNR band that contains it. Boundaries come
/// from percentiles of the finite PSNRs; a band reaching the 100th
/// percentile also holds the +inf (duplicate) pairs, so the widest default
/// band covers everything.
inline std::vector<SpectrumBand> spectrum_split(DatasetManifest& manifest,
                                                const BandSpec& spec = {}) {
  spec.validate();
  if (manifest.pairs.empty()) fail(ErrorKind::EmptyManifest, "manifest has no pairs");
  std::vector<double> finite;
  for (const auto& pair : manifest.pairs) {
    if (!pair.psnr_cached)
      fail(ErrorKind::MissingPsnr, "pair '" + pair.id + "' has no cached PSNR");
    if (std::isfinite(*pair.psnr_cached)) finite.push_back(*pair.psnr_cached);
  }
  if (finite.empty()) fail(ErrorKind::EmptyManifest, "manifest has no finite PSNR values");
  std::sort(finite.begin(), finite.end());

  std::vector<SpectrumBand> bands;
  manifest.band_labels.clear();
  for (std::size_t b = 0; b < spec.percentiles.size(); ++b) {
    SpectrumBand band;
    band.band = static_cast<Band>(b);
    band.percentile_low = spec.percentiles[b].first;
    band.percentile_high = spec.percentiles[b].second;
    band.psnr_low = percentile(finite, band.percentile_low);
    band.psnr_high = percentile(finite, band.percentile_high);
    for (const auto& pair : manifest.pairs) {
      const double v = *pair.psnr_cached;
      const bool inside = std::isinf(v) ? band.percentile_high == 100.0
                                        : (v >= band.psnr_low && v <= band.psnr_high);
      if (inside) {
        manifest.band_labels[pair.id].push_back(band.band);
        ++band.count;
      }
    }
    bands.push_back(band);
  }
  manifest.bands = bands;
  return bands;
}

inline nlohmann::json psnr_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline nlohmann::json to_json(const DatasetManifest& m) {
  nlohmann::json doc;
  doc["name"] = m.name;
  if (!m.notes.empty()) doc["notes"] = m.notes;
  doc["pairs"] = nlohmann::json::array();
  for (const auto& p : m.pairs) {
    nlohmann::json jp{{"id", p.id}, {"hq", p.hq.string()}, {"lq", p.lq.string()}};
    if (p.psnr_cached) jp["psnr"] = psnr_to_json(*p.psnr_cached);
    doc["pairs"].push_back(jp);
  }
  if (!m.bands.empty()) {
    nlohmann::json labels = nlohmann::json::object();
    for (const auto& p : m.pairs) {
      nlohmann::json list = nlohmann::json::array();
      if (auto it = m.band_labels.find(p.id); it != m.band_labels.end())
        for (Band b : it->second) list.push_back(std::string(to_string(b)));
      labels[p.id] = list;
    }
    doc["band_labels"] = labels;
    doc["bands"] = nlohmann::json::array();
    for (const auto& b : m.bands)
      doc["bands"].push_back({{"band", std::string(to_string(b.band))},
                              {"percentile_low", b.percentile_low},
                              {"percentile_high", b.percentile_high},
                              {"psnr_low", b.psnr_low},
                              {"psnr_high", b.psnr_high},
                              {"count", b.count}});
  }
  return doc;
}

inline std::string split_summary_csv(const std::vector<SpectrumBand>& bands) {
  std::string out = "band,psnr_low,psnr_high,count\n";
  for (const auto& b : bands)
    out += std::string(to_string(b.band)) + "," + format_double(b.psnr_low) + "," +
           format_double(b.psnr_high) + "," + std::to_string(b.count) + "\n";
  return out;
}

inline std::string validation_csv(const std::vector<PairReport>& reports) {
  std::string out = "pair_id,psnr,flag\n";
  for (const auto& r : reports)
    out += r.id + "," + format_double(r.psnr) + "," + std::string(to_string(r.flag)) + "\n";
  return out;
}

} // namespace srqa
