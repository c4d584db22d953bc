// Regenerates tests/data. Usage: srqa_make_fixtures <tests/data dir>

#include "oracles.hpp"

#include "srqa/png_io.hpp"
#include "srqa/rle.hpp"
#include "srqa/seg_eval.hpp"
#include "srqa/synth.hpp"
#include "srqa/text_io.hpp"

#include <json.hpp>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_json(const fs::path& path, const json& doc) { srqa::write_text_file(path, doc.dump(1) + "\n"); }

json annotation_json(const srqa::InstanceRecord& g, int id) {
  return {{"id", id},
          {"image_id", g.image_id},
          {"category_id", g.category_id},
          {"segmentation", srqa::rle_to_json(g.mask)},
          {"area", g.area},
          {"iscrowd", 0}};
}

json detection_json(const srqa::Detection& d, bool compressed) {
  json seg = srqa::rle_to_json(d.mask);
  if (compressed) seg["counts"] = srqa::rle_counts_to_string(d.mask.counts);
  return {{"image_id", d.image_id},
          {"category_id", d.category_id},
          {"segmentation", seg},
          {"score", d.score}};
}

void micro_fixture(const fs::path& dir) {
  std::vector<srqa::InstanceRecord> gt;
  std::vector<srqa::Detection> det;
  json images = json::array();
  for (std::uint64_t k = 1; k <= 6; ++k) {
    auto c = oracle::micro_case(k);
    for (auto& g : c.gt) {
      g.image_id += static_cast<srqa::ImageId>(10 * k);
      gt.push_back(g);
    }
    for (auto& d : c.det) {
      d.image_id += static_cast<srqa::ImageId>(10 * k);
      det.push_back(d);
    }
    for (int i = 1; i <= 2; ++i)
      images.push_back({{"id", 10 * k + i}, {"width", 8}, {"height", 8},
                        {"file_name", "micro_" + std::to_string(10 * k + i) + ".png"}});
  }
  json anns = json::array();
  for (std::size_t i = 0; i < gt.size(); ++i) anns.push_back(annotation_json(gt[i], static_cast<int>(i + 1)));
  write_json(dir / "micro_gt.json",
             {{"images", images},
              {"annotations", anns},
              {"categories", {{{"id", 1}, {"name", "cell"}}, {{"id", 2}, {"name", "cluster"}}}}});
  json dets = json::array();
  for (std::size_t i = 0; i < det.size(); ++i) dets.push_back(detection_json(det[i], i % 2 == 1));
  write_json(dir / "micro_det.json", dets);
  write_json(dir / "micro_expected.json", srqa::to_json(oracle::as_summary(oracle::evaluate(gt, det))));
}

void pipeline_fixture(const fs::path& dir) {
  fs::create_directories(dir);
  json pairs = json::array();
  json images = json::array();
  json anns = json::array();
  json det_hq = json::array(), det_lq = json::array();
  int ann_id = 1;
  for (int i = 0; i < 3; ++i) {
    const auto hq = srqa::synth::cell_image(64, 64, 200 + i, 2.0);
    srqa::RasterImage lq = hq;
    if (i == 0) lq = srqa::degrade(hq, srqa::ScaleFactor(4));
    if (i == 1) lq = srqa::to_raster(srqa::gaussian_blur(srqa::to_luma(hq), 2.5));
    const std::string id = "p" + std::to_string(i);
    srqa::save_image(hq, dir / (id + "_hq.png"));
    srqa::save_image(lq, dir / (id + "_lq.png"));
    pairs.push_back({{"id", id}, {"hq", id + "_hq.png"}, {"lq", id + "_lq.png"}});
    images.push_back({{"id", i + 1}, {"width", 64}, {"height", 64}, {"file_name", id + "_hq.png"}});

    for (int k = 0; k < 3; ++k) {
      const int x0 = 4 + 18 * k, y0 = 6 + 12 * i;
      std::vector<std::uint8_t> bits(64 * 64, 0);
      for (int y = y0; y < y0 + 14; ++y)
        for (int x = x0; x < x0 + 12; ++x) bits[y * 64 + x] = 1;
      const auto mask = srqa::rle_encode(bits, 64, 64);
      anns.push_back({{"id", ann_id++}, {"image_id", i + 1}, {"category_id", 1},
                      {"segmentation", srqa::rle_to_json(mask)}, {"area", 14 * 12}, {"iscrowd", 0}});
      det_hq.push_back({{"image_id", i + 1}, {"category_id", 1},
                        {"segmentation", srqa::rle_to_json(mask)}, {"score", 0.9 - 0.1 * k}});
      if (k != 2) {
        std::vector<std::uint8_t> shifted(64 * 64, 0);
        const int shift = 2 + k * 2;
        for (int y = y0 + shift; y < y0 + 14 + shift; ++y)
          for (int x = x0; x < x0 + 12; ++x) shifted[y * 64 + x] = 1;
        det_lq.push_back({{"image_id", i + 1}, {"category_id", 1},
                          {"segmentation", srqa::rle_to_json(srqa::rle_encode(shifted, 64, 64))},
                          {"score", 0.8 - 0.2 * k}});
      }
    }
    // one polygon instance per image in a second category
    const double cx = 20 + 10 * i, cy = 50;
    anns.push_back({{"id", ann_id++}, {"image_id", i + 1}, {"category_id", 2},
                    {"segmentation", {{cx - 6, cy - 5, cx + 6, cy - 5, cx + 8, cy + 5, cx - 4, cy + 6}}},
                    {"iscrowd", 0}});
  }
  write_json(dir / "manifest.json", {{"name", "pipeline-fixture"}, {"pairs", pairs}});
  const json gt_doc{{"images", images},
                    {"annotations", anns},
                    {"categories", {{{"id", 1}, {"name", "cell"}}, {{"id", 2}, {"name", "cluster"}}}}};
  write_json(dir / "gt.json", gt_doc);
  // polygon detections: reuse the rasterised GT masks
  const auto gt = srqa::ground_truth_from_json(gt_doc);
  for (const auto& g : gt.instances)
    if (g.category_id == 2)
      det_hq.push_back({{"image_id", g.image_id}, {"category_id", 2},
                        {"segmentation", srqa::rle_to_json(g.mask)}, {"score", 0.95}});
  write_json(dir / "det_hq.json", det_hq);
  write_json(dir / "det_lq.json", det_lq);
  srqa::write_text_file(dir / "lpips.csv", "image_id,lpips\np0,0.21\np1,0.18\n");
}

} // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: srqa_make_fixtures <output dir>\n";
    return 2;
  }
  const fs::path dir = argv[1];
  fs::create_directories(dir);
  for (int i = 0; i < 5; ++i)
    srqa::save_image(srqa::synth::cell_image(256, 256, 101 + i),
                     dir / ("sample_" + std::to_string(i) + ".png"));
  srqa::save_image(srqa::synth::cell_image(256, 256, 777, 3.0), dir / "detail_256.png");
  micro_fixture(dir);
  pipeline_fixture(dir / "pipeline");
  std::cout << "fixtures written to " << dir << "\n";
  return 0;
}
