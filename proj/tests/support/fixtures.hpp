#pragma once

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cooc/boxes.hpp"
#include "cooc/cli.hpp"
#include "cooc/core_model.hpp"
#include "cooc/ingest.hpp"

namespace cooc::testing {

// M: T1={person,dog}, T2={person,car}, T3={person,dog,car}, T4={dog}
inline TransactionDb micro_db() {
  Vocabulary v({"person", "dog", "car"});
  return TransactionDb(v,
                       {{"T1", Itemset{0, 1}}, {"T2", Itemset{0, 2}}, {"T3", Itemset{0, 1, 2}}, {"T4", Itemset{1}}},
                       "micro");
}

// Portable draws: only raw mt19937_64 output is used, never the
// implementation-defined distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  std::uint64_t below(std::uint64_t n) { return gen_() % n; }
  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return unit() < p; }

 private:
  std::mt19937_64 gen_;
};

inline TransactionDb random_db(Rng& rng, std::size_t max_classes, std::size_t max_transactions) {
  const std::size_t n_classes = 1 + rng.below(max_classes);
  const std::size_t n_tx = 1 + rng.below(max_transactions);
  std::vector<std::string> names;
  std::vector<double> rate;
  for (std::size_t c = 0; c < n_classes; ++c) {
    names.push_back("c" + std::to_string(c));
    rate.push_back(0.15 + 0.8 * rng.unit());
  }
  std::vector<Transaction> txs;
  for (std::size_t t = 0; t < n_tx; ++t) {
    std::vector<ClassId> labels;
    for (ClassId c = 0; c < n_classes; ++c) {
      if (rng.chance(rate[c])) labels.push_back(c);
    }
    if (labels.empty()) labels.push_back(static_cast<ClassId>(rng.below(n_classes)));
    txs.push_back({"img" + std::to_string(t), Itemset(std::move(labels))});
  }
  return TransactionDb(Vocabulary(std::move(names)), std::move(txs), "random");
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("cooc_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

inline CliResult run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"cooc"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// COCO-format annotations with correlated classes: each image picks a
// scene anchor, which pulls in its usual companions with high probability.
inline nlohmann::json synthetic_coco(std::size_t n_images, std::uint64_t seed) {
  static const std::vector<std::string> names = {"person", "car",   "dog",    "bicycle", "chair",
                                                 "dining table", "cup", "bottle", "tv",      "couch",
                                                 "traffic light", "bus"};
  // anchor -> companions
  static const std::vector<std::vector<std::size_t>> scenes = {
      {0, 1, 10, 11}, {0, 3, 1}, {2, 0, 9}, {5, 4, 6, 7, 0}, {8, 9, 0, 4}};

  Rng rng(seed);
  nlohmann::json doc;
  doc["info"] = {{"description", "synthetic"}};
  doc["images"] = nlohmann::json::array();
  doc["annotations"] = nlohmann::json::array();
  doc["categories"] = nlohmann::json::array();
  for (std::size_t c = 0; c < names.size(); ++c) {
    // Sparse, non-contiguous original ids as in real COCO.
    doc["categories"].push_back({{"id", static_cast<int>(3 * c + 1)}, {"name", names[c]}});
  }
  int ann_id = 1;
  for (std::size_t i = 0; i < n_images; ++i) {
    const int image_id = static_cast<int>(1000 + 7 * i);
    doc["images"].push_back({{"id", image_id}, {"width", 640}, {"height", 480}, {"file_name", "x.jpg"}});
    if (rng.chance(0.03)) continue;  // unannotated image
    const auto& scene = scenes[rng.below(scenes.size())];
    std::vector<std::size_t> present{scene[0]};
    for (std::size_t k = 1; k < scene.size(); ++k) {
      if (rng.chance(0.75 - 0.1 * static_cast<double>(k))) present.push_back(scene[k]);
    }
    if (rng.chance(0.2)) present.push_back(rng.below(names.size()));
    for (auto c : present) {
      const std::size_t instances = 1 + rng.below(3);
      for (std::size_t k = 0; k < instances; ++k) {
        const double x = static_cast<double>(rng.below(500));
        const double y = static_cast<double>(rng.below(380));
        const double w = 10.0 + static_cast<double>(rng.below(120));
        const double h = 10.0 + static_cast<double>(rng.below(90));
        doc["annotations"].push_back({{"id", ann_id++},
                                      {"image_id", image_id},
                                      {"category_id", static_cast<int>(3 * c + 1)},
                                      {"bbox", {x, y, w, h}},
                                      {"iscrowd", 0}});
      }
    }
  }
  return doc;
}

// Ground truth re-emitted as score-1.0 detections, one record per listed
// image.
inline std::vector<DetectionRecord> ground_truth_as_detections(const CocoAnnotations& coco) {
  std::vector<DetectionRecord> records;
  for (const auto& img : coco.images) {
    DetectionRecord r;
    r.image_id = img.image_id;
    r.width = img.width > 0 ? img.width : 1;
    r.height = img.height > 0 ? img.height : 1;
    for (const auto& b : coco.boxes) {
      if (b.image_id == img.image_id) {
        r.detections.push_back({coco.vocabulary.name(b.class_id), b.class_id, 1.0, b.bbox});
      }
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace cooc::testing
