#pragma once

// Readers and writers for the files that cross the stage boundary:
//   detections JSONL   one image per line, scored boxes
//   COCO annotations   images / annotations / categories
//   transactions JSONL the label-only db artifact consumed by mining

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cooc/boxes.hpp"
#include "cooc/core_model.hpp"

namespace cooc {

enum class VocabularySource { kFromFile, kFromCocoCategories };

struct IngestConfig {
  double score_threshold = 0.5;
  VocabularySource vocabulary_source = VocabularySource::kFromFile;
  std::string coco_categories_path;  // used with kFromCocoCategories

  void validate() const {
    if (!(score_threshold >= 0.0 && score_threshold <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "score_threshold must be in [0,1]");
    }
    if (vocabulary_source == VocabularySource::kFromCocoCategories && coco_categories_path.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "coco category vocabulary needs an annotation file path");
    }
  }
};

struct DetectionIngest {
  TransactionDb db;
  std::vector<DetectionRecord> records;  // every record, unthresholded
  std::vector<std::string> warnings;
  std::size_t images_dropped = 0;
};

struct CocoImage {
  std::string image_id;
  int width = 0;
  int height = 0;
};

struct CocoAnnotations {
  Vocabulary vocabulary;
  std::vector<CocoImage> images;
  std::vector<GroundTruthBox> boxes;  // annotation order, contiguous class ids
};

struct CocoGroundTruth {
  TransactionDb db;
  std::size_t images_without_annotations = 0;
};

namespace detail {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  return in;
}

inline std::string source_name(const std::string& path) { return std::filesystem::path(path).filename().string(); }

inline std::string id_text(const json& v, const std::string& what) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw Error(ErrorCode::kFormat, what + " must be an integer or string");
}

inline BBox parse_bbox(const json& v, ErrorCode code, const std::string& where) {
  if (!v.is_array() || v.size() != 4) throw Error(code, where + ": bbox must be [x, y, w, h]");
  BBox b;
  double* fields[] = {&b.x, &b.y, &b.w, &b.h};
  for (std::size_t i = 0; i < 4; ++i) {
    if (!v[i].is_number()) throw Error(code, where + ": bbox entries must be numbers");
    *fields[i] = v[i].get<double>();
  }
  if (!b.valid()) throw Error(code, where + ": bbox width and height must be positive");
  return b;
}

inline int positive_int(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_integer() || it->get<long long>() <= 0) {
    throw Error(ErrorCode::kParse, where + ": '" + key + "' must be a positive integer");
  }
  return static_cast<int>(it->get<long long>());
}

// Raw record with the category still unresolved.
inline DetectionRecord parse_detection_line(const std::string& line, std::size_t line_no) {
  const std::string where = "line " + std::to_string(line_no);
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, where + ": " + e.what());
  }
  if (!obj.is_object()) throw Error(ErrorCode::kParse, where + ": record must be a JSON object");

  DetectionRecord rec;
  auto id = obj.find("image_id");
  if (id == obj.end() || !id->is_string() || id->get<std::string>().empty()) {
    throw Error(ErrorCode::kParse, where + ": 'image_id' must be a non-empty string");
  }
  rec.image_id = id->get<std::string>();
  rec.width = positive_int(obj, "width", where);
  rec.height = positive_int(obj, "height", where);

  auto dets = obj.find("detections");
  if (dets == obj.end() || !dets->is_array()) throw Error(ErrorCode::kParse, where + ": 'detections' must be an array");
  for (const auto& d : *dets) {
    if (!d.is_object()) throw Error(ErrorCode::kParse, where + ": detection must be an object");
    Detection det;
    auto cat = d.find("category");
    if (cat == d.end() || !cat->is_string() || cat->get<std::string>().empty()) {
      throw Error(ErrorCode::kParse, where + ": 'category' must be a non-empty string");
    }
    det.category = cat->get<std::string>();
    auto score = d.find("score");
    if (score == d.end() || !score->is_number()) throw Error(ErrorCode::kParse, where + ": 'score' must be a number");
    det.score = score->get<double>();
    if (!(det.score >= 0.0 && det.score <= 1.0)) throw Error(ErrorCode::kParse, where + ": score outside [0,1]");
    auto bbox = d.find("bbox");
    if (bbox == d.end()) throw Error(ErrorCode::kParse, where + ": missing 'bbox'");
    det.bbox = parse_bbox(*bbox, ErrorCode::kParse, where);
    rec.detections.push_back(std::move(det));
  }
  return rec;
}

inline json parse_json_file(const std::string& path) {
  auto in = open_input(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, "'" + path + "': " + e.what());
  }
}

}  // namespace detail

inline CocoAnnotations read_coco_annotations(const std::string& path) {
  const auto doc = detail::parse_json_file(path);
  if (!doc.is_object()) throw Error(ErrorCode::kFormat, "COCO file must hold a JSON object");
  for (const char* key : {"images", "annotations", "categories"}) {
    auto it = doc.find(key);
    if (it == doc.end() || !it->is_array()) {
      throw Error(ErrorCode::kFormat, std::string("COCO file is missing the '") + key + "' array");
    }
  }

  // Contiguous ids follow ascending original category id.
  std::map<long long, std::string> categories;
  for (const auto& c : doc["categories"]) {
    if (!c.is_object() || !c.contains("id") || !c["id"].is_number_integer() || !c.contains("name") ||
        !c["name"].is_string()) {
      throw Error(ErrorCode::kFormat, "category entries need integer 'id' and string 'name'");
    }
    if (!categories.emplace(c["id"].get<long long>(), c["name"].get<std::string>()).second) {
      throw Error(ErrorCode::kFormat, "duplicate category id " + std::to_string(c["id"].get<long long>()));
    }
  }
  std::vector<std::string> names;
  std::unordered_map<long long, ClassId> remap;
  for (const auto& [orig, name] : categories) {
    remap.emplace(orig, static_cast<ClassId>(names.size()));
    names.push_back(name);
  }

  CocoAnnotations out;
  try {
    out.vocabulary = Vocabulary(std::move(names));
  } catch (const Error& e) {
    throw Error(ErrorCode::kFormat, std::string("COCO categories: ") + e.what());
  }

  std::unordered_set<std::string> image_ids;
  for (const auto& img : doc["images"]) {
    if (!img.is_object() || !img.contains("id")) throw Error(ErrorCode::kFormat, "image entries need an 'id'");
    CocoImage ci;
    ci.image_id = detail::id_text(img["id"], "image id");
    if (ci.image_id.empty()) throw Error(ErrorCode::kFormat, "image id is empty");
    if (img.contains("width") && img["width"].is_number_integer()) ci.width = img["width"].get<int>();
    if (img.contains("height") && img["height"].is_number_integer()) ci.height = img["height"].get<int>();
    if (!image_ids.insert(ci.image_id).second) throw Error(ErrorCode::kFormat, "duplicate image id " + ci.image_id);
    out.images.push_back(std::move(ci));
  }

  std::size_t index = 0;
  for (const auto& ann : doc["annotations"]) {
    const std::string where = "annotation " + std::to_string(index++);
    if (!ann.is_object() || !ann.contains("image_id") || !ann.contains("category_id") || !ann.contains("bbox")) {
      throw Error(ErrorCode::kFormat, where + ": needs 'image_id', 'category_id' and 'bbox'");
    }
    GroundTruthBox box;
    box.image_id = detail::id_text(ann["image_id"], where + " image_id");
    if (!image_ids.contains(box.image_id)) {
      throw Error(ErrorCode::kReferentialIntegrity, where + " references unknown image id " + box.image_id);
    }
    if (!ann["category_id"].is_number_integer()) throw Error(ErrorCode::kFormat, where + ": category_id not integer");
    auto cat = remap.find(ann["category_id"].get<long long>());
    if (cat == remap.end()) {
      throw Error(ErrorCode::kReferentialIntegrity,
                  where + " references unknown category id " + std::to_string(ann["category_id"].get<long long>()));
    }
    box.class_id = cat->second;
    box.bbox = detail::parse_bbox(ann["bbox"], ErrorCode::kFormat, where);
    out.boxes.push_back(std::move(box));
  }
  return out;
}

inline Vocabulary read_coco_vocabulary(const std::string& path) { return read_coco_annotations(path).vocabulary; }

inline std::vector<GroundTruthBox> read_ground_truth_boxes(const std::string& path) {
  return read_coco_annotations(path).boxes;
}

// One transaction per listed image; images without annotations are left
// out and counted.
inline CocoGroundTruth ground_truth_transactions(const CocoAnnotations& coco, const std::string& source_tag) {
  std::unordered_map<std::string, std::vector<ClassId>> labels;
  for (const auto& b : coco.boxes) labels[b.image_id].push_back(b.class_id);

  CocoGroundTruth out;
  std::vector<Transaction> txs;
  for (const auto& img : coco.images) {
    auto it = labels.find(img.image_id);
    if (it == labels.end()) {
      ++out.images_without_annotations;
      continue;
    }
    txs.push_back({img.image_id, Itemset::from_unsorted(it->second)});
  }
  out.db = TransactionDb(coco.vocabulary, std::move(txs), source_tag);
  return out;
}

inline CocoGroundTruth read_coco_ground_truth(const std::string& path) {
  return ground_truth_transactions(read_coco_annotations(path), "coco:" + detail::source_name(path));
}

inline std::vector<DetectionRecord> parse_detection_records(std::istream& in) {
  std::vector<DetectionRecord> records;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto rec = detail::parse_detection_line(line, line_no);
    if (!seen.insert(rec.image_id).second) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": duplicate image_id '" + rec.image_id + "'");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

// Maps every detection's category onto `vocab`; used where no threshold or
// transaction building applies (evaluation).
inline void resolve_categories(std::vector<DetectionRecord>& records, const Vocabulary& vocab) {
  for (auto& r : records) {
    for (auto& d : r.detections) {
      auto id = vocab.find(d.category);
      if (!id) throw Error(ErrorCode::kUnknownClass, "image '" + r.image_id + "': unknown category '" + d.category + "'");
      d.class_id = *id;
    }
  }
}

// Thresholds and deduplicates labels per image. The vocabulary either comes
// from the caller or, when absent, from category first appearance.
inline DetectionIngest ingest_detections(std::vector<DetectionRecord> records, const IngestConfig& cfg,
                                         const std::optional<Vocabulary>& vocabulary, const std::string& source_tag) {
  cfg.validate();
  if (records.empty()) throw Error(ErrorCode::kEmptyDb, "detections input holds no records");

  Vocabulary vocab;
  if (vocabulary) {
    vocab = *vocabulary;
  } else {
    std::vector<std::string> names;
    std::unordered_set<std::string> seen;
    for (const auto& r : records) {
      for (const auto& d : r.detections) {
        if (seen.insert(d.category).second) names.push_back(d.category);
      }
    }
    vocab = Vocabulary(std::move(names));
  }

  DetectionIngest out;
  std::vector<Transaction> txs;
  for (auto& r : records) {
    std::vector<ClassId> kept;
    for (auto& d : r.detections) {
      auto id = vocab.find(d.category);
      if (!id) throw Error(ErrorCode::kUnknownClass, "image '" + r.image_id + "': unknown category '" + d.category + "'");
      d.class_id = *id;
      if (d.score >= cfg.score_threshold) kept.push_back(*id);
    }
    if (kept.empty()) {
      ++out.images_dropped;
      out.warnings.push_back("image '" + r.image_id + "' has no detection at score >= threshold; excluded");
      continue;
    }
    txs.push_back({r.image_id, Itemset::from_unsorted(std::move(kept))});
  }
  if (txs.empty()) throw Error(ErrorCode::kEmptyDb, "no image kept a detection at the score threshold");

  std::ostringstream tag;
  tag << source_tag << "|score>=" << cfg.score_threshold;
  out.db = TransactionDb(std::move(vocab), std::move(txs), tag.str());
  out.records = std::move(records);
  return out;
}

inline DetectionIngest read_detections_jsonl(const std::string& path, const IngestConfig& cfg) {
  cfg.validate();
  std::optional<Vocabulary> vocab;
  if (cfg.vocabulary_source == VocabularySource::kFromCocoCategories) {
    vocab = read_coco_vocabulary(cfg.coco_categories_path);
  }
  auto in = detail::open_input(path);
  return ingest_detections(parse_detection_records(in), cfg, vocab, "detections:" + detail::source_name(path));
}

inline void write_detections_jsonl(const std::vector<DetectionRecord>& records, std::ostream& out) {
  for (const auto& r : records) {
    detail::ordered_json obj;
    obj["image_id"] = r.image_id;
    obj["width"] = r.width;
    obj["height"] = r.height;
    obj["detections"] = detail::ordered_json::array();
    for (const auto& d : r.detections) {
      detail::ordered_json det;
      det["category"] = d.category;
      det["score"] = d.score;
      det["bbox"] = {d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h};
      obj["detections"].push_back(std::move(det));
    }
    out << obj.dump() << '\n';
  }
}

// Transactions artifact: a header line, then one labels-only line per image.
inline constexpr const char* kTransactionsFormat = "cooc-transactions";

inline void write_transactions(const TransactionDb& db, std::ostream& out) {
  detail::ordered_json header;
  header["format"] = kTransactionsFormat;
  header["version"] = 1;
  header["source"] = db.source_tag();
  header["vocabulary"] = db.vocabulary().names();
  out << header.dump() << '\n';
  for (const auto& t : db.transactions()) {
    detail::ordered_json line;
    line["image_id"] = t.image_id;
    line["labels"] = detail::ordered_json::array();
    for (auto id : t.labels) line["labels"].push_back(db.vocabulary().name(id));
    out << line.dump() << '\n';
  }
}

inline TransactionDb parse_transactions(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto parse = [&](const std::string& text) {
    try {
      return detail::json::parse(text);
    } catch (const detail::json::parse_error& e) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": " + e.what());
    }
  };

  std::optional<Vocabulary> vocab;
  std::string source;
  std::vector<Transaction> txs;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto obj = parse(line);
    const std::string where = "line " + std::to_string(line_no);
    if (!vocab) {
      if (!obj.is_object() || obj.value("format", "") != kTransactionsFormat || !obj.contains("vocabulary") ||
          !obj["vocabulary"].is_array()) {
        throw Error(ErrorCode::kFormat, where + ": not a transactions file header");
      }
      try {
        vocab = Vocabulary(obj["vocabulary"].get<std::vector<std::string>>());
      } catch (const detail::json::exception& e) {
        throw Error(ErrorCode::kFormat, where + ": " + e.what());
      }
      source = obj.value("source", "");
      continue;
    }
    if (!obj.is_object() || !obj.contains("image_id") || !obj["image_id"].is_string() || !obj.contains("labels") ||
        !obj["labels"].is_array()) {
      throw Error(ErrorCode::kParse, where + ": transaction needs 'image_id' and 'labels'");
    }
    std::vector<ClassId> ids;
    for (const auto& l : obj["labels"]) {
      if (!l.is_string()) throw Error(ErrorCode::kParse, where + ": labels must be strings");
      ids.push_back(vocab->id(l.get<std::string>()));
    }
    txs.push_back({obj["image_id"].get<std::string>(), Itemset::from_unsorted(std::move(ids))});
  }
  if (!vocab) throw Error(ErrorCode::kFormat, "transactions file has no header");
  try {
    return TransactionDb(std::move(*vocab), std::move(txs), std::move(source));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidArgument) throw Error(ErrorCode::kFormat, e.what());
    throw;
  }
}

inline TransactionDb read_transactions(const std::string& path) {
  auto in = detail::open_input(path);
  return parse_transactions(in);
}

}  // namespace cooc
