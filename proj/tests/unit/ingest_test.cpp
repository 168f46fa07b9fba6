#include <sstream>

#include <gtest/gtest.h>

#include "cooc/ingest.hpp"
#include "support/fixtures.hpp"

namespace cooc {
namespace {

using testing::TempDir;
using testing::write_text;

const char* kOneImage =
    R"({"image_id":"img1","width":640,"height":480,"detections":[)"
    R"({"category":"dog","score":0.9,"bbox":[1,2,30,40]},)"
    R"({"category":"dog","score":0.8,"bbox":[50,2,30,40]},)"
    R"({"category":"person","score":0.6,"bbox":[5,5,20,60]}]})"
    "\n";

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kInternalConsistency;
}

TEST(ReadDetectionsTest, ThresholdThenDedup) {
  TempDir dir("det");
  write_text(dir.file("d.jsonl"), kOneImage);
  const auto result = read_detections_jsonl(dir.file("d.jsonl"), IngestConfig{});
  ASSERT_EQ(result.db.size(), 1u);
  const auto& vocab = result.db.vocabulary();
  EXPECT_EQ(vocab.names(), (std::vector<std::string>{"dog", "person"}));
  EXPECT_EQ(result.db.transactions()[0].labels, (Itemset{vocab.id("dog"), vocab.id("person")}));
  ASSERT_EQ(result.records.size(), 1u);
  EXPECT_EQ(result.records[0].detections.size(), 3u);
  EXPECT_EQ(result.records[0].detections[2].class_id, vocab.id("person"));
}

TEST(ReadDetectionsTest, AllFilteredImageIsExcluded) {
  TempDir dir("det");
  write_text(dir.file("d.jsonl"),
             std::string(kOneImage) +
                 R"({"image_id":"img2","width":10,"height":10,"detections":[{"category":"dog","score":0.99,"bbox":[0,0,1,1]}]})" +
                 "\n");
  IngestConfig cfg;
  cfg.score_threshold = 0.95;
  const auto result = read_detections_jsonl(dir.file("d.jsonl"), cfg);
  EXPECT_EQ(result.db.size(), 1u);
  EXPECT_EQ(result.db.transactions()[0].image_id, "img2");
  EXPECT_EQ(result.images_dropped, 1u);
  EXPECT_EQ(result.warnings.size(), 1u);
}

TEST(ReadDetectionsTest, OnlyImageFilteredIsEmptyDb) {
  TempDir dir("det");
  write_text(dir.file("d.jsonl"), kOneImage);
  IngestConfig cfg;
  cfg.score_threshold = 0.95;
  EXPECT_EQ(code_of([&] { read_detections_jsonl(dir.file("d.jsonl"), cfg); }), ErrorCode::kEmptyDb);
}

TEST(ReadDetectionsTest, EmptyFile) {
  TempDir dir("det");
  write_text(dir.file("d.jsonl"), "");
  EXPECT_EQ(code_of([&] { read_detections_jsonl(dir.file("d.jsonl"), IngestConfig{}); }), ErrorCode::kEmptyDb);
}

TEST(ReadDetectionsTest, MalformedLineNamesLine) {
  TempDir dir("det");
  write_text(dir.file("d.jsonl"), std::string(kOneImage) + "{not json\n");
  try {
    read_detections_jsonl(dir.file("d.jsonl"), IngestConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(ReadDetectionsTest, SchemaViolations) {
  TempDir dir("det");
  const std::vector<std::string> bad = {
      R"({"image_id":"a","width":0,"height":1,"detections":[]})",
      R"({"image_id":"a","width":1,"height":1,"detections":[{"category":"x","score":1.5,"bbox":[0,0,1,1]}]})",
      R"({"image_id":"a","width":1,"height":1,"detections":[{"category":"x","score":0.5,"bbox":[0,0,0,1]}]})",
      R"({"image_id":"","width":1,"height":1,"detections":[]})",
      R"({"image_id":"a","width":1,"height":1})",
  };
  for (const auto& line : bad) {
    write_text(dir.file("d.jsonl"), line + "\n");
    EXPECT_EQ(code_of([&] { read_detections_jsonl(dir.file("d.jsonl"), IngestConfig{}); }), ErrorCode::kParse)
        << line;
  }
  write_text(dir.file("d.jsonl"), std::string(kOneImage) + kOneImage);
  EXPECT_EQ(code_of([&] { read_detections_jsonl(dir.file("d.jsonl"), IngestConfig{}); }), ErrorCode::kParse);
}

TEST(ReadDetectionsTest, UnknownCategoryAgainstCocoVocabulary) {
  TempDir dir("det");
  write_text(dir.file("d.jsonl"), kOneImage);
  write_text(dir.file("gt.json"),
             R"({"images":[],"annotations":[],"categories":[{"id":1,"name":"person"},{"id":2,"name":"cat"}]})");
  IngestConfig cfg;
  cfg.vocabulary_source = VocabularySource::kFromCocoCategories;
  cfg.coco_categories_path = dir.file("gt.json");
  try {
    read_detections_jsonl(dir.file("d.jsonl"), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownClass);
    EXPECT_NE(std::string(e.what()).find("dog"), std::string::npos);
  }
}

TEST(ReadDetectionsTest, HigherThresholdGivesSubsets) {
  testing::Rng rng(4);
  TempDir dir("det");
  std::vector<DetectionRecord> records;
  for (int i = 0; i < 40; ++i) {
    DetectionRecord r{"im" + std::to_string(i), 100, 100, {}};
    for (int k = 0; k < 6; ++k) {
      r.detections.push_back({"c" + std::to_string(rng.below(5)), 0, rng.unit(), {1, 1, 5, 5}});
    }
    records.push_back(r);
  }
  std::ostringstream ss;
  write_detections_jsonl(records, ss);
  write_text(dir.file("d.jsonl"), ss.str());

  IngestConfig lo, hi;
  lo.score_threshold = 0.3;
  hi.score_threshold = 0.6;
  const auto a = read_detections_jsonl(dir.file("d.jsonl"), lo);
  const auto b = read_detections_jsonl(dir.file("d.jsonl"), hi);
  EXPECT_EQ(a.db.vocabulary(), b.db.vocabulary());
  std::map<std::string, Itemset> low;
  for (const auto& t : a.db.transactions()) low[t.image_id] = t.labels;
  for (const auto& t : b.db.transactions()) {
    ASSERT_TRUE(low.contains(t.image_id));
    EXPECT_TRUE(t.labels.is_subset_of(low[t.image_id]));
  }

  // Round trip: re-serialised records re-ingest to the same db.
  std::ostringstream again;
  write_detections_jsonl(a.records, again);
  EXPECT_EQ(again.str(), ss.str());
  write_text(dir.file("d2.jsonl"), again.str());
  const auto c = read_detections_jsonl(dir.file("d2.jsonl"), lo);
  EXPECT_EQ(c.db.transactions(), a.db.transactions());
  EXPECT_EQ(c.db.vocabulary(), a.db.vocabulary());
}

const char* kCoco = R"({
  "info": {"year": 2017},
  "images": [{"id": 10, "width": 64, "height": 48}, {"id": 11}, {"id": 12}],
  "annotations": [
    {"id": 1, "image_id": 10, "category_id": 5, "bbox": [0, 0, 10, 10]},
    {"id": 2, "image_id": 10, "category_id": 5, "bbox": [20, 0, 10, 10]},
    {"id": 3, "image_id": 11, "category_id": 5, "bbox": [0, 0, 4, 4]},
    {"id": 4, "image_id": 11, "category_id": 2, "bbox": [1, 1, 4, 4]}
  ],
  "categories": [{"id": 5, "name": "dog"}, {"id": 2, "name": "person"}]
})";

TEST(CocoTest, GroundTruthTransactions) {
  TempDir dir("coco");
  write_text(dir.file("gt.json"), kCoco);
  const auto gt = read_coco_ground_truth(dir.file("gt.json"));
  // ids remapped by ascending original id: person(2) -> 0, dog(5) -> 1
  EXPECT_EQ(gt.db.vocabulary().names(), (std::vector<std::string>{"person", "dog"}));
  ASSERT_EQ(gt.db.size(), 2u);
  EXPECT_EQ(gt.db.transactions()[0].image_id, "10");
  EXPECT_EQ(gt.db.transactions()[0].labels.size(), 1u);
  EXPECT_EQ(gt.db.transactions()[1].labels.size(), 2u);
  EXPECT_EQ(gt.images_without_annotations, 1u);
}

TEST(CocoTest, Boxes) {
  TempDir dir("coco");
  write_text(dir.file("gt.json"), kCoco);
  const auto boxes = read_ground_truth_boxes(dir.file("gt.json"));
  ASSERT_EQ(boxes.size(), 4u);
  EXPECT_EQ(boxes[3], (GroundTruthBox{"11", 0, {1, 1, 4, 4}}));

  // Round trip through a fixture-written file.
  nlohmann::json doc;
  doc["images"] = {{{"id", 10}}, {{"id", 11}}};
  doc["categories"] = {{{"id", 2}, {"name", "person"}}, {{"id", 5}, {"name", "dog"}}};
  doc["annotations"] = nlohmann::json::array();
  for (const auto& b : boxes) {
    doc["annotations"].push_back({{"image_id", std::stoi(b.image_id)},
                                  {"category_id", b.class_id == 0 ? 2 : 5},
                                  {"bbox", {b.bbox.x, b.bbox.y, b.bbox.w, b.bbox.h}}});
  }
  write_text(dir.file("rt.json"), doc.dump());
  EXPECT_EQ(read_ground_truth_boxes(dir.file("rt.json")), boxes);
}

TEST(CocoTest, Errors) {
  TempDir dir("coco");
  write_text(dir.file("a.json"), R"({"images":[],"categories":[]})");
  EXPECT_EQ(code_of([&] { read_coco_ground_truth(dir.file("a.json")); }), ErrorCode::kFormat);
  write_text(dir.file("b.json"),
             R"({"images":[{"id":1}],"annotations":[{"image_id":2,"category_id":1,"bbox":[0,0,1,1]}],"categories":[{"id":1,"name":"a"}]})");
  EXPECT_EQ(code_of([&] { read_coco_ground_truth(dir.file("b.json")); }), ErrorCode::kReferentialIntegrity);
  write_text(dir.file("c.json"),
             R"({"images":[{"id":1}],"annotations":[{"image_id":1,"category_id":9,"bbox":[0,0,1,1]}],"categories":[{"id":1,"name":"a"}]})");
  EXPECT_EQ(code_of([&] { read_coco_ground_truth(dir.file("c.json")); }), ErrorCode::kReferentialIntegrity);
  write_text(dir.file("d.json"),
             R"({"images":[{"id":1}],"annotations":[{"image_id":1,"category_id":1,"bbox":[0,0,0,1]}],"categories":[{"id":1,"name":"a"}]})");
  EXPECT_EQ(code_of([&] { read_ground_truth_boxes(dir.file("d.json")); }), ErrorCode::kFormat);
  EXPECT_EQ(code_of([&] { read_coco_ground_truth(dir.file("missing.json")); }), ErrorCode::kIo);
}

TEST(TransactionsFileTest, RoundTripIsByteStable) {
  const auto db = testing::micro_db();
  std::ostringstream first;
  write_transactions(db, first);
  std::istringstream in(first.str());
  const auto back = parse_transactions(in);
  EXPECT_EQ(back, db);
  std::ostringstream second;
  write_transactions(back, second);
  EXPECT_EQ(first.str(), second.str());
}

TEST(TransactionsFileTest, RejectsMissingHeaderAndUnknownLabels) {
  std::istringstream no_header(R"({"image_id":"a","labels":["x"]})");
  EXPECT_EQ(code_of([&] { parse_transactions(no_header); }), ErrorCode::kFormat);
  std::istringstream unknown(
      R"({"format":"cooc-transactions","version":1,"source":"","vocabulary":["a"]})"
      "\n"
      R"({"image_id":"i","labels":["b"]})");
  EXPECT_EQ(code_of([&] { parse_transactions(unknown); }), ErrorCode::kUnknownClass);
}

}  // namespace
}  // namespace cooc
