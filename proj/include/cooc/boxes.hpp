#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cooc/core_model.hpp"

namespace cooc {

// Pixel box, (x, y) is the top-left corner.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  bool valid() const { return w > 0.0 && h > 0.0; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

struct Detection {
  std::string category;
  ClassId class_id = 0;
  double score = 0.0;
  BBox bbox;

  friend bool operator==(const Detection&, const Detection&) = default;
};

// One image of detector output.
struct DetectionRecord {
  std::string image_id;
  int width = 0;
  int height = 0;
  std::vector<Detection> detections;

  friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

struct GroundTruthBox {
  std::string image_id;
  ClassId class_id = 0;
  BBox bbox;

  friend bool operator==(const GroundTruthBox&, const GroundTruthBox&) = default;
};

}  // namespace cooc
