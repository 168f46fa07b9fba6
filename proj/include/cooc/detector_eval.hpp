#pragma once

// IoU matching, per-class average precision and their mean (mAP).

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "cooc/boxes.hpp"
#include "cooc/error.hpp"

namespace cooc {

enum class Interpolation { kAllPoint, kElevenPoint };

struct EvalConfig {
  double iou_threshold = 0.5;
  Interpolation interpolation = Interpolation::kAllPoint;

  void validate() const {
    if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "iou_threshold must be in (0,1)");
    }
  }
};

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};

struct ApResult {
  ClassId class_id = 0;
  double ap = 0.0;
  std::vector<PrPoint> pr_points;
  std::size_t num_gt = 0;
};

struct MapResult {
  std::vector<ApResult> per_class;  // ascending class id
  double map = 0.0;
  std::size_t num_classes = 0;
};

struct ScoredMatch {
  double score = 0.0;
  bool true_positive = false;
};

// Ranked detections of one class plus its ground-truth count.
struct ClassMatches {
  ClassId class_id = 0;
  std::vector<ScoredMatch> ranked;
  std::size_t num_gt = 0;
};

inline double iou(const BBox& a, const BBox& b) {
  if (!a.valid() || !b.valid()) throw Error(ErrorCode::kInvalidArgument, "iou needs positive box dimensions");
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  if (inter <= 0.0) return 0.0;
  return inter / (a.w * a.h + b.w * b.h - inter);
}

// Greedy matching per class: detections in descending score (ties keep
// input order) each take the unmatched same-image ground truth with the
// highest IoU, provided it reaches the threshold.
inline std::vector<ClassMatches> match_detections(const std::vector<DetectionRecord>& records,
                                                  const std::vector<GroundTruthBox>& gts, std::size_t num_classes,
                                                  const EvalConfig& cfg) {
  cfg.validate();
  std::vector<ClassMatches> out(num_classes);
  for (ClassId c = 0; c < num_classes; ++c) out[c].class_id = c;

  std::map<std::pair<std::string, ClassId>, std::vector<std::size_t>> gt_index;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    if (gts[g].class_id >= num_classes) throw Error(ErrorCode::kUnknownClass, "ground truth class outside vocabulary");
    gt_index[{gts[g].image_id, gts[g].class_id}].push_back(g);
    ++out[gts[g].class_id].num_gt;
  }

  struct Candidate {
    const std::string* image_id;
    const Detection* det;
  };
  std::vector<std::vector<Candidate>> per_class(num_classes);
  for (const auto& r : records) {
    for (const auto& d : r.detections) {
      if (d.class_id >= num_classes) throw Error(ErrorCode::kUnknownClass, "detection class outside vocabulary");
      per_class[d.class_id].push_back({&r.image_id, &d});
    }
  }

  std::vector<bool> used(gts.size(), false);
  for (ClassId c = 0; c < num_classes; ++c) {
    auto& cands = per_class[c];
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) { return a.det->score > b.det->score; });
    for (const auto& cand : cands) {
      bool tp = false;
      auto it = gt_index.find({*cand.image_id, c});
      if (it != gt_index.end()) {
        double best = -1.0;
        std::size_t best_g = 0;
        for (auto g : it->second) {
          if (used[g]) continue;
          const double o = iou(cand.det->bbox, gts[g].bbox);
          if (o > best) {
            best = o;
            best_g = g;
          }
        }
        if (best >= cfg.iou_threshold) {
          used[best_g] = true;
          tp = true;
        }
      }
      out[c].ranked.push_back({cand.det->score, tp});
    }
  }
  return out;
}

// `ranked` must already be in rank order. Recall only moves at true
// positives, by exactly 1/num_gt, so AP is accumulated per true positive
// and divided once.
inline ApResult average_precision(const std::vector<ScoredMatch>& ranked, std::size_t num_gt, const EvalConfig& cfg,
                                  ClassId class_id = 0) {
  if (num_gt == 0) throw Error(ErrorCode::kInvalidArgument, "average precision needs at least one ground truth");
  ApResult result;
  result.class_id = class_id;
  result.num_gt = num_gt;
  if (ranked.empty()) return result;

  std::vector<std::size_t> tps;
  tps.reserve(ranked.size());
  std::size_t tp = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    tp += ranked[i].true_positive;
    tps.push_back(tp);
    result.pr_points.push_back({static_cast<double>(tp) / static_cast<double>(num_gt),
                                static_cast<double>(tp) / static_cast<double>(i + 1)});
  }

  // envelope[i] = max precision at rank >= i
  std::vector<double> envelope(ranked.size());
  double running = 0.0;
  for (std::size_t i = ranked.size(); i-- > 0;) {
    running = std::max(running, result.pr_points[i].precision);
    envelope[i] = running;
  }

  if (cfg.interpolation == Interpolation::kAllPoint) {
    double sum = 0.0;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      if (ranked[i].true_positive) sum += envelope[i];
    }
    result.ap = sum / static_cast<double>(num_gt);
  } else {
    double sum = 0.0;
    for (std::size_t t = 0; t <= 10; ++t) {
      // first rank whose recall reaches t/10, compared in integers
      auto it = std::find_if(tps.begin(), tps.end(), [&](std::size_t v) { return v * 10 >= t * num_gt; });
      if (it != tps.end()) sum += envelope[static_cast<std::size_t>(it - tps.begin())];
    }
    result.ap = sum / 11.0;
  }
  return result;
}

inline MapResult mean_average_precision(std::vector<ApResult> per_class) {
  std::erase_if(per_class, [](const ApResult& r) { return r.num_gt == 0; });
  if (per_class.empty()) throw Error(ErrorCode::kNoEvaluableClasses, "no class has ground truth");
  MapResult out;
  out.num_classes = per_class.size();
  double sum = 0.0;
  for (const auto& r : per_class) sum += r.ap;
  out.map = sum / static_cast<double>(out.num_classes);
  out.per_class = std::move(per_class);
  return out;
}

inline MapResult evaluate(const std::vector<DetectionRecord>& records, const std::vector<GroundTruthBox>& gts,
                          std::size_t num_classes, const EvalConfig& cfg) {
  auto matches = match_detections(records, gts, num_classes, cfg);
  std::vector<ApResult> per_class;
  for (const auto& m : matches) {
    if (m.num_gt == 0) continue;
    per_class.push_back(average_precision(m.ranked, m.num_gt, cfg, m.class_id));
  }
  return mean_average_precision(std::move(per_class));
}

}  // namespace cooc
