#pragma once

// Byte-stable CSV/JSON rendering. Every fraction is printed with six
// decimals, rounded half-up. Ratios of counts are rounded exactly in
// integer arithmetic; other reals go through their exact decimal expansion.

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cooc/cooccurrence.hpp"
#include "cooc/core_model.hpp"
#include "cooc/detector_eval.hpp"
#include "cooc/miner.hpp"

namespace cooc {

namespace detail {

inline std::string with_six_decimals(unsigned __int128 scaled) {
  const auto whole = static_cast<std::uint64_t>(scaled / 1000000);
  const auto frac = static_cast<std::uint64_t>(scaled % 1000000);
  std::string f = std::to_string(frac);
  return std::to_string(whole) + "." + std::string(6 - f.size(), '0') + f;
}

}  // namespace detail

inline std::string format_ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) throw Error(ErrorCode::kInvalidArgument, "ratio with zero denominator");
  const unsigned __int128 n = static_cast<unsigned __int128>(num) * 1000000;
  unsigned __int128 q = n / den;
  const unsigned __int128 r = n % den;
  if (2 * r >= den) ++q;
  return detail::with_six_decimals(q);
}

inline std::string format_fixed6(double v) {
  if (!(v >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "format_fixed6 expects a non-negative number");
  // 60 digits reach far below the spacing of doubles in the ranges we print.
  char buf[512];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 60);
  const std::string_view s(buf, static_cast<std::size_t>(res.ptr - buf));
  const auto dot = s.find('.');
  unsigned __int128 scaled = 0;
  for (char c : s.substr(0, dot)) scaled = scaled * 10 + static_cast<unsigned>(c - '0');
  for (std::size_t i = 1; i <= 6; ++i) scaled = scaled * 10 + static_cast<unsigned>(s[dot + i] - '0');
  if (s[dot + 7] >= '5') ++scaled;
  return detail::with_six_decimals(scaled);
}

inline std::string csv_field(std::string_view v) {
  if (v.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(v);
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::string itemset_names(const Vocabulary& vocab, const Itemset& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += '|';
    out += vocab.name(s[i]);
  }
  return out;
}

// `bases`, when given, labels each block of itemsets with its base class
// and adds a leading base column.
struct BaseBlock {
  ClassId base;
  const std::vector<FrequentItemset>* itemsets;
};

inline std::string render_frequent_csv(const Vocabulary& vocab, const std::vector<FrequentItemset>& fis) {
  std::string out = "itemset,size,support,count\n";
  for (const auto& fi : fis) {
    out += csv_field(itemset_names(vocab, fi.itemset)) + "," + std::to_string(fi.itemset.size()) + "," +
           format_ratio(fi.count, fi.denominator) + "," + std::to_string(fi.count) + "\n";
  }
  return out;
}

inline std::string render_frequent_csv(const Vocabulary& vocab, const std::vector<BaseBlock>& blocks) {
  std::string out = "base,itemset,size,support,count\n";
  for (const auto& b : blocks) {
    const std::string base = csv_field(vocab.name(b.base));
    for (const auto& fi : *b.itemsets) {
      out += base + "," + csv_field(itemset_names(vocab, fi.itemset)) + "," + std::to_string(fi.itemset.size()) +
             "," + format_ratio(fi.count, fi.denominator) + "," + std::to_string(fi.count) + "\n";
    }
  }
  return out;
}

inline std::string rule_row(const Vocabulary& vocab, const AssociationRule& r) {
  return csv_field(itemset_names(vocab, r.antecedent)) + "," + csv_field(itemset_names(vocab, r.consequent)) + "," +
         format_ratio(r.joint_count, r.denominator) + "," + format_ratio(r.joint_count, r.antecedent_count) + "," +
         format_ratio(static_cast<std::uint64_t>(r.joint_count) * r.denominator,
                      static_cast<std::uint64_t>(r.antecedent_count) * r.consequent_count) +
         "\n";
}

inline std::string render_rules_csv(const Vocabulary& vocab, const std::vector<AssociationRule>& rules) {
  std::string out = "antecedent,consequent,support,confidence,lift\n";
  for (const auto& r : rules) out += rule_row(vocab, r);
  return out;
}

inline std::string render_rules_csv(const Vocabulary& vocab,
                                    const std::vector<std::pair<ClassId, std::vector<AssociationRule>>>& per_base) {
  std::string out = "base,antecedent,consequent,support,confidence,lift\n";
  for (const auto& [base, rules] : per_base) {
    for (const auto& r : rules) out += csv_field(vocab.name(base)) + "," + rule_row(vocab, r);
  }
  return out;
}

inline std::string render_base_classes_csv(const Vocabulary& vocab, const BaseClassReport& report,
                                           std::size_t denominator) {
  std::string out = "class,image_count,image_frequency\n";
  for (const auto& e : report.entries) {
    out += csv_field(vocab.name(e.class_id)) + "," + std::to_string(e.image_count) + "," +
           format_ratio(e.image_count, denominator) + "\n";
  }
  return out;
}

inline std::string render_matrix_csv(const Vocabulary& vocab, const CooccurrenceMatrix& m) {
  std::string out = "class";
  for (const auto& name : vocab.names()) out += "," + csv_field(name);
  out += "\n";
  for (ClassId a = 0; a < m.size(); ++a) {
    out += csv_field(vocab.name(a));
    for (ClassId b = 0; b < m.size(); ++b) out += "," + std::to_string(m.at(a, b));
    out += "\n";
  }
  return out;
}

inline std::string render_fig2_csv(const Vocabulary& vocab, const std::vector<Fig2Row>& rows) {
  std::string out = "base_class,num_cooccurring\n";
  for (const auto& r : rows) out += csv_field(vocab.name(r.base)) + "," + std::to_string(r.num_cooccurring) + "\n";
  return out;
}

inline std::string render_fig3_csv(const std::vector<Fig3Row>& rows) {
  std::string out = "itemset_size,count\n";
  for (const auto& r : rows) out += std::to_string(r.itemset_size) + "," + std::to_string(r.count) + "\n";
  return out;
}

// Per-base companion classes with their raw joint counts.
inline std::string render_cooccurring_csv(const Vocabulary& vocab, const std::vector<BaseCooccurrence>& per_base) {
  std::string out = "base_class,class,joint_count,conditional_frequency\n";
  for (const auto& b : per_base) {
    for (const auto& c : b.cooccurring) {
      out += csv_field(vocab.name(b.base)) + "," + csv_field(vocab.name(c.class_id)) + "," +
             std::to_string(c.joint_count) + "," + format_ratio(c.joint_count, b.base_count) + "\n";
    }
  }
  return out;
}

// Per-class rows followed by a final "mAP" row carrying N and the mean.
inline std::string render_eval_csv(const Vocabulary& vocab, const MapResult& r) {
  std::string out = "class,num_gt,ap\n";
  for (const auto& c : r.per_class) {
    out += csv_field(vocab.name(c.class_id)) + "," + std::to_string(c.num_gt) + "," + format_fixed6(c.ap) + "\n";
  }
  out += "mAP," + std::to_string(r.num_classes) + "," + format_fixed6(r.map) + "\n";
  return out;
}

inline std::string render_eval_json(const Vocabulary& vocab, const MapResult& r, const EvalConfig& cfg) {
  nlohmann::ordered_json doc;
  doc["iou_threshold"] = cfg.iou_threshold;
  doc["interpolation"] = cfg.interpolation == Interpolation::kAllPoint ? "all" : "11pt";
  doc["map"] = r.map;
  doc["num_classes"] = r.num_classes;
  doc["per_class"] = nlohmann::ordered_json::array();
  for (const auto& c : r.per_class) {
    nlohmann::ordered_json entry;
    entry["class"] = vocab.name(c.class_id);
    entry["num_gt"] = c.num_gt;
    entry["ap"] = c.ap;
    entry["pr_points"] = nlohmann::ordered_json::array();
    for (const auto& p : c.pr_points) entry["pr_points"].push_back({p.recall, p.precision});
    doc["per_class"].push_back(std::move(entry));
  }
  return doc.dump(2) + "\n";
}

}  // namespace cooc
