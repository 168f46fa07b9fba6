#pragma once

// Base classes, the class x class co-occurrence matrix and per-base
// co-occurring classes.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <future>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cooc/core_model.hpp"
#include "cooc/miner.hpp"

namespace cooc {

struct BasePolicy {
  enum class Kind { kTopK, kFrequencyThreshold };

  Kind kind = Kind::kTopK;
  std::size_t k = 10;
  double threshold = 0.0;

  static BasePolicy top_k(std::size_t k) { return {Kind::kTopK, k, 0.0}; }
  static BasePolicy frequency_threshold(double t) { return {Kind::kFrequencyThreshold, 0, t}; }

  void validate() const {
    if (kind == Kind::kTopK && k < 1) throw Error(ErrorCode::kInvalidArgument, "top-k needs k >= 1");
    if (kind == Kind::kFrequencyThreshold && !(threshold > 0.0 && threshold <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "base frequency threshold must be in (0,1]");
    }
  }
};

struct BaseClassEntry {
  ClassId class_id = 0;
  double image_frequency = 0.0;
  std::size_t image_count = 0;
};

struct BaseClassReport {
  std::vector<BaseClassEntry> entries;  // descending frequency, ties by ascending id
  std::vector<std::string> warnings;

  std::vector<ClassId> ids() const {
    std::vector<ClassId> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.class_id);
    return out;
  }
};

// Symmetric joint-image counts; (a, a) is the number of images holding a.
class CooccurrenceMatrix {
 public:
  explicit CooccurrenceMatrix(std::size_t n = 0) : n_(n), counts_(n * n, 0) {}

  std::size_t size() const noexcept { return n_; }
  std::uint64_t at(ClassId a, ClassId b) const { return counts_.at(index(a, b)); }
  std::uint64_t diagonal(ClassId a) const { return at(a, a); }

  void add_transaction(const Itemset& labels) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      ++counts_[index(labels[i], labels[i])];
      for (std::size_t j = i + 1; j < labels.size(); ++j) {
        ++counts_[index(labels[i], labels[j])];
        ++counts_[index(labels[j], labels[i])];
      }
    }
  }

  friend bool operator==(const CooccurrenceMatrix&, const CooccurrenceMatrix&) = default;

 private:
  std::size_t index(ClassId a, ClassId b) const {
    if (a >= n_ || b >= n_) throw Error(ErrorCode::kUnknownClass, "matrix index outside vocabulary");
    return static_cast<std::size_t>(a) * n_ + b;
  }

  std::size_t n_;
  std::vector<std::uint64_t> counts_;
};

struct CooccurringClass {
  ClassId class_id = 0;
  double conditional_frequency = 0.0;
  std::size_t joint_count = 0;
};

struct BaseCooccurrence {
  ClassId base = 0;
  std::size_t base_count = 0;
  std::vector<CooccurringClass> cooccurring;  // descending frequency, ties by ascending id
  std::vector<FrequentItemset> frequent_itemsets;
};

struct Fig2Row {
  ClassId base = 0;
  std::size_t num_cooccurring = 0;
};

struct Fig3Row {
  std::size_t itemset_size = 0;
  std::size_t count = 0;
};

inline BaseClassReport identify_base_classes(const TransactionDb& db, const BasePolicy& policy) {
  policy.validate();
  require_non_empty(db);
  const auto& vocab = db.vocabulary();
  std::vector<std::size_t> counts(vocab.size(), 0);
  for (const auto& t : db.transactions()) {
    for (auto id : t.labels) ++counts[id];
  }

  BaseClassReport report;
  for (ClassId id = 0; id < counts.size(); ++id) {
    if (counts[id] == 0) continue;
    report.entries.push_back({id, static_cast<double>(counts[id]) / static_cast<double>(db.size()), counts[id]});
  }
  // Counts share one denominator, so ordering by count orders by frequency.
  std::stable_sort(report.entries.begin(), report.entries.end(),
                   [](const BaseClassEntry& a, const BaseClassEntry& b) { return a.image_count > b.image_count; });

  if (policy.kind == BasePolicy::Kind::kTopK) {
    std::size_t k = policy.k;
    if (k > vocab.size()) {
      report.warnings.push_back("top-k " + std::to_string(k) + " exceeds vocabulary size " +
                                std::to_string(vocab.size()) + "; clamped");
      k = vocab.size();
    }
    if (report.entries.size() > k) report.entries.resize(k);
  } else {
    std::erase_if(report.entries, [&](const BaseClassEntry& e) {
      return !meets_threshold(e.image_count, db.size(), policy.threshold);
    });
  }
  return report;
}

inline CooccurrenceMatrix build_matrix(const TransactionDb& db) {
  require_non_empty(db);
  CooccurrenceMatrix m(db.vocabulary().size());
  for (const auto& t : db.transactions()) m.add_transaction(t.labels);
  return m;
}

// In base-conditioned mode the attached itemsets are mined over the images
// holding `base`, with that subset as the support denominator. In global
// mode they are the globally frequent itemsets that contain `base`.
inline BaseCooccurrence cooccurring_for_base(const TransactionDb& db, ClassId base, const MinerConfig& cfg,
                                             double cooccur_threshold) {
  cfg.validate();
  if (!(cooccur_threshold > 0.0 && cooccur_threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "co-occurrence threshold must be in (0,1]");
  }
  const TransactionDb restricted = restrict_to_base(db, base);

  std::vector<std::size_t> counts(db.vocabulary().size(), 0);
  for (const auto& t : restricted.transactions()) {
    for (auto id : t.labels) ++counts[id];
  }

  BaseCooccurrence out;
  out.base = base;
  out.base_count = restricted.size();
  for (ClassId c = 0; c < counts.size(); ++c) {
    if (c == base || counts[c] == 0) continue;
    if (meets_threshold(counts[c], restricted.size(), cooccur_threshold)) {
      out.cooccurring.push_back(
          {c, static_cast<double>(counts[c]) / static_cast<double>(restricted.size()), counts[c]});
    }
  }
  std::stable_sort(out.cooccurring.begin(), out.cooccurring.end(),
                   [](const CooccurringClass& a, const CooccurringClass& b) { return a.joint_count > b.joint_count; });

  if (cfg.support_mode == SupportMode::kBaseConditioned) {
    out.frequent_itemsets = mine(restricted, cfg);
  } else {
    out.frequent_itemsets = mine(db, cfg);
    std::erase_if(out.frequent_itemsets, [base](const FrequentItemset& fi) { return !fi.itemset.contains(base); });
  }
  return out;
}

// One analysis per base; bases run concurrently when cfg.workers > 1.
// Output order follows `bases`.
inline std::vector<BaseCooccurrence> analyze_bases(const TransactionDb& db, const std::vector<ClassId>& bases,
                                                   const MinerConfig& cfg, double cooccur_threshold) {
  if (bases.empty()) throw Error(ErrorCode::kInvalidArgument, "no base classes given");
  std::vector<BaseCooccurrence> out;
  out.reserve(bases.size());
  if (cfg.workers <= 1) {
    for (auto b : bases) out.push_back(cooccurring_for_base(db, b, cfg, cooccur_threshold));
    return out;
  }
  MinerConfig inner = cfg;
  inner.workers = 1;
  std::vector<std::future<BaseCooccurrence>> pending;
  for (std::size_t start = 0; start < bases.size(); start += cfg.workers) {
    pending.clear();
    const std::size_t stop = std::min(bases.size(), start + cfg.workers);
    for (std::size_t i = start; i < stop; ++i) {
      pending.push_back(std::async(std::launch::async, [&db, &inner, cooccur_threshold, b = bases[i]] {
        return cooccurring_for_base(db, b, inner, cooccur_threshold);
      }));
    }
    for (auto& f : pending) out.push_back(f.get());
  }
  return out;
}

inline std::vector<Fig2Row> fig2_data(const std::vector<BaseCooccurrence>& per_base) {
  std::vector<Fig2Row> rows;
  rows.reserve(per_base.size());
  for (const auto& b : per_base) rows.push_back({b.base, b.cooccurring.size()});
  return rows;
}

inline std::vector<Fig2Row> fig2_data(const TransactionDb& db, const std::vector<ClassId>& bases,
                                      const MinerConfig& cfg, double cooccur_threshold) {
  return fig2_data(analyze_bases(db, bases, cfg, cooccur_threshold));
}

// Sizes of the distinct frequent itemsets across all bases.
inline std::vector<Fig3Row> fig3_histogram(const std::vector<BaseCooccurrence>& per_base) {
  std::unordered_set<Itemset, ItemsetHash> seen;
  std::vector<std::size_t> by_size;
  for (const auto& b : per_base) {
    for (const auto& fi : b.frequent_itemsets) {
      if (!seen.insert(fi.itemset).second) continue;
      if (by_size.size() <= fi.itemset.size()) by_size.resize(fi.itemset.size() + 1, 0);
      ++by_size[fi.itemset.size()];
    }
  }
  std::vector<Fig3Row> rows;
  for (std::size_t s = 0; s < by_size.size(); ++s) {
    if (by_size[s] > 0) rows.push_back({s, by_size[s]});
  }
  return rows;
}

}  // namespace cooc
