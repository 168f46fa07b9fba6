#pragma once

// Frequent labelset mining. Two engines share one contract:
//   apriori   - level-wise: frequent singletons, prefix-join + subset prune
//               to build size k+1 candidates, then a support filter.
//   fp-growth - prefix-tree pattern growth over conditional pattern bases.
// Both return the same (itemset, count) set in canonical order.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cooc/core_model.hpp"

namespace cooc {

enum class SupportMode { kGlobal, kBaseConditioned };
enum class Engine { kApriori, kFpGrowth };

struct MinerConfig {
  double min_support = 0.5;
  std::optional<std::size_t> max_itemset_size;  // nullopt = unlimited
  SupportMode support_mode = SupportMode::kGlobal;
  Engine engine = Engine::kApriori;
  std::size_t workers = 1;

  std::size_t size_cap() const { return max_itemset_size.value_or(std::numeric_limits<std::size_t>::max()); }

  void validate() const {
    if (!(min_support > 0.0 && min_support <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "min_support must be in (0,1], got " + std::to_string(min_support));
    }
    if (max_itemset_size && *max_itemset_size < 1) {
      throw Error(ErrorCode::kInvalidArgument, "max_itemset_size must be >= 1");
    }
    if (workers < 1) throw Error(ErrorCode::kInvalidArgument, "workers must be >= 1");
  }
};

struct FrequentItemset {
  Itemset itemset;
  double support = 0.0;
  std::size_t count = 0;
  std::size_t denominator = 0;  // transactions in the mining run

  friend bool operator==(const FrequentItemset&, const FrequentItemset&) = default;
};

struct AssociationRule {
  Itemset antecedent;
  Itemset consequent;
  double support = 0.0;
  double confidence = 0.0;
  double lift = 0.0;
  std::size_t joint_count = 0;
  std::size_t antecedent_count = 0;
  std::size_t consequent_count = 0;
  std::size_t denominator = 0;
};

inline void sort_canonical(std::vector<FrequentItemset>& fis) {
  std::sort(fis.begin(), fis.end(),
            [](const FrequentItemset& a, const FrequentItemset& b) { return CanonicalLess{}(a.itemset, b.itemset); });
}

namespace detail {

// Counts how many transactions contain each candidate. Transactions are
// split into contiguous shards, one per worker; integer shard counts are
// summed so the result does not depend on the worker count.
inline std::vector<std::size_t> count_candidates(const TransactionDb& db, const std::vector<Itemset>& candidates,
                                                 std::size_t workers) {
  const auto& txs = db.transactions();
  auto count_range = [&](std::size_t lo, std::size_t hi) {
    std::vector<std::size_t> counts(candidates.size(), 0);
    for (std::size_t t = lo; t < hi; ++t) {
      const auto& labels = txs[t].labels;
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        if (candidates[c].size() <= labels.size() && candidates[c].is_subset_of(labels)) ++counts[c];
      }
    }
    return counts;
  };

  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, txs.size()));
  if (workers == 1 || candidates.empty()) return count_range(0, txs.size());

  std::vector<std::vector<std::size_t>> partial(workers);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const std::size_t chunk = (txs.size() + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = std::min(txs.size(), w * chunk);
    const std::size_t hi = std::min(txs.size(), lo + chunk);
    threads.emplace_back([&, w, lo, hi] { partial[w] = count_range(lo, hi); });
  }
  for (auto& t : threads) t.join();

  std::vector<std::size_t> counts(candidates.size(), 0);
  for (const auto& p : partial) {
    for (std::size_t c = 0; c < counts.size(); ++c) counts[c] += p[c];
  }
  return counts;
}

inline FrequentItemset make_frequent(Itemset s, std::size_t count, std::size_t n) {
  return {std::move(s), static_cast<double>(count) / static_cast<double>(n), count, n};
}

}  // namespace detail

inline std::vector<FrequentItemset> mine_frequent_1(const TransactionDb& db, const MinerConfig& cfg) {
  cfg.validate();
  require_non_empty(db);
  std::vector<std::size_t> counts(db.vocabulary().size(), 0);
  for (const auto& t : db.transactions()) {
    for (auto id : t.labels) ++counts[id];
  }
  std::vector<FrequentItemset> out;
  for (ClassId id = 0; id < counts.size(); ++id) {
    if (counts[id] > 0 && meets_threshold(counts[id], db.size(), cfg.min_support)) {
      out.push_back(detail::make_frequent(Itemset{id}, counts[id], db.size()));
    }
  }
  return out;
}

// Joins members of L_k that share their first k-1 items, then drops any
// candidate with a k-subset missing from L_k.
inline std::vector<Itemset> generate_candidates(const std::vector<FrequentItemset>& level) {
  if (level.empty()) return {};
  const std::size_t k = level.front().itemset.size();
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "level itemsets must be non-empty");

  std::vector<Itemset> sorted;
  sorted.reserve(level.size());
  for (const auto& fi : level) {
    if (fi.itemset.size() != k) throw Error(ErrorCode::kInvalidArgument, "level contains itemsets of mixed sizes");
    sorted.push_back(fi.itemset);
  }
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  auto same_prefix = [k](const Itemset& a, const Itemset& b) {
    return std::equal(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(k - 1), b.begin());
  };

  std::vector<Itemset> out;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = i + 1; j < sorted.size() && same_prefix(sorted[i], sorted[j]); ++j) {
      Itemset candidate = sorted[i].with(sorted[j].back());
      bool all_subsets_frequent = true;
      // The two subsets dropping either of the last two items are the join parents.
      for (std::size_t drop = 0; drop + 2 < candidate.size() && all_subsets_frequent; ++drop) {
        all_subsets_frequent = std::binary_search(sorted.begin(), sorted.end(), candidate.without(candidate[drop]));
      }
      if (all_subsets_frequent) out.push_back(std::move(candidate));
    }
  }
  // Prefix-sorted joins already come out in lexicographic order.
  return out;
}

inline std::vector<FrequentItemset> prune_by_support(const TransactionDb& db, const std::vector<Itemset>& candidates,
                                                     const MinerConfig& cfg) {
  cfg.validate();
  if (candidates.empty()) return {};
  require_non_empty(db);
  const std::size_t k = candidates.front().size();
  for (const auto& c : candidates) {
    if (c.size() != k) throw Error(ErrorCode::kInvalidArgument, "candidates of mixed sizes");
    validate_itemset(db.vocabulary(), c);
  }
  const auto counts = detail::count_candidates(db, candidates, cfg.workers);
  std::vector<FrequentItemset> out;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (counts[c] > 0 && meets_threshold(counts[c], db.size(), cfg.min_support)) {
      out.push_back(detail::make_frequent(candidates[c], counts[c], db.size()));
    }
  }
  return out;
}

inline std::vector<FrequentItemset> mine_all(const TransactionDb& db, const MinerConfig& cfg) {
  cfg.validate();
  require_non_empty(db);
  std::vector<FrequentItemset> all;
  auto level = mine_frequent_1(db, cfg);
  std::size_t k = 1;
  while (!level.empty()) {
    all.insert(all.end(), level.begin(), level.end());
    if (k + 1 > cfg.size_cap()) break;
    level = prune_by_support(db, generate_candidates(level), cfg);
    ++k;
  }
  sort_canonical(all);
  return all;
}

namespace detail {

// Prefix tree over frequency-ordered items. Nodes live in one vector;
// index 0 is the root.
class FpTree {
 public:
  struct Node {
    ClassId item = 0;
    std::size_t count = 0;
    std::size_t parent = 0;
    std::size_t next = kNone;  // next node carrying the same item
    std::vector<std::size_t> children;
  };
  struct HeaderEntry {
    ClassId item;
    std::size_t count;
    std::size_t head;
  };

  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  // `paths` are weighted item lists (any order). Items whose total weight
  // fails the threshold are left out of the tree.
  FpTree(const std::vector<std::pair<std::vector<ClassId>, std::size_t>>& paths, std::size_t denominator,
         double min_support) {
    nodes_.emplace_back();
    std::unordered_map<ClassId, std::size_t> totals;
    for (const auto& [items, weight] : paths) {
      for (auto id : items) totals[id] += weight;
    }
    for (const auto& [id, total] : totals) {
      if (meets_threshold(total, denominator, min_support)) header_.push_back({id, total, kNone});
    }
    // Descending count, ties by ascending id.
    std::sort(header_.begin(), header_.end(), [](const HeaderEntry& a, const HeaderEntry& b) {
      return a.count != b.count ? a.count > b.count : a.item < b.item;
    });
    std::unordered_map<ClassId, std::size_t> rank;
    for (std::size_t r = 0; r < header_.size(); ++r) rank[header_[r].item] = r;

    std::vector<std::size_t> tails(header_.size(), kNone);
    std::vector<std::size_t> ordered;
    for (const auto& [items, weight] : paths) {
      ordered.clear();
      for (auto id : items) {
        auto it = rank.find(id);
        if (it != rank.end()) ordered.push_back(it->second);
      }
      std::sort(ordered.begin(), ordered.end());
      insert(ordered, weight, tails);
    }
  }

  const std::vector<HeaderEntry>& header() const noexcept { return header_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }

  // Weighted prefix paths ending just above every node of header entry `r`.
  std::vector<std::pair<std::vector<ClassId>, std::size_t>> conditional_base(std::size_t r) const {
    std::vector<std::pair<std::vector<ClassId>, std::size_t>> base;
    for (std::size_t n = header_[r].head; n != kNone; n = nodes_[n].next) {
      std::vector<ClassId> path;
      for (std::size_t p = nodes_[n].parent; p != 0; p = nodes_[p].parent) path.push_back(nodes_[p].item);
      if (!path.empty()) base.emplace_back(std::move(path), nodes_[n].count);
    }
    return base;
  }

 private:
  void insert(const std::vector<std::size_t>& ranks, std::size_t weight, std::vector<std::size_t>& tails) {
    std::size_t cur = 0;
    for (auto r : ranks) {
      const ClassId item = header_[r].item;
      std::size_t child = kNone;
      for (auto c : nodes_[cur].children) {
        if (nodes_[c].item == item) {
          child = c;
          break;
        }
      }
      if (child == kNone) {
        child = nodes_.size();
        Node node;
        node.item = item;
        node.parent = cur;
        nodes_.push_back(std::move(node));
        nodes_[cur].children.push_back(child);
        if (tails[r] == kNone) {
          header_[r].head = child;
        } else {
          nodes_[tails[r]].next = child;
        }
        tails[r] = child;
      }
      nodes_[child].count += weight;
      cur = child;
    }
  }

  std::vector<Node> nodes_;
  std::vector<HeaderEntry> header_;
};

inline void fp_grow(const FpTree& tree, const std::vector<ClassId>& suffix, std::size_t denominator,
                    const MinerConfig& cfg, std::vector<FrequentItemset>& out) {
  const auto& header = tree.header();
  for (std::size_t r = header.size(); r-- > 0;) {
    std::vector<ClassId> pattern = suffix;
    pattern.push_back(header[r].item);
    out.push_back(make_frequent(Itemset::from_unsorted(pattern), header[r].count, denominator));
    if (pattern.size() >= cfg.size_cap()) continue;
    auto base = tree.conditional_base(r);
    if (base.empty()) continue;
    FpTree conditional(base, denominator, cfg.min_support);
    if (!conditional.header().empty()) fp_grow(conditional, pattern, denominator, cfg, out);
  }
}

}  // namespace detail

inline std::vector<FrequentItemset> mine_all_fpgrowth(const TransactionDb& db, const MinerConfig& cfg) {
  cfg.validate();
  require_non_empty(db);
  std::vector<std::pair<std::vector<ClassId>, std::size_t>> paths;
  paths.reserve(db.size());
  for (const auto& t : db.transactions()) {
    if (!t.labels.empty()) paths.emplace_back(std::vector<ClassId>(t.labels.begin(), t.labels.end()), 1);
  }
  std::vector<FrequentItemset> out;
  detail::FpTree tree(paths, db.size(), cfg.min_support);
  detail::fp_grow(tree, {}, db.size(), cfg, out);
  sort_canonical(out);
  return out;
}

inline std::vector<FrequentItemset> mine(const TransactionDb& db, const MinerConfig& cfg) {
  return cfg.engine == Engine::kFpGrowth ? mine_all_fpgrowth(db, cfg) : mine_all(db, cfg);
}

// Rules X -> Y for every frequent Z = X u Y of size >= 2. Counts come from
// `frequent`, which must be subset-closed.
inline std::vector<AssociationRule> derive_rules(const std::vector<FrequentItemset>& frequent, double min_confidence) {
  if (!(min_confidence > 0.0 && min_confidence <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "min_confidence must be in (0,1]");
  }
  std::unordered_map<Itemset, const FrequentItemset*, ItemsetHash> by_set;
  by_set.reserve(frequent.size());
  for (const auto& fi : frequent) {
    if (!frequent.empty() && fi.denominator != frequent.front().denominator) {
      throw Error(ErrorCode::kInternalConsistency, "frequent itemsets come from different mining runs");
    }
    by_set.emplace(fi.itemset, &fi);
  }
  auto lookup = [&](const Itemset& s) -> const FrequentItemset& {
    auto it = by_set.find(s);
    if (it == by_set.end()) {
      throw Error(ErrorCode::kInternalConsistency, "frequent itemset list is not closed under subsets");
    }
    return *it->second;
  };

  std::vector<AssociationRule> rules;
  for (const auto& fi : frequent) {
    const std::size_t m = fi.itemset.size();
    if (m < 2) continue;
    if (m > 30) throw Error(ErrorCode::kInvalidArgument, "itemset too large for rule enumeration");
    const std::uint64_t full = (std::uint64_t{1} << m) - 1;
    for (std::uint64_t mask = 1; mask < full; ++mask) {
      std::vector<ClassId> lhs, rhs;
      for (std::size_t b = 0; b < m; ++b) {
        ((mask >> b) & 1 ? lhs : rhs).push_back(fi.itemset[b]);
      }
      const auto& a = lookup(Itemset(std::move(lhs)));
      const auto& c = lookup(Itemset(std::move(rhs)));
      if (!meets_threshold(fi.count, a.count, min_confidence)) continue;
      AssociationRule rule;
      rule.antecedent = a.itemset;
      rule.consequent = c.itemset;
      rule.joint_count = fi.count;
      rule.antecedent_count = a.count;
      rule.consequent_count = c.count;
      rule.denominator = fi.denominator;
      rule.support = fi.support;
      rule.confidence = static_cast<double>(fi.count) / static_cast<double>(a.count);
      // Written as n*|XY| / (|X|*|Y|) so that lift(X->Y) == lift(Y->X) bit for bit.
      rule.lift = static_cast<double>(fi.count) * static_cast<double>(fi.denominator) /
                  (static_cast<double>(a.count) * static_cast<double>(c.count));
      rules.push_back(std::move(rule));
    }
  }
  std::sort(rules.begin(), rules.end(), [](const AssociationRule& x, const AssociationRule& y) {
    CanonicalLess less;
    if (x.antecedent != y.antecedent) return less(x.antecedent, y.antecedent);
    return less(x.consequent, y.consequent);
  });
  return rules;
}

}  // namespace cooc
