#pragma once

// Labels, per-image transactions and itemsets shared by every stage.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cooc/error.hpp"

namespace cooc {

using ClassId = std::uint32_t;

// Ordered class names; ids are the contiguous positions 0..n-1.
class Vocabulary {
 public:
  Vocabulary() = default;

  explicit Vocabulary(std::vector<std::string> names) : names_(std::move(names)) {
    index_.reserve(names_.size());
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i].empty()) {
        throw Error(ErrorCode::kInvalidArgument, "class name at id " + std::to_string(i) + " is empty");
      }
      if (!index_.emplace(names_[i], static_cast<ClassId>(i)).second) {
        throw Error(ErrorCode::kInvalidArgument, "duplicate class name '" + names_[i] + "'");
      }
    }
  }

  std::size_t size() const noexcept { return names_.size(); }
  bool empty() const noexcept { return names_.empty(); }
  bool contains(ClassId id) const noexcept { return id < names_.size(); }

  const std::string& name(ClassId id) const {
    if (!contains(id)) {
      throw Error(ErrorCode::kUnknownClass, "class id " + std::to_string(id) + " not in vocabulary");
    }
    return names_[id];
  }

  std::optional<ClassId> find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  ClassId id(const std::string& name) const {
    auto found = find(name);
    if (!found) throw Error(ErrorCode::kUnknownClass, "unknown class '" + name + "'");
    return *found;
  }

  const std::vector<std::string>& names() const noexcept { return names_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, ClassId> index_;
};

// Strictly increasing sequence of class ids.
class Itemset {
 public:
  using const_iterator = std::vector<ClassId>::const_iterator;

  Itemset() = default;

  explicit Itemset(std::vector<ClassId> items) : items_(std::move(items)) {
    for (std::size_t i = 1; i < items_.size(); ++i) {
      if (items_[i - 1] >= items_[i]) {
        throw Error(ErrorCode::kInvalidArgument, "itemset must be strictly increasing");
      }
    }
  }

  Itemset(std::initializer_list<ClassId> items) : Itemset(std::vector<ClassId>(items)) {}

  // Sorts and collapses repeats, e.g. one image holding three dogs.
  static Itemset from_unsorted(std::vector<ClassId> items) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    Itemset out;
    out.items_ = std::move(items);
    return out;
  }

  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  const_iterator begin() const noexcept { return items_.begin(); }
  const_iterator end() const noexcept { return items_.end(); }
  ClassId operator[](std::size_t i) const { return items_[i]; }
  ClassId back() const { return items_.back(); }
  std::span<const ClassId> items() const noexcept { return items_; }

  bool contains(ClassId id) const { return std::binary_search(items_.begin(), items_.end(), id); }

  bool is_subset_of(const Itemset& other) const {
    return std::includes(other.items_.begin(), other.items_.end(), items_.begin(), items_.end());
  }

  Itemset with(ClassId id) const {
    auto items = items_;
    items.insert(std::upper_bound(items.begin(), items.end(), id), id);
    return from_unsorted(std::move(items));
  }

  Itemset without(ClassId id) const {
    std::vector<ClassId> items;
    items.reserve(items_.size());
    for (auto v : items_) {
      if (v != id) items.push_back(v);
    }
    Itemset out;
    out.items_ = std::move(items);
    return out;
  }

  friend bool operator==(const Itemset&, const Itemset&) = default;
  friend auto operator<=>(const Itemset& a, const Itemset& b) { return a.items_ <=> b.items_; }

 private:
  std::vector<ClassId> items_;
};

// Report order: by size, then lexicographically by class id.
struct CanonicalLess {
  bool operator()(const Itemset& a, const Itemset& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }
};

struct ItemsetHash {
  std::size_t operator()(const Itemset& s) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (auto id : s) {
      h ^= id + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

struct Transaction {
  std::string image_id;
  Itemset labels;

  friend bool operator==(const Transaction&, const Transaction&) = default;
};

// Immutable after construction.
class TransactionDb {
 public:
  TransactionDb() = default;

  TransactionDb(Vocabulary vocabulary, std::vector<Transaction> transactions, std::string source_tag = {})
      : vocabulary_(std::move(vocabulary)),
        transactions_(std::move(transactions)),
        source_tag_(std::move(source_tag)) {
    std::unordered_set<std::string> seen;
    seen.reserve(transactions_.size());
    for (const auto& t : transactions_) {
      if (t.image_id.empty()) throw Error(ErrorCode::kInvalidArgument, "empty image_id");
      if (!seen.insert(t.image_id).second) {
        throw Error(ErrorCode::kInvalidArgument, "duplicate image_id '" + t.image_id + "'");
      }
      for (auto id : t.labels) {
        if (!vocabulary_.contains(id)) {
          throw Error(ErrorCode::kUnknownClass, "image '" + t.image_id + "' has class id " +
                                                    std::to_string(id) + " outside the vocabulary");
        }
      }
    }
  }

  const Vocabulary& vocabulary() const noexcept { return vocabulary_; }
  const std::vector<Transaction>& transactions() const noexcept { return transactions_; }
  const std::string& source_tag() const noexcept { return source_tag_; }
  std::size_t size() const noexcept { return transactions_.size(); }
  bool empty() const noexcept { return transactions_.empty(); }

  friend bool operator==(const TransactionDb&, const TransactionDb&) = default;

 private:
  Vocabulary vocabulary_;
  std::vector<Transaction> transactions_;
  std::string source_tag_;
};

struct Support {
  std::size_t count = 0;
  double fraction = 0.0;
};

// Support fractions are compared as count / n against the threshold, never
// by converting the threshold into a count.
inline bool meets_threshold(std::size_t count, std::size_t denominator, double threshold) {
  return static_cast<double>(count) / static_cast<double>(denominator) >= threshold;
}

inline void require_non_empty(const TransactionDb& db) {
  if (db.empty()) throw Error(ErrorCode::kEmptyDb, "transaction db is empty");
}

inline void validate_itemset(const Vocabulary& vocab, const Itemset& s) {
  if (s.empty()) throw Error(ErrorCode::kInvalidArgument, "itemset is empty");
  for (auto id : s) {
    if (!vocab.contains(id)) {
      throw Error(ErrorCode::kUnknownClass, "class id " + std::to_string(id) + " not in vocabulary");
    }
  }
}

inline Support support(const TransactionDb& db, const Itemset& s) {
  validate_itemset(db.vocabulary(), s);
  require_non_empty(db);
  std::size_t count = 0;
  for (const auto& t : db.transactions()) {
    if (s.is_subset_of(t.labels)) ++count;
  }
  return {count, static_cast<double>(count) / static_cast<double>(db.size())};
}

// Keeps only images that contain `base`; the result's size is the
// denominator for base-conditioned support.
inline TransactionDb restrict_to_base(const TransactionDb& db, ClassId base) {
  const auto& base_name = db.vocabulary().name(base);
  std::vector<Transaction> kept;
  for (const auto& t : db.transactions()) {
    if (t.labels.contains(base)) kept.push_back(t);
  }
  if (kept.empty()) {
    throw Error(ErrorCode::kEmptyRestriction, "class '" + base_name + "' appears in no transaction");
  }
  std::string tag = db.source_tag().empty() ? "base=" + base_name : db.source_tag() + "|base=" + base_name;
  return TransactionDb(db.vocabulary(), std::move(kept), std::move(tag));
}

}  // namespace cooc
