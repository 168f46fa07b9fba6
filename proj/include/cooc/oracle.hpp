#pragma once

// Exhaustive reference miner for small vocabularies. Uses its own bitmask
// representation and scan; it must not call into the mining engines.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "cooc/core_model.hpp"
#include "cooc/miner.hpp"

namespace cooc {

inline constexpr std::size_t kOracleMaxClasses = 20;

inline std::vector<FrequentItemset> brute_force_frequent(const TransactionDb& db, const MinerConfig& cfg) {
  const std::size_t n_classes = db.vocabulary().size();
  if (n_classes > kOracleMaxClasses) {
    throw Error(ErrorCode::kSizeGuard, "oracle refuses vocabularies above " + std::to_string(kOracleMaxClasses) +
                                           " classes (got " + std::to_string(n_classes) + ")");
  }
  if (db.empty()) throw Error(ErrorCode::kEmptyDb, "transaction db is empty");

  std::vector<std::uint32_t> masks;
  masks.reserve(db.size());
  for (const auto& t : db.transactions()) {
    std::uint32_t m = 0;
    for (auto id : t.labels) m |= std::uint32_t{1} << id;
    masks.push_back(m);
  }

  const std::size_t cap = cfg.max_itemset_size.value_or(n_classes);
  const double n = static_cast<double>(db.size());
  std::vector<FrequentItemset> out;
  const std::uint32_t end = std::uint32_t{1} << n_classes;
  for (std::uint32_t s = 1; s < end; ++s) {
    if (static_cast<std::size_t>(std::popcount(s)) > cap) continue;
    std::size_t count = 0;
    for (auto m : masks) count += (m & s) == s;
    if (count == 0 || static_cast<double>(count) / n < cfg.min_support) continue;
    std::vector<ClassId> items;
    for (ClassId b = 0; b < n_classes; ++b) {
      if ((s >> b) & 1) items.push_back(b);
    }
    out.push_back({Itemset(std::move(items)), static_cast<double>(count) / n, count, db.size()});
  }
  std::sort(out.begin(), out.end(), [](const FrequentItemset& a, const FrequentItemset& b) {
    if (a.itemset.size() != b.itemset.size()) return a.itemset.size() < b.itemset.size();
    return std::lexicographical_compare(a.itemset.begin(), a.itemset.end(), b.itemset.begin(), b.itemset.end());
  });
  return out;
}

}  // namespace cooc
