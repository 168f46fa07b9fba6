#pragma once

// Run configuration. The config file is flat `key = value` text with `#`
// comments; keys are the long flag names without the leading dashes.
// Command-line flags go through the same setter, so both paths validate
// identically.

#include <charconv>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cooc/cooccurrence.hpp"
#include "cooc/detector_eval.hpp"
#include "cooc/ingest.hpp"
#include "cooc/miner.hpp"

namespace cooc {

struct RunConfig {
  IngestConfig ingest;
  MinerConfig miner;
  EvalConfig eval;
  std::optional<SupportMode> support_mode;  // unset: global for mine, base-conditioned for analyze
  std::size_t top_k = 10;
  std::optional<double> base_threshold;  // set: frequency-threshold policy instead of top-k
  double cooccur_threshold = 0.5;
  double min_confidence = 0.5;
  bool rules = false;
  std::string out_dir = ".";

  BasePolicy base_policy() const {
    return base_threshold ? BasePolicy::frequency_threshold(*base_threshold) : BasePolicy::top_k(top_k);
  }

  MinerConfig miner_for(SupportMode fallback) const {
    MinerConfig m = miner;
    m.support_mode = support_mode.value_or(fallback);
    return m;
  }

  void validate() const {
    ingest.validate();
    miner.validate();
    eval.validate();
    base_policy().validate();
    if (!(cooccur_threshold > 0.0 && cooccur_threshold <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "cooccur-threshold must be in (0,1]");
    }
    if (!(min_confidence > 0.0 && min_confidence <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "min-confidence must be in (0,1]");
    }
  }
};

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "min-support",     "max-itemset-size", "support-mode",  "engine",        "workers",
      "top-k",           "base-threshold",   "cooccur-threshold", "score-threshold", "iou-threshold",
      "interpolation",   "min-confidence",   "rules",         "out"};
  return keys;
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw Error(ErrorCode::kInvalidArgument, key + ": '" + v + "' is not a number");
  }
  return out;
}

inline std::size_t parse_count(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw Error(ErrorCode::kInvalidArgument, key + ": '" + v + "' is not a non-negative integer");
  }
  return out;
}

}  // namespace detail

inline void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  using detail::parse_count;
  using detail::parse_real;
  if (key == "min-support") {
    cfg.miner.min_support = parse_real(key, value);
  } else if (key == "max-itemset-size") {
    if (value == "unlimited") {
      cfg.miner.max_itemset_size.reset();
    } else {
      cfg.miner.max_itemset_size = parse_count(key, value);
    }
  } else if (key == "support-mode") {
    if (value == "global") {
      cfg.support_mode = SupportMode::kGlobal;
    } else if (value == "base") {
      cfg.support_mode = SupportMode::kBaseConditioned;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "support-mode must be global or base");
    }
  } else if (key == "engine") {
    if (value == "apriori") {
      cfg.miner.engine = Engine::kApriori;
    } else if (value == "fp-growth") {
      cfg.miner.engine = Engine::kFpGrowth;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "engine must be apriori or fp-growth");
    }
  } else if (key == "workers") {
    cfg.miner.workers = parse_count(key, value);
  } else if (key == "top-k") {
    cfg.top_k = parse_count(key, value);
    cfg.base_threshold.reset();
  } else if (key == "base-threshold") {
    cfg.base_threshold = parse_real(key, value);
  } else if (key == "cooccur-threshold") {
    cfg.cooccur_threshold = parse_real(key, value);
  } else if (key == "score-threshold") {
    cfg.ingest.score_threshold = parse_real(key, value);
  } else if (key == "iou-threshold") {
    cfg.eval.iou_threshold = parse_real(key, value);
  } else if (key == "interpolation") {
    if (value == "all") {
      cfg.eval.interpolation = Interpolation::kAllPoint;
    } else if (value == "11pt") {
      cfg.eval.interpolation = Interpolation::kElevenPoint;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "interpolation must be all or 11pt");
    }
  } else if (key == "min-confidence") {
    cfg.min_confidence = parse_real(key, value);
  } else if (key == "rules") {
    if (value == "true" || value == "1") {
      cfg.rules = true;
    } else if (value == "false" || value == "0") {
      cfg.rules = false;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "rules must be true or false");
    }
  } else if (key == "out") {
    cfg.out_dir = value;
  } else {
    throw Error(ErrorCode::kFormat, "unknown config key '" + key + "'");
  }
}

inline void apply_config_text(RunConfig& cfg, std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = detail::trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kFormat, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = detail::trim(std::string_view(body).substr(0, eq));
    const std::string value = detail::trim(std::string_view(body).substr(eq + 1));
    try {
      set_config_value(cfg, key, value);
    } catch (const Error& e) {
      throw Error(e.code(), "config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

inline void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config '" + path + "'");
  apply_config_text(cfg, in);
}

}  // namespace cooc
