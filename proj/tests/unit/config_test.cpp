#include <sstream>

#include <gtest/gtest.h>

#include "cooc/config.hpp"

namespace cooc {
namespace {

TEST(ConfigTest, Defaults) {
  RunConfig cfg;
  EXPECT_DOUBLE_EQ(cfg.miner.min_support, 0.5);
  EXPECT_EQ(cfg.base_policy().kind, BasePolicy::top_k(10).kind);
  EXPECT_EQ(cfg.miner_for(SupportMode::kGlobal).support_mode, SupportMode::kGlobal);
  EXPECT_EQ(cfg.miner_for(SupportMode::kBaseConditioned).support_mode, SupportMode::kBaseConditioned);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(ConfigTest, TextOverrides) {
  RunConfig cfg;
  std::istringstream in(
      "# comment\n"
      "min-support = 0.3\n"
      "\n"
      "engine = fp-growth   # trailing\n"
      "support-mode=base\n"
      "base-threshold = 0.1\n"
      "max-itemset-size = 3\n"
      "interpolation = 11pt\n"
      "rules = true\n");
  apply_config_text(cfg, in);
  EXPECT_DOUBLE_EQ(cfg.miner.min_support, 0.3);
  EXPECT_EQ(cfg.miner.engine, Engine::kFpGrowth);
  EXPECT_EQ(cfg.support_mode, SupportMode::kBaseConditioned);
  EXPECT_EQ(cfg.miner_for(SupportMode::kGlobal).support_mode, SupportMode::kBaseConditioned);
  ASSERT_TRUE(cfg.base_threshold.has_value());
  EXPECT_EQ(cfg.miner.max_itemset_size, 3u);
  EXPECT_EQ(cfg.eval.interpolation, Interpolation::kElevenPoint);
  EXPECT_TRUE(cfg.rules);

  set_config_value(cfg, "top-k", "4");
  EXPECT_FALSE(cfg.base_threshold.has_value());
  set_config_value(cfg, "max-itemset-size", "unlimited");
  EXPECT_FALSE(cfg.miner.max_itemset_size.has_value());
}

TEST(ConfigTest, UnknownKeyRejected) {
  RunConfig cfg;
  std::istringstream in("min-supp = 0.3\n");
  try {
    apply_config_text(cfg, in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormat);
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
  std::istringstream no_eq("min-support 0.3\n");
  EXPECT_THROW(apply_config_text(cfg, no_eq), Error);
}

TEST(ConfigTest, InvalidValues) {
  RunConfig cfg;
  EXPECT_THROW(set_config_value(cfg, "min-support", "half"), Error);
  EXPECT_THROW(set_config_value(cfg, "engine", "eclat"), Error);
  EXPECT_THROW(set_config_value(cfg, "workers", "-1"), Error);
  set_config_value(cfg, "min-support", "0");
  EXPECT_THROW(cfg.validate(), Error);
  cfg = RunConfig{};
  set_config_value(cfg, "min-support", "1.5");
  EXPECT_THROW(cfg.validate(), Error);
  cfg = RunConfig{};
  set_config_value(cfg, "iou-threshold", "1");
  EXPECT_THROW(cfg.validate(), Error);
  EXPECT_THROW(apply_config_file(cfg, "/nonexistent/cooc.conf"), Error);
}

}  // namespace
}  // namespace cooc
