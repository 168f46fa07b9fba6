#pragma once

// Subcommands: ingest | mine | analyze | eval | report.
// Exit codes: 0 success, 2 input/format error, 3 empty data,
// 4 no evaluable classes, 1 anything else.

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "cooc/config.hpp"
#include "cooc/cooccurrence.hpp"
#include "cooc/core_model.hpp"
#include "cooc/detector_eval.hpp"
#include "cooc/ingest.hpp"
#include "cooc/miner.hpp"
#include "cooc/report.hpp"

namespace cooc {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitInput = 2,
  kExitEmpty = 3,
  kExitNoEvaluable = 4,
};

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyDb:
    case ErrorCode::kEmptyRestriction:
      return kExitEmpty;
    case ErrorCode::kNoEvaluableClasses:
      return kExitNoEvaluable;
    case ErrorCode::kInternalConsistency:
      return kExitFailure;
    default:
      return kExitInput;
  }
}

namespace cli {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "failed writing '" + path.string() + "'");
}

inline std::filesystem::path prepare_out_dir(const RunConfig& cfg) {
  std::filesystem::path dir(cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

inline void warn_all(std::ostream& err, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

inline void write_ingest_outputs(const TransactionDb& db, std::size_t dropped, const RunConfig& cfg,
                                 std::ostream& out) {
  const auto dir = prepare_out_dir(cfg);
  std::ostringstream txs;
  write_transactions(db, txs);
  write_file(dir / "transactions.jsonl", txs.str());
  std::ostringstream summary;
  summary << "source=" << db.source_tag() << '\n'
          << "images_kept=" << db.size() << '\n'
          << "images_dropped=" << dropped << '\n'
          << "vocabulary_size=" << db.vocabulary().size() << '\n';
  write_file(dir / "ingest_summary.txt", summary.str());
  out << summary.str();
}

inline void write_mine_outputs(const TransactionDb& db, const RunConfig& cfg, std::ostream& out,
                               std::ostream& err) {
  require_non_empty(db);
  const MinerConfig miner = cfg.miner_for(SupportMode::kGlobal);
  const auto dir = prepare_out_dir(cfg);
  const auto& vocab = db.vocabulary();

  if (miner.support_mode == SupportMode::kGlobal) {
    const auto fis = mine(db, miner);
    write_file(dir / "frequent_itemsets.csv", render_frequent_csv(vocab, fis));
    if (cfg.rules) write_file(dir / "rules.csv", render_rules_csv(vocab, derive_rules(fis, cfg.min_confidence)));
    out << "frequent itemsets: " << fis.size() << '\n';
    return;
  }

  const auto bases = identify_base_classes(db, cfg.base_policy());
  warn_all(err, bases.warnings);
  std::vector<std::vector<FrequentItemset>> mined;
  mined.reserve(bases.entries.size());
  for (const auto& e : bases.entries) mined.push_back(mine(restrict_to_base(db, e.class_id), miner));
  std::vector<BaseBlock> blocks;
  std::vector<std::pair<ClassId, std::vector<AssociationRule>>> rules;
  std::size_t total = 0;
  for (std::size_t i = 0; i < mined.size(); ++i) {
    blocks.push_back({bases.entries[i].class_id, &mined[i]});
    if (cfg.rules) rules.emplace_back(bases.entries[i].class_id, derive_rules(mined[i], cfg.min_confidence));
    total += mined[i].size();
  }
  write_file(dir / "frequent_itemsets.csv", render_frequent_csv(vocab, blocks));
  if (cfg.rules) write_file(dir / "rules.csv", render_rules_csv(vocab, rules));
  out << "frequent itemsets: " << total << " over " << blocks.size() << " base classes\n";
}

inline void write_analyze_outputs(const TransactionDb& db, const RunConfig& cfg, std::ostream& out,
                                  std::ostream& err) {
  require_non_empty(db);
  const MinerConfig miner = cfg.miner_for(SupportMode::kBaseConditioned);
  const auto dir = prepare_out_dir(cfg);
  const auto& vocab = db.vocabulary();

  const auto bases = identify_base_classes(db, cfg.base_policy());
  warn_all(err, bases.warnings);
  if (bases.entries.empty()) err << "warning: base-class policy selected no class\n";
  const auto matrix = build_matrix(db);
  std::vector<BaseCooccurrence> per_base;
  if (!bases.entries.empty()) per_base = analyze_bases(db, bases.ids(), miner, cfg.cooccur_threshold);

  write_file(dir / "base_classes.csv", render_base_classes_csv(vocab, bases, db.size()));
  write_file(dir / "cooccurrence_matrix.csv", render_matrix_csv(vocab, matrix));
  write_file(dir / "fig2_data.csv", render_fig2_csv(vocab, fig2_data(per_base)));
  write_file(dir / "fig3_data.csv", render_fig3_csv(fig3_histogram(per_base)));
  write_file(dir / "cooccurring_classes.csv", render_cooccurring_csv(vocab, per_base));
  out << "base classes: " << bases.entries.size() << '\n';
}

inline void write_eval_outputs(std::vector<DetectionRecord> records, const CocoAnnotations& gt,
                               const RunConfig& cfg, std::ostream& out) {
  resolve_categories(records, gt.vocabulary);
  const auto result = evaluate(records, gt.boxes, gt.vocabulary.size(), cfg.eval);
  const auto dir = prepare_out_dir(cfg);
  write_file(dir / "eval_report.json", render_eval_json(gt.vocabulary, result, cfg.eval));
  write_file(dir / "eval_report.csv", render_eval_csv(gt.vocabulary, result));
  out << "mAP: " << format_fixed6(result.map) << " over " << result.num_classes << " classes\n";
}

inline std::vector<DetectionRecord> load_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  return parse_detection_records(in);
}

}  // namespace cli

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Label co-occurrence mining for multi-label detection outputs"};
  app.require_subcommand(1);

  struct Common {
    std::string config_path;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
    bool rules_flag = false;
    CLI::Option* rules_option = nullptr;
  };
  std::map<std::string, Common> commons;

  auto add_common = [&](CLI::App* sub) {
    auto& c = commons[sub->get_name()];
    sub->add_option("--config", c.config_path, "Flat key = value config file");
    for (const auto& key : config_keys()) {
      if (key == "rules") continue;
      c.options[key] = sub->add_option("--" + key, c.values[key]);
    }
    c.rules_option = sub->add_flag("--rules", c.rules_flag, "Also write rules.csv");
    return sub;
  };

  std::string input, format = "detections", categories, db_path, detections_path, gt_path;

  auto* ingest = add_common(app.add_subcommand("ingest", "Convert detections or COCO annotations to transactions"));
  ingest->add_option("--input", input, "Detections JSONL or COCO annotation file")->required();
  ingest->add_option("--format", format, "detections | coco")->check(CLI::IsMember({"detections", "coco"}));
  ingest->add_option("--categories", categories, "COCO file whose categories fix the vocabulary");

  auto* mine_cmd = add_common(app.add_subcommand("mine", "Mine frequent labelsets"));
  mine_cmd->add_option("--db", db_path, "Transactions file")->required();

  auto* analyze = add_common(app.add_subcommand("analyze", "Base classes, co-occurrence matrix and chart data"));
  analyze->add_option("--db", db_path, "Transactions file")->required();

  auto* eval = add_common(app.add_subcommand("eval", "Per-class AP and mAP"));
  eval->add_option("--detections", detections_path, "Detections JSONL")->required();
  eval->add_option("--ground-truth", gt_path, "COCO annotation file")->required();

  auto* report = add_common(app.add_subcommand("report", "ingest + mine + analyze + eval into one directory"));
  report->add_option("--detections", detections_path, "Detections JSONL")->required();
  report->add_option("--ground-truth", gt_path, "COCO annotation file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    const auto& common = commons.at(active->get_name());
    RunConfig cfg;
    if (!common.config_path.empty()) apply_config_file(cfg, common.config_path);
    for (const auto& key : config_keys()) {
      if (key == "rules") continue;
      if (common.options.at(key)->count() > 0) set_config_value(cfg, key, common.values.at(key));
    }
    if (common.rules_option->count() > 0) cfg.rules = true;
    cfg.validate();

    if (active == ingest) {
      if (format == "coco") {
        const auto gt = read_coco_ground_truth(input);
        if (gt.images_without_annotations > 0) {
          err << "warning: " << gt.images_without_annotations << " images without annotations excluded\n";
        }
        require_non_empty(gt.db);
        cli::write_ingest_outputs(gt.db, gt.images_without_annotations, cfg, out);
      } else {
        IngestConfig icfg = cfg.ingest;
        if (!categories.empty()) {
          icfg.vocabulary_source = VocabularySource::kFromCocoCategories;
          icfg.coco_categories_path = categories;
        }
        const auto result = read_detections_jsonl(input, icfg);
        cli::warn_all(err, result.warnings);
        cli::write_ingest_outputs(result.db, result.images_dropped, cfg, out);
      }
    } else if (active == mine_cmd) {
      cli::write_mine_outputs(read_transactions(db_path), cfg, out, err);
    } else if (active == analyze) {
      cli::write_analyze_outputs(read_transactions(db_path), cfg, out, err);
    } else if (active == eval) {
      const auto gt = read_coco_annotations(gt_path);
      cli::write_eval_outputs(cli::load_records(detections_path), gt, cfg, out);
    } else if (active == report) {
      const auto gt = read_coco_annotations(gt_path);
      auto records = cli::load_records(detections_path);
      auto ingested = ingest_detections(records, cfg.ingest, gt.vocabulary,
                                        "detections:" + std::filesystem::path(detections_path).filename().string());
      cli::warn_all(err, ingested.warnings);
      cli::write_ingest_outputs(ingested.db, ingested.images_dropped, cfg, out);
      cli::write_mine_outputs(ingested.db, cfg, out, err);
      cli::write_analyze_outputs(ingested.db, cfg, out, err);
      cli::write_eval_outputs(std::move(records), gt, cfg, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace cooc
