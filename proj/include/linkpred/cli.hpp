#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "linkpred/checkpoint.hpp"
#include "linkpred/errors.hpp"
#include "linkpred/graph.hpp"
#include "linkpred/heuristics.hpp"
#include "linkpred/metrics.hpp"
#include "linkpred/model.hpp"
#include "linkpred/trainer.hpp"
#include "linkpred/version.hpp"

namespace linkpred {

namespace fs = std::filesystem;

// Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime failure.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitRuntime = 3,
};

// Every run writes its manifest into the output directory before any other
// artifact, so any output can be reproduced from its manifest alone.
inline void write_run_manifest(const fs::path& out_dir, const std::string& command,
                               const nlohmann::json& inputs,
                               const std::string& config_path, std::uint64_t seed) {
  fs::create_directories(out_dir);
  nlohmann::json j;
  j["command"] = command;
  j["config"] = config_path;
  j["inputs"] = inputs;
  j["seed"] = seed;
  j["version"] = std::string(kVersion);
  j["out_dir"] = out_dir.string();
  std::ofstream out(out_dir / "manifest.json");
  if (!out) throw DataError("cannot write manifest in " + out_dir.string());
  out << j.dump(2) << '\n';
}

inline std::vector<double> parse_fractions(const std::string& text) {
  std::vector<double> fractions;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    const std::size_t comma = text.find(',', begin);
    const std::string part =
        text.substr(begin, comma == std::string::npos ? std::string::npos
                                                      : comma - begin);
    try {
      fractions.push_back(std::stod(part));
    } catch (const std::exception&) {
      throw UsageError("cannot parse fraction '" + part + "'");
    }
    if (comma == std::string::npos) break;
    begin = comma + 1;
  }
  if (fractions.size() != 3) {
    throw UsageError("--fractions needs exactly three comma-separated values");
  }
  double sum = 0.0;
  for (double f : fractions) {
    if (f < 0.0) throw UsageError("split fractions must be non-negative");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw UsageError("split fractions must sum to 1, got " + std::to_string(sum));
  }
  return fractions;
}

inline std::vector<HeuristicKind> parse_kind_list(const std::string& text) {
  std::vector<HeuristicKind> kinds;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    const std::size_t comma = text.find(',', begin);
    const std::string tok =
        text.substr(begin, comma == std::string::npos ? std::string::npos
                                                      : comma - begin);
    kinds.push_back(parse_heuristic_kind(tok));
    if (comma == std::string::npos) break;
    begin = comma + 1;
  }
  if (kinds.empty()) throw UsageError("--kinds needs at least one heuristic token");
  return kinds;
}

inline HeuristicConfig heuristic_config_from_json(const nlohmann::json& j) {
  HeuristicConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "katz_beta") {
      cfg.katz_beta = value.get<double>();
    } else if (key == "katz_max_len") {
      cfg.katz_max_len = value.get<std::uint32_t>();
    } else if (key == "simrank_decay") {
      cfg.simrank_decay = value.get<double>();
    } else if (key == "simrank_iters") {
      cfg.simrank_iters = value.get<std::uint32_t>();
    } else if (key == "spd_cap") {
      cfg.spd_cap = value.get<std::uint32_t>();
    } else if (key == "simrank_node_limit") {
      cfg.simrank_node_limit = value.get<std::size_t>();
    } else {
      throw UsageError("unknown heuristic config key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

inline nlohmann::json load_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// Splits a raw edge list into train/valid/test positives plus sampled
// negative pairs sized to match the positives, then writes the split
// directory. Deterministic for a fixed seed.
inline int cmd_ingest(const fs::path& edge_list, const fs::path& out_dir,
                      const std::string& fractions_text, std::uint64_t seed) {
  const auto fractions = parse_fractions(fractions_text);
  EdgeListFile file = load_edge_list(edge_list);
  BuildStats stats;
  Graph g = Graph::build(std::move(file.edges), file.node_count, &stats);
  std::vector<Edge> edges = g.edges();
  if (edges.empty()) throw DataError("edge list has no usable edges: " +
                                     edge_list.string());

  write_run_manifest(out_dir, "ingest",
                     nlohmann::json::array({edge_list.string()}), "", seed);

  Rng shuffle_rng(seed, "split-shuffle");
  shuffle_rng.shuffle(edges);
  const std::size_t m = edges.size();
  std::size_t n_train = static_cast<std::size_t>(std::llround(fractions[0] * m));
  std::size_t n_valid = static_cast<std::size_t>(std::llround(fractions[1] * m));
  n_train = std::min(n_train, m);
  n_valid = std::min(n_valid, m - n_train);
  const std::size_t n_test = m - n_train - n_valid;

  DatasetSplit split;
  split.node_count = g.node_count();
  split.train_pos.assign(edges.begin(), edges.begin() + n_train);
  split.valid_pos.assign(edges.begin() + n_train, edges.begin() + n_train + n_valid);
  split.test_pos.assign(edges.begin() + n_train + n_valid, edges.end());

  Rng neg_rng(seed, "split-negatives");
  EdgeSet no_extra;
  if (n_valid > 0) {
    split.valid_neg = sample_negative_edges(g, n_valid, neg_rng, no_extra);
  }
  if (n_test > 0) {
    split.test_neg = sample_negative_edges(g, n_test, neg_rng, no_extra);
  }
  save_split(out_dir, split);

  std::cout << "ingested " << m << " edges (" << stats.duplicates_dropped
            << " duplicates, " << stats.self_loops_dropped
            << " self-loops dropped) into " << n_train << "/" << n_valid << "/"
            << n_test << " train/valid/test positives\n";
  return kExitOk;
}

// Batch heuristic scoring: CSV with header v,u,<kind>... and reals printed
// with 9 significant digits.
inline int cmd_heuristics(const fs::path& graph_path, const fs::path& pairs_path,
                          const std::string& kinds_text,
                          const std::optional<fs::path>& config_path,
                          const fs::path& out_dir, unsigned workers,
                          std::uint64_t seed) {
  const auto kinds = parse_kind_list(kinds_text);
  HeuristicConfig cfg;
  if (config_path) cfg = heuristic_config_from_json(load_json_file(*config_path));

  EdgeListFile file = load_edge_list(graph_path);
  Graph g = Graph::build(std::move(file.edges), file.node_count);
  EdgeListFile pairs = load_edge_list(pairs_path);
  for (const Edge& e : pairs.edges) {
    if (e.first >= g.node_count() || e.second >= g.node_count()) {
      throw DataError("pair (" + std::to_string(e.first) + ", " +
                      std::to_string(e.second) + ") references a node beyond the " +
                      std::to_string(g.node_count()) + "-node graph");
    }
  }

  write_run_manifest(out_dir, "heuristics",
                     nlohmann::json::array({graph_path.string(), pairs_path.string()}),
                     config_path ? config_path->string() : "", seed);

  const Matrix scores = batch_score(g, pairs.edges, kinds, cfg, workers);
  std::ofstream out(out_dir / "scores.csv");
  if (!out) throw DataError("cannot write scores.csv in " + out_dir.string());
  out << "v,u";
  for (HeuristicKind k : kinds) out << ',' << heuristic_token(k);
  out << '\n';
  char buf[64];
  for (std::size_t r = 0; r < scores.rows; ++r) {
    out << pairs.edges[r].first << ',' << pairs.edges[r].second;
    for (std::size_t c = 0; c < scores.cols; ++c) {
      std::snprintf(buf, sizeof(buf), "%.9g", scores.at(r, c));
      out << ',' << buf;
    }
    out << '\n';
  }
  std::cout << "scored " << scores.rows << " pairs x " << scores.cols
            << " heuristics -> " << (out_dir / "scores.csv").string() << '\n';
  return kExitOk;
}

// Trains per the config on a split directory: fits encoder bins on the
// training graph, runs the epoch loop with validation-based early stopping,
// and writes the best checkpoint plus a JSONL training log.
inline int cmd_train(const fs::path& config_path, const fs::path& split_dir,
                     const fs::path& out_dir, std::optional<std::uint64_t> seed_flag) {
  ModelConfig cfg = model_config_from_json(load_json_file(config_path));
  if (seed_flag) cfg.seed = *seed_flag;

  DatasetSplit split = load_split(split_dir);
  Graph g = Graph::build(split.train_pos, split.node_count);

  Matrix features;
  const fs::path features_path = split_dir / "features.tsv";
  if (variant_uses_x(cfg.variant) && fs::exists(features_path)) {
    features = load_feature_matrix(features_path);
    if (features.rows != split.node_count) {
      throw DataError("features.tsv has " + std::to_string(features.rows) +
                      " rows for a " + std::to_string(split.node_count) +
                      "-node split");
    }
  }

  write_run_manifest(out_dir, "train",
                     nlohmann::json::array({split_dir.string()}),
                     config_path.string(), cfg.seed);

  Trainer trainer(g, std::move(split), cfg, std::move(features));
  std::ofstream log(out_dir / "train_log.jsonl");
  if (!log) throw DataError("cannot write train_log.jsonl in " + out_dir.string());
  const TrainState state = trainer.fit(&log);
  trainer.restore_best();
  const std::uint32_t best_epoch =
      state.best_epoch >= 0 ? static_cast<std::uint32_t>(state.best_epoch)
                            : state.epoch;
  save_checkpoint(out_dir / "checkpoint", trainer.bundle(), best_epoch);

  std::cout << "trained " << variant_name(cfg.variant) << " for " << state.epoch
            << " epochs; best " << cfg.valid_metric << " " << state.best_metric
            << " at epoch " << state.best_epoch << "; checkpoint in "
            << (out_dir / "checkpoint").string() << '\n';
  return kExitOk;
}

// Scores the test split with a trained checkpoint and writes the ranking
// metrics report (JSON plus CSV mirror). Bin specs come from the checkpoint,
// so evaluation reuses the training-time binning bit-exactly.
inline int cmd_eval(const fs::path& checkpoint_dir, const fs::path& split_dir,
                    const fs::path& out_dir, unsigned workers) {
  ModelBundle bundle = load_checkpoint(checkpoint_dir);
  DatasetSplit split = load_split(split_dir);
  if (bundle.node_count != split.node_count) {
    throw DataError("checkpoint was trained on " + std::to_string(bundle.node_count) +
                    " nodes but the split has " + std::to_string(split.node_count));
  }
  Graph g = Graph::build(split.train_pos, split.node_count);

  write_run_manifest(out_dir, "eval",
                     nlohmann::json::array({checkpoint_dir.string(),
                                            split_dir.string()}),
                     "", bundle.cfg.seed);

  const auto pos = predict_scores(g, bundle, split.test_pos, workers);
  const auto neg = predict_scores(g, bundle, split.test_neg, workers);
  const Metrics metrics = compute_ranking_metrics(pos, neg, kDefaultHitsKs);

  std::ofstream json_out(out_dir / "metrics.json");
  if (!json_out) throw DataError("cannot write metrics.json in " + out_dir.string());
  json_out << metrics.to_json().dump(2) << '\n';
  std::ofstream csv_out(out_dir / "metrics.csv");
  if (!csv_out) throw DataError("cannot write metrics.csv in " + out_dir.string());
  csv_out << metrics.to_csv();

  std::cout << metrics.to_json().dump(2) << '\n';
  return kExitOk;
}

// Long-form-only command line front end.
inline int cli_main(int argc, const char* const* argv) {
  CLI::App app{"link prediction toolkit: statistical heuristics, heuristic "
               "encoding and GNN training with node embeddings"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string graph_path;
  std::string pairs_path;
  std::string split_dir;
  std::string config_path;
  std::string out_dir;
  std::string checkpoint_dir;
  std::string kinds;
  std::string fractions = "0.8,0.1,0.1";
  std::uint64_t seed = 1;
  unsigned workers = 1;

  CLI::App* ingest = app.add_subcommand(
      "ingest", "split a raw edge list into train/valid/test with negatives");
  ingest->add_option("--graph", graph_path, "edge list file")->required();
  ingest->add_option("--out", out_dir, "output split directory")->required();
  ingest->add_option("--fractions", fractions,
                     "train,valid,test fractions (must sum to 1)");
  ingest->add_option("--seed", seed, "random seed");

  CLI::App* heur = app.add_subcommand(
      "heuristics", "score node pairs with statistical link heuristics");
  heur->add_option("--graph", graph_path, "edge list file")->required();
  heur->add_option("--pairs", pairs_path, "pairs file (edge-list format)")->required();
  heur->add_option("--kinds", kinds, "comma-separated heuristic tokens")->required();
  heur->add_option("--config", config_path, "heuristic config JSON");
  heur->add_option("--out", out_dir, "output directory")->required();
  heur->add_option("--workers", workers, "scoring threads");
  heur->add_option("--seed", seed, "recorded in the manifest");

  CLI::App* train = app.add_subcommand("train", "train a model on a split directory");
  train->add_option("--config", config_path, "model config JSON")->required();
  train->add_option("--split", split_dir, "split directory")->required();
  train->add_option("--out", out_dir, "output directory")->required();
  bool seed_given = false;
  train->add_option("--seed", seed, "override the config seed")
      ->each([&](const std::string&) { seed_given = true; });

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on a split");
  eval->add_option("--checkpoint", checkpoint_dir, "checkpoint directory")->required();
  eval->add_option("--split", split_dir, "split directory")->required();
  eval->add_option("--out", out_dir, "output directory")->required();
  eval->add_option("--workers", workers, "scoring threads");

  try {
    app.parse(argc, argv);
    if (ingest->parsed()) {
      return cmd_ingest(graph_path, out_dir, fractions, seed);
    }
    if (heur->parsed()) {
      std::optional<fs::path> cfg;
      if (!config_path.empty()) cfg = config_path;
      return cmd_heuristics(graph_path, pairs_path, kinds, cfg, out_dir, workers,
                            seed);
    }
    if (train->parsed()) {
      std::optional<std::uint64_t> seed_override;
      if (seed_given) seed_override = seed;
      return cmd_train(config_path, split_dir, out_dir, seed_override);
    }
    if (eval->parsed()) {
      return cmd_eval(checkpoint_dir, split_dir, out_dir, workers);
    }
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace linkpred
