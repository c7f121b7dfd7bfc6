#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "linkpred/cli.hpp"
#include "support/synthetic.hpp"

using namespace linkpred;
namespace fs = std::filesystem;

namespace {

int run_cli(std::vector<std::string> args) {
  std::vector<const char*> argv{"linkpred"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("linkpred_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_planted_split(const fs::path& dir, std::uint64_t seed) {
  const auto task = testing::make_planted_cn_task(60, 60, 10, 0.8, seed);
  DatasetSplit split = task.split;
  // the CLI builds the message graph from train.tsv, so the hub wiring has to
  // ride along as training edges
  split.train_pos = task.graph_edges;
  save_split(dir, split);
  return dir;
}

}  // namespace

TEST_CASE("ingest splits positives by the requested fractions", "[cli]") {
  const fs::path dir = temp_dir("ingest");
  Rng rng(15, "edges");
  std::vector<Edge> edges = testing::er_edges(40, 0.15, rng);
  while (edges.size() > 100) edges.pop_back();
  REQUIRE(edges.size() == 100);
  save_edge_list(dir / "edges.tsv", edges);

  const fs::path out = dir / "split";
  CHECK(run_cli({"ingest", "--graph", (dir / "edges.tsv").string(), "--out",
                 out.string(), "--fractions", "0.8,0.1,0.1", "--seed", "3"}) == 0);
  DatasetSplit split = load_split(out);
  CHECK(split.train_pos.size() == 80);
  CHECK(split.valid_pos.size() == 10);
  CHECK(split.test_pos.size() == 10);
  CHECK(split.valid_neg.size() == 10);
  CHECK(split.test_neg.size() == 10);
  CHECK(fs::exists(out / "manifest.json"));

  // byte-identical rerun
  const fs::path out2 = dir / "split2";
  CHECK(run_cli({"ingest", "--graph", (dir / "edges.tsv").string(), "--out",
                 out2.string(), "--fractions", "0.8,0.1,0.1", "--seed", "3"}) == 0);
  for (const char* name : kSplitFiles) {
    CHECK(slurp(out / name) == slurp(out2 / name));
  }

  // fractions that do not sum to one
  CHECK(run_cli({"ingest", "--graph", (dir / "edges.tsv").string(), "--out",
                 (dir / "bad").string(), "--fractions", "0.7,0.1,0.1"}) == kExitUsage);
}

TEST_CASE("heuristics subcommand writes the documented CSV", "[cli]") {
  const fs::path dir = temp_dir("heur");
  save_edge_list(dir / "graph.tsv",
                 std::vector<Edge>{{1, 2}, {1, 3}, {1, 5}, {1, 6}, {4, 5}, {4, 6}});
  save_edge_list(dir / "pairs.tsv", std::vector<Edge>{{1, 4}});

  const fs::path out = dir / "scores";
  CHECK(run_cli({"heuristics", "--graph", (dir / "graph.tsv").string(), "--pairs",
                 (dir / "pairs.tsv").string(), "--kinds", "cn,aa", "--out",
                 out.string()}) == 0);
  const std::string csv = slurp(out / "scores.csv");
  CHECK(csv.rfind("v,u,cn,aa\n", 0) == 0);
  CHECK(csv.find("1,4,2,") != std::string::npos);
  CHECK(fs::exists(out / "manifest.json"));

  // unknown kind: usage error listing valid tokens
  CHECK(run_cli({"heuristics", "--graph", (dir / "graph.tsv").string(), "--pairs",
                 (dir / "pairs.tsv").string(), "--kinds", "bogus", "--out",
                 (dir / "x").string()}) == kExitUsage);

  // empty pairs file: header-only CSV
  save_edge_list(dir / "none.tsv", {});
  const fs::path out2 = dir / "scores2";
  CHECK(run_cli({"heuristics", "--graph", (dir / "graph.tsv").string(), "--pairs",
                 (dir / "none.tsv").string(), "--kinds", "cn,aa", "--out",
                 out2.string()}) == 0);
  CHECK(slurp(out2 / "scores.csv") == "v,u,cn,aa\n");
}

TEST_CASE("heuristics results match worker counts", "[cli]") {
  const fs::path dir = temp_dir("heur_workers");
  Rng rng(19, "wg");
  save_edge_list(dir / "graph.tsv", testing::er_edges(30, 0.2, rng));
  std::vector<Edge> pairs;
  for (int i = 0; i < 60; ++i) {
    pairs.emplace_back(static_cast<NodeId>(rng.below(30)),
                       static_cast<NodeId>(rng.below(30)));
  }
  save_edge_list(dir / "pairs.tsv", pairs);
  CHECK(run_cli({"heuristics", "--graph", (dir / "graph.tsv").string(), "--pairs",
                 (dir / "pairs.tsv").string(), "--kinds", "cn,ja,katz,spd", "--out",
                 (dir / "w1").string(), "--workers", "1"}) == 0);
  CHECK(run_cli({"heuristics", "--graph", (dir / "graph.tsv").string(), "--pairs",
                 (dir / "pairs.tsv").string(), "--kinds", "cn,ja,katz,spd", "--out",
                 (dir / "w4").string(), "--workers", "4"}) == 0);
  CHECK(slurp(dir / "w1" / "scores.csv") == slurp(dir / "w4" / "scores.csv"));
}

TEST_CASE("train and eval round trip on the planted task", "[cli]") {
  const fs::path dir = temp_dir("train_eval");
  write_planted_split(dir / "split", 21);

  nlohmann::json cfg;
  cfg["variant"] = "he";
  cfg["heuristics"] = {"cn"};
  cfg["heuristic_dim"] = 8;
  cfg["predictor_layers"] = 2;
  cfg["predictor_hidden"] = 16;
  cfg["dropout"] = 0.0;
  cfg["lr"] = 0.02;
  cfg["epochs"] = 50;
  cfg["patience"] = 50;
  cfg["batch_size"] = 4096;
  cfg["seed"] = 13;
  {
    std::ofstream out(dir / "config.json");
    out << cfg.dump(2);
  }

  const fs::path run1 = dir / "run1";
  CHECK(run_cli({"train", "--config", (dir / "config.json").string(), "--split",
                 (dir / "split").string(), "--out", run1.string()}) == 0);
  CHECK(fs::exists(run1 / "manifest.json"));
  CHECK(fs::exists(run1 / "train_log.jsonl"));
  CHECK(fs::exists(run1 / "checkpoint" / "manifest.json"));

  const fs::path eval1 = dir / "eval1";
  CHECK(run_cli({"eval", "--checkpoint", (run1 / "checkpoint").string(), "--split",
                 (dir / "split").string(), "--out", eval1.string()}) == 0);
  const nlohmann::json metrics = nlohmann::json::parse(slurp(eval1 / "metrics.json"));
  CHECK(metrics.at("auc").get<double>() >= 0.95);
  CHECK(fs::exists(eval1 / "metrics.csv"));

  // identical seed, identical metrics bytes
  const fs::path run2 = dir / "run2";
  const fs::path eval2 = dir / "eval2";
  CHECK(run_cli({"train", "--config", (dir / "config.json").string(), "--split",
                 (dir / "split").string(), "--out", run2.string()}) == 0);
  CHECK(run_cli({"eval", "--checkpoint", (run2 / "checkpoint").string(), "--split",
                 (dir / "split").string(), "--out", eval2.string()}) == 0);
  CHECK(slurp(eval1 / "metrics.json") == slurp(eval2 / "metrics.json"));
}

TEST_CASE("eval rejects a node-count mismatch", "[cli]") {
  const fs::path dir = temp_dir("eval_mismatch");
  write_planted_split(dir / "split", 23);

  nlohmann::json cfg;
  cfg["variant"] = "he";
  cfg["heuristics"] = {"cn"};
  cfg["predictor_layers"] = 2;
  cfg["predictor_hidden"] = 8;
  cfg["heuristic_dim"] = 4;
  cfg["dropout"] = 0.0;
  cfg["epochs"] = 2;
  cfg["seed"] = 1;
  {
    std::ofstream out(dir / "config.json");
    out << cfg.dump(2);
  }
  const fs::path run = dir / "run";
  REQUIRE(run_cli({"train", "--config", (dir / "config.json").string(), "--split",
                   (dir / "split").string(), "--out", run.string()}) == 0);

  // a different split with a different node count
  const fs::path other = dir / "other_split";
  DatasetSplit small;
  small.node_count = 5;
  small.train_pos = {{0, 1}, {1, 2}, {2, 3}, {3, 4}};
  small.valid_pos = {{0, 2}};
  small.valid_neg = {{0, 4}};
  small.test_pos = {{1, 3}};
  small.test_neg = {{0, 3}};
  save_split(other, small);
  CHECK(run_cli({"eval", "--checkpoint", (run / "checkpoint").string(), "--split",
                 other.string(), "--out", (dir / "bad").string()}) == kExitData);
}

TEST_CASE("config parsing rejects unknown keys", "[cli]") {
  const fs::path dir = temp_dir("badcfg");
  write_planted_split(dir / "split", 25);
  nlohmann::json cfg;
  cfg["variant"] = "he";
  cfg["heuristics"] = {"cn"};
  cfg["no_such_key"] = 5;
  {
    std::ofstream out(dir / "config.json");
    out << cfg.dump(2);
  }
  CHECK(run_cli({"train", "--config", (dir / "config.json").string(), "--split",
                 (dir / "split").string(), "--out", (dir / "out").string()}) ==
        kExitUsage);
}

TEST_CASE("data errors map to exit code 2", "[cli]") {
  const fs::path dir = temp_dir("dataerr");
  {
    std::ofstream out(dir / "broken.tsv");
    out << "0\t1\nnot an edge\n";
  }
  save_edge_list(dir / "pairs.tsv", std::vector<Edge>{{0, 1}});
  CHECK(run_cli({"heuristics", "--graph", (dir / "broken.tsv").string(), "--pairs",
                 (dir / "pairs.tsv").string(), "--kinds", "cn", "--out",
                 (dir / "out").string()}) == kExitData);
}
