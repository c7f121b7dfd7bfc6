#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <set>

#include "linkpred/dense_oracles.hpp"
#include "linkpred/metrics.hpp"
#include "linkpred/trainer.hpp"
#include "support/synthetic.hpp"

using namespace linkpred;
namespace fs = std::filesystem;

namespace {

// Tiny but well-connected training setup.
struct TinyTask {
  Graph graph;
  DatasetSplit split;
};

TinyTask make_tiny_task(std::uint64_t seed = 3) {
  TinyTask t;
  Rng rng(seed, "tiny");
  auto edges = testing::er_edges(10, 0.4, rng);
  edges.emplace_back(0, 1);
  t.graph = Graph::build(edges, 10);
  t.split.node_count = 10;
  t.split.train_pos = t.graph.edges();
  return t;
}

ModelConfig tiny_config(Variant variant) {
  ModelConfig cfg;
  cfg.variant = variant;
  cfg.gnn_layers = 2;
  cfg.predictor_layers = 2;
  cfg.predictor_hidden = 8;
  cfg.node_emb_dim = 8;
  cfg.feature_dim = 8;
  cfg.heuristics = {HeuristicKind::CN};
  cfg.encoder.dim_h = 4;
  cfg.encoder.int_cap = 16;
  cfg.dropout = 0.0;
  cfg.lr = 0.05;
  cfg.batch_size = 1000;
  cfg.epochs = 10;
  cfg.seed = 7;
  return cfg;
}

std::vector<double> flat_params(const ModelBundle& mb) {
  std::vector<double> out;
  ModelBundle& m = const_cast<ModelBundle&>(mb);
  for (const ParamRef& p : m.params()) {
    out.insert(out.end(), p.param->values.begin(), p.param->values.end());
  }
  return out;
}

}  // namespace

TEST_CASE("build_model allocates exactly the variant's parameters", "[trainer]") {
  TinyTask t = make_tiny_task();
  Rng rng(1, "init");

  ModelConfig he_cfg = tiny_config(Variant::HE);
  std::vector<double> cn_values{0, 1, 2, 3};
  auto specs = fit_bin_specs(he_cfg.heuristics, std::vector<std::vector<double>>{cn_values},
                             he_cfg.encoder, he_cfg.heuristic_cfg);
  ModelBundle he = build_model(t.graph, he_cfg, {}, specs, rng);
  CHECK(he.gcn_weights.empty());
  CHECK(he.node_emb.empty());
  CHECK(he.encoder.tables.size() == 1);

  ModelConfig xne_cfg = tiny_config(Variant::GNN_XNE);
  Matrix features(10, 8);
  ModelBundle xne = build_model(t.graph, xne_cfg, features, {}, rng);
  CHECK(xne.input_dim() == 16);  // f + d
  CHECK(xne.gcn_weights.size() == 2);
  CHECK(xne.gcn_weights[0].rows == 16);
  CHECK(xne.encoder.tables.empty());

  // dense-graph defaults: emb dim 512, 2 GCN layers, 4-layer predictor
  ModelConfig defaults;
  CHECK(defaults.node_emb_dim == 512);
  CHECK(defaults.gnn_layers == 2);
  CHECK(defaults.predictor_layers == 4);
  CHECK(defaults.lr == 0.003);
  CHECK(defaults.dropout == 0.3);
  CHECK(defaults.clip_norm == 5.0);
  CHECK(defaults.batch_size == 100000);
  CHECK(defaults.encoder.dim_h == 32);
}

TEST_CASE("variant parameter algebra", "[trainer]") {
  TinyTask t = make_tiny_task();
  auto names_for = [&](Variant variant) {
    ModelConfig cfg = tiny_config(variant);
    cfg.seed = 9;
    Trainer trainer(t.graph, t.split, cfg);
    std::set<std::string> names;
    for (const ParamRef& p : trainer.bundle().params()) names.insert(p.path);
    return names;
  };
  const auto he = names_for(Variant::HE);
  const auto gnn_x = names_for(Variant::GNN_X);
  const auto gnn_x_he = names_for(Variant::GNN_X_HE);

  // graph-side and heuristic-side parameters never overlap
  std::set<std::string> graph_side;
  for (const auto& n : gnn_x) {
    if (n.rfind("mlp.", 0) != 0) graph_side.insert(n);
  }
  std::set<std::string> heur_side;
  for (const auto& n : he) {
    if (n.rfind("mlp.", 0) != 0) heur_side.insert(n);
  }
  for (const auto& n : graph_side) CHECK(heur_side.count(n) == 0);

  // the combined variant's parameter set is exactly the union
  std::set<std::string> expected = he;
  expected.insert(gnn_x.begin(), gnn_x.end());
  CHECK(gnn_x_he == expected);
}

TEST_CASE("overfit sanity: loss collapses on a fixed pair batch", "[trainer]") {
  TinyTask t = make_tiny_task();
  ModelConfig cfg = tiny_config(Variant::GNN_NE);
  cfg.lr = 0.03;
  Rng init(cfg.seed, "init");
  ModelBundle mb = build_model(t.graph, cfg, {}, {}, init);

  // one positive, one fixed negative, 200 optimizer steps
  const Edge pos = t.split.train_pos.front();
  const auto negs = sample_negative_edges(t.graph, 1, std::uint64_t{4}, EdgeSet{});
  const std::vector<LinkSample> batch{{pos.first, pos.second, 1.0},
                                      {negs[0].first, negs[0].second, 0.0}};
  AdamState adam;
  auto params = mb.params();
  std::vector<double> losses;
  for (int step = 0; step < 200; ++step) {
    mb.zero_grads();
    ForwardTape tape = model_forward(t.graph, mb, batch, {}, true);
    losses.push_back(model_backward(t.graph, mb, tape, batch));
    clip_grad_norm(params, cfg.clip_norm);
    adam_step(params, adam, cfg.lr);
  }
  CHECK(losses.back() < 0.1);
  // strictly decreasing 10-step window means
  std::vector<double> windows;
  for (std::size_t w = 0; w + 10 <= losses.size(); w += 10) {
    double s = 0.0;
    for (std::size_t i = w; i < w + 10; ++i) s += losses[i];
    windows.push_back(s / 10.0);
  }
  for (std::size_t i = 1; i < windows.size(); ++i) CHECK(windows[i] < windows[i - 1]);
}

TEST_CASE("epoch losses trend down on the planted task", "[trainer]") {
  const auto task = testing::make_planted_cn_task(40, 40, 8, 0.8, 55);
  Graph g = Graph::build(task.graph_edges, task.node_count);
  ModelConfig cfg;
  cfg.variant = Variant::HE;
  cfg.heuristics = {HeuristicKind::CN};
  cfg.encoder.dim_h = 4;
  cfg.predictor_layers = 2;
  cfg.predictor_hidden = 8;
  cfg.dropout = 0.0;
  cfg.lr = 0.02;
  cfg.seed = 2;
  Trainer trainer(g, task.split, cfg);
  std::vector<double> losses;
  for (int e = 0; e < 30; ++e) losses.push_back(trainer.train_epoch());
  double head = 0.0, tail = 0.0;
  for (int i = 0; i < 5; ++i) head += losses[i];
  for (int i = 25; i < 30; ++i) tail += losses[i];
  CHECK(tail < head);
}

TEST_CASE("zero learning rate leaves parameters unchanged", "[trainer]") {
  TinyTask t = make_tiny_task();
  ModelConfig cfg = tiny_config(Variant::GNN_NE);
  cfg.lr = 0.0;
  Trainer trainer(t.graph, t.split, cfg);
  const auto before = flat_params(trainer.bundle());
  trainer.train_epoch();
  trainer.train_epoch();
  CHECK(flat_params(trainer.bundle()) == before);
}

TEST_CASE("equal seeds give bitwise-equal parameters", "[trainer]") {
  TinyTask t = make_tiny_task();
  for (Variant variant : {Variant::GNN_XNE_HE, Variant::HE}) {
    ModelConfig cfg = tiny_config(variant);
    cfg.dropout = 0.2;
    Trainer a(t.graph, t.split, cfg);
    Trainer b(t.graph, t.split, cfg);
    for (int e = 0; e < 5; ++e) {
      const double la = a.train_epoch();
      const double lb = b.train_epoch();
      CHECK(la == lb);
    }
    CHECK(flat_params(a.bundle()) == flat_params(b.bundle()));
  }
}

TEST_CASE("negative samples never collide with any positive split", "[trainer]") {
  TinyTask t = make_tiny_task();
  DatasetSplit split = t.split;
  // move some positives into valid/test so the exclusion spans all three
  split.valid_pos = {split.train_pos.back()};
  split.train_pos.pop_back();
  split.test_pos = {split.train_pos.back()};
  split.train_pos.pop_back();
  split.valid_neg = sample_negative_edges(t.graph, 3, std::uint64_t{11}, EdgeSet{});
  split.test_neg = split.valid_neg;

  EdgeSet all_pos;
  all_pos.insert(split.train_pos);
  all_pos.insert(split.valid_pos);
  all_pos.insert(split.test_pos);

  ModelConfig cfg = tiny_config(Variant::GNN_NE);
  Trainer trainer(t.graph, split, cfg);
  std::size_t seen = 0;
  trainer.negative_observer = [&](const std::vector<Edge>& negs) {
    for (const Edge& e : negs) {
      ++seen;
      CHECK_FALSE(all_pos.contains(e.first, e.second));
      CHECK_FALSE(t.graph.has_edge(e.first, e.second));
    }
  };
  for (int e = 0; e < 5; ++e) trainer.train_epoch();
  CHECK(seen > 0);
}

TEST_CASE("one step only moves embeddings inside the receptive field", "[trainer]") {
  TinyTask t = make_tiny_task();
  DatasetSplit split;
  split.node_count = 10;
  split.train_pos = {t.split.train_pos.front()};
  ModelConfig cfg = tiny_config(Variant::GNN_NE);
  Trainer trainer(t.graph, split, cfg);
  const Matrix before = trainer.bundle().node_emb;
  trainer.train_epoch();

  oracle::DenseGraph dense = oracle::DenseGraph::from_graph(t.graph);
  const Edge e = split.train_pos[0];
  // the batch is the positive pair plus one sampled negative; collect the
  // union of 2-hop balls around every endpoint that can have moved
  std::set<NodeId> changed;
  for (NodeId r = 0; r < 10; ++r) {
    for (std::size_t c = 0; c < before.cols; ++c) {
      if (trainer.bundle().node_emb.at(r, c) != before.at(r, c)) {
        changed.insert(r);
        break;
      }
    }
  }
  std::set<NodeId> allowed = oracle::hop_ball(dense, e.first, 2);
  const auto ball_u = oracle::hop_ball(dense, e.second, 2);
  allowed.insert(ball_u.begin(), ball_u.end());
  std::vector<Edge> negs;
  trainer.negative_observer = [&](const std::vector<Edge>& n) { negs = n; };
  // rerun identically to recover the sampled negative
  Trainer replay(t.graph, split, cfg);
  replay.negative_observer = [&](const std::vector<Edge>& n) { negs = n; };
  replay.train_epoch();
  for (const Edge& n : negs) {
    const auto ball_v = oracle::hop_ball(dense, n.first, 2);
    const auto ball_w = oracle::hop_ball(dense, n.second, 2);
    allowed.insert(ball_v.begin(), ball_v.end());
    allowed.insert(ball_w.begin(), ball_w.end());
  }
  for (NodeId r : changed) CHECK(allowed.count(r) == 1);
}

TEST_CASE("predict is deterministic, order-equivariant and symmetric", "[trainer]") {
  TinyTask t = make_tiny_task();
  ModelConfig cfg = tiny_config(Variant::GNN_NE_HE);
  Trainer trainer(t.graph, t.split, cfg);
  trainer.train_epoch();

  std::vector<Edge> pairs{{0, 5}, {2, 7}, {1, 3}};
  const auto scores = trainer.predict(pairs);
  CHECK(trainer.predict(pairs) == scores);

  std::vector<Edge> permuted{{1, 3}, {0, 5}, {2, 7}};
  const auto scores2 = trainer.predict(permuted);
  CHECK(scores2 == std::vector<double>{scores[2], scores[0], scores[1]});

  // Hadamard combine + symmetric heuristics: direction does not matter
  std::vector<Edge> flipped{{5, 0}, {7, 2}, {3, 1}};
  const auto scores3 = trainer.predict(flipped);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    CHECK(scores3[i] == Catch::Approx(scores[i]).margin(1e-12));
  }
}

TEST_CASE("fit on the planted-CN task separates with HE(CN)", "[trainer]") {
  const auto task = testing::make_planted_cn_task(60, 60, 10, 0.8, 77);
  Graph g = Graph::build(task.graph_edges, task.node_count);
  ModelConfig cfg;
  cfg.variant = Variant::HE;
  cfg.heuristics = {HeuristicKind::CN};
  cfg.encoder.dim_h = 8;
  cfg.encoder.int_cap = 16;
  cfg.predictor_layers = 2;
  cfg.predictor_hidden = 16;
  cfg.dropout = 0.0;
  cfg.lr = 0.02;
  cfg.epochs = 60;
  cfg.patience = 60;
  cfg.seed = 5;
  Trainer trainer(g, task.split, cfg);
  const TrainState state = trainer.fit();
  CHECK(state.best_metric >= 0.95);
}

TEST_CASE("early stopping exhausts patience before the epoch budget", "[trainer]") {
  const auto task = testing::make_planted_cn_task(40, 40, 8, 0.8, 99);
  Graph g = Graph::build(task.graph_edges, task.node_count);
  ModelConfig cfg;
  cfg.variant = Variant::HE;
  cfg.heuristics = {HeuristicKind::CN};
  cfg.encoder.dim_h = 4;
  cfg.predictor_layers = 2;
  cfg.predictor_hidden = 8;
  cfg.dropout = 0.0;
  cfg.lr = 0.05;
  cfg.epochs = 500;
  cfg.patience = 5;
  cfg.seed = 6;
  Trainer trainer(g, task.split, cfg);
  const TrainState state = trainer.fit();
  CHECK(state.epoch < 500);
  CHECK(state.log.size() == state.epoch);
}

TEST_CASE("epochs=0 returns the initialized untrained state", "[trainer]") {
  TinyTask t = make_tiny_task();
  ModelConfig cfg = tiny_config(Variant::GNN_NE);
  cfg.epochs = 0;
  Trainer trainer(t.graph, t.split, cfg);
  const auto init = flat_params(trainer.bundle());
  const TrainState state = trainer.fit();
  CHECK(state.epoch == 0);
  CHECK(state.best_epoch == -1);
  CHECK(flat_params(trainer.bundle()) == init);
}

TEST_CASE("train state save/load resumes bitwise", "[trainer]") {
  TinyTask t = make_tiny_task();
  DatasetSplit split = t.split;
  split.valid_pos = {split.train_pos.back()};
  split.train_pos.pop_back();
  split.valid_neg = sample_negative_edges(t.graph, 4, std::uint64_t{13}, EdgeSet{});

  ModelConfig cfg = tiny_config(Variant::GNN_NE_HE);
  cfg.dropout = 0.1;
  cfg.epochs = 6;
  cfg.patience = 50;

  // uninterrupted run
  Trainer full(t.graph, split, cfg);
  full.fit();
  const auto want = flat_params(full.bundle());

  // interrupted: 3 epochs, save, reload into a fresh trainer, finish
  const fs::path dir = fs::temp_directory_path() / "linkpred_test_resume";
  fs::remove_all(dir);
  {
    ModelConfig half = cfg;
    half.epochs = 3;
    Trainer first(t.graph, split, half);
    first.fit();
    first.save_state(dir);
  }
  {
    ModelConfig bad = cfg;
    bad.lr = 0.123;
    Trainer mismatch(t.graph, split, bad);
    CHECK_THROWS_AS(mismatch.load_state(dir), DataError);
  }
  Trainer finisher(t.graph, split, cfg);  // full 6-epoch budget
  finisher.load_state(dir);
  CHECK(finisher.state().epoch == 3);
  finisher.fit();
  CHECK(flat_params(finisher.bundle()) == want);
}
