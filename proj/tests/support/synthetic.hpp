#pragma once

// Synthetic graph and task generators shared by the unit and acceptance
// suites.

#include <cstdint>
#include <numeric>
#include <vector>

#include "linkpred/graph.hpp"
#include "linkpred/rng.hpp"

namespace linkpred::testing {

// Erdos-Renyi G(n, p).
inline std::vector<Edge> er_edges(NodeId n, double p, Rng& rng) {
  std::vector<Edge> edges;
  for (NodeId v = 0; v < n; ++v) {
    for (NodeId u = v + 1; u < n; ++u) {
      if (rng.uniform() < p) edges.emplace_back(v, u);
    }
  }
  return edges;
}

// Planted-partition graph: `blocks` equal communities, intra-community edge
// probability p_in, inter-community probability p_out.
inline std::vector<Edge> sbm_edges(NodeId n, NodeId blocks, double p_in, double p_out,
                                   Rng& rng) {
  const NodeId block_size = n / blocks;
  auto block_of = [&](NodeId v) { return std::min<NodeId>(v / block_size, blocks - 1); };
  std::vector<Edge> edges;
  for (NodeId v = 0; v < n; ++v) {
    for (NodeId u = v + 1; u < n; ++u) {
      const double p = block_of(v) == block_of(u) ? p_in : p_out;
      if (rng.uniform() < p) edges.emplace_back(v, u);
    }
  }
  return edges;
}

// Degree-corrected planted communities: each node carries a uniform[0,1]
// peripherality r, and intra-community pairs link with probability
// q_core - spread * (r_v + r_u) (clamped), inter-community pairs with q_out.
// Which intra pairs stay non-edges is therefore predictable from the node
// propensities rather than iid coin flips.
inline std::vector<Edge> dcsbm_edges(NodeId n, NodeId blocks, double q_core,
                                     double spread, double q_out, Rng& rng) {
  const NodeId block_size = n / blocks;
  auto block_of = [&](NodeId v) { return std::min<NodeId>(v / block_size, blocks - 1); };
  std::vector<double> peripherality(n);
  for (double& r : peripherality) r = rng.uniform();
  std::vector<Edge> edges;
  for (NodeId v = 0; v < n; ++v) {
    for (NodeId u = v + 1; u < n; ++u) {
      double p = q_out;
      if (block_of(v) == block_of(u)) {
        p = std::max(0.0, q_core - spread * (peripherality[v] + peripherality[u]));
      }
      if (rng.uniform() < p) edges.emplace_back(v, u);
    }
  }
  return edges;
}

// Link-prediction task where every planted positive pair shares exactly two
// common neighbors (two hubs wired to both endpoints) and every planted
// negative pair shares none (two disjoint hubs per endpoint). The pair edges
// split into training and held-out positives; hub edges always stay in the
// training graph. `leaf_noise` dedicated degree-1 neighbors per pair node
// inflate degrees without ever creating a common neighbor.
struct PlantedCnTask {
  std::vector<Edge> graph_edges;  // hub wiring + noise + training pair edges
  DatasetSplit split;
  NodeId node_count = 0;
};

inline PlantedCnTask make_planted_cn_task(std::size_t pos_pairs, std::size_t neg_pairs,
                                          NodeId hubs, double train_fraction,
                                          std::uint64_t seed,
                                          NodeId leaf_noise = 0) {
  Rng rng(seed, "planted-cn");
  PlantedCnTask task;
  NodeId next = hubs;
  std::vector<Edge> structural;
  std::vector<Edge> pair_edges;

  auto pick_two_hubs = [&](NodeId& a, NodeId& b) {
    a = static_cast<NodeId>(rng.below(hubs));
    do {
      b = static_cast<NodeId>(rng.below(hubs));
    } while (b == a);
  };

  for (std::size_t i = 0; i < pos_pairs; ++i) {
    const NodeId v = next++;
    const NodeId u = next++;
    NodeId h1 = 0, h2 = 0;
    pick_two_hubs(h1, h2);
    structural.emplace_back(v, h1);
    structural.emplace_back(v, h2);
    structural.emplace_back(u, h1);
    structural.emplace_back(u, h2);
    pair_edges.emplace_back(v, u);
  }

  std::vector<Edge> negatives;
  for (std::size_t i = 0; i < neg_pairs; ++i) {
    const NodeId w = next++;
    const NodeId x = next++;
    NodeId a = 0, b = 0, c = 0, d = 0;
    pick_two_hubs(a, b);
    do {
      pick_two_hubs(c, d);
    } while (c == a || c == b || d == a || d == b);
    structural.emplace_back(w, a);
    structural.emplace_back(w, b);
    structural.emplace_back(x, c);
    structural.emplace_back(x, d);
    negatives.emplace_back(w, x);
  }

  if (leaf_noise > 0) {
    const NodeId pair_nodes_end = next;
    for (NodeId owner = hubs; owner < pair_nodes_end; ++owner) {
      for (NodeId k = 0; k < leaf_noise; ++k) structural.emplace_back(owner, next++);
    }
  }

  rng.shuffle(pair_edges);
  const std::size_t n_train =
      static_cast<std::size_t>(train_fraction * static_cast<double>(pair_edges.size()));
  const std::size_t n_held = pair_edges.size() - n_train;
  const std::size_t n_valid = n_held / 2;

  task.node_count = next;
  task.split.node_count = next;
  task.split.train_pos.assign(pair_edges.begin(), pair_edges.begin() + n_train);
  task.split.valid_pos.assign(pair_edges.begin() + n_train,
                              pair_edges.begin() + n_train + n_valid);
  task.split.test_pos.assign(pair_edges.begin() + n_train + n_valid, pair_edges.end());
  const std::size_t neg_valid = negatives.size() / 2;
  task.split.valid_neg.assign(negatives.begin(), negatives.begin() + neg_valid);
  task.split.test_neg.assign(negatives.begin() + neg_valid, negatives.end());

  task.graph_edges = structural;
  task.graph_edges.insert(task.graph_edges.end(), task.split.train_pos.begin(),
                          task.split.train_pos.end());
  return task;
}

// Two multisets of non-negative integers with different sizes but the same
// integer mean.
struct EqualMeanMultisets {
  std::vector<double> a;
  std::vector<double> b;
  double mean = 0.0;
};

inline EqualMeanMultisets make_equal_mean_multisets(Rng& rng) {
  EqualMeanMultisets out;
  const std::size_t na = 2 + rng.below(10);
  std::size_t nb = 2 + rng.below(10);
  while (nb == na) nb = 2 + rng.below(10);
  const double mean = static_cast<double>(1 + rng.below(20));
  auto fill = [&](std::vector<double>& set, std::size_t n) {
    set.assign(n, mean);
    for (std::size_t step = 0; step < 3 * n; ++step) {
      const std::size_t i = rng.below(n);
      const std::size_t j = rng.below(n);
      if (i == j) continue;
      const double delta = static_cast<double>(1 + rng.below(3));
      if (set[j] >= delta) {
        set[i] += delta;
        set[j] -= delta;
      }
    }
  };
  fill(out.a, na);
  fill(out.b, nb);
  out.mean = mean;
  return out;
}

}  // namespace linkpred::testing
