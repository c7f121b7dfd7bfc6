#pragma once

// Brute-force reference implementations of every heuristic and of the mean
// aggregation operator, built on explicit set operations and dense matrices.
// They share no code with the fast paths and are intended for graphs with
// n <= 64 (Katz/SimRank: n <= 32).

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "linkpred/errors.hpp"
#include "linkpred/heuristics.hpp"
#include "linkpred/matrix.hpp"

namespace linkpred::oracle {

struct DenseGraph {
  std::size_t n = 0;
  std::vector<std::vector<std::uint8_t>> adj;
  std::vector<std::set<NodeId>> nbr;

  static DenseGraph from_edges(std::size_t n, std::span<const Edge> edges) {
    DenseGraph g;
    g.n = n;
    g.adj.assign(n, std::vector<std::uint8_t>(n, 0));
    g.nbr.assign(n, {});
    for (const Edge& e : edges) {
      if (e.first == e.second) continue;
      g.adj[e.first][e.second] = 1;
      g.adj[e.second][e.first] = 1;
      g.nbr[e.first].insert(e.second);
      g.nbr[e.second].insert(e.first);
    }
    return g;
  }

  static DenseGraph from_graph(const Graph& g) {
    return from_edges(g.node_count(), g.edges());
  }

  std::set<NodeId> common(NodeId v, NodeId u) const {
    std::set<NodeId> out;
    for (NodeId z : nbr[v]) {
      if (nbr[u].count(z)) out.insert(z);
    }
    return out;
  }

  double degree(NodeId v) const { return static_cast<double>(nbr[v].size()); }
};

inline double cn(const DenseGraph& g, NodeId v, NodeId u) {
  return static_cast<double>(g.common(v, u).size());
}

inline double jaccard(const DenseGraph& g, NodeId v, NodeId u) {
  std::set<NodeId> uni = g.nbr[v];
  uni.insert(g.nbr[u].begin(), g.nbr[u].end());
  if (uni.empty()) return 0.0;
  return cn(g, v, u) / static_cast<double>(uni.size());
}

inline double adamic_adar(const DenseGraph& g, NodeId v, NodeId u) {
  double sum = 0.0;
  for (NodeId z : g.common(v, u)) {
    if (g.nbr[z].size() >= 2) sum += 1.0 / std::log(g.degree(z));
  }
  return sum;
}

inline double resource_allocation(const DenseGraph& g, NodeId v, NodeId u) {
  double sum = 0.0;
  for (NodeId z : g.common(v, u)) {
    if (!g.nbr[z].empty()) sum += 1.0 / g.degree(z);
  }
  return sum;
}

inline double sorensen(const DenseGraph& g, NodeId v, NodeId u) {
  const double denom = g.degree(v) + g.degree(u);
  return denom == 0.0 ? 0.0 : 2.0 * cn(g, v, u) / denom;
}

inline double salton(const DenseGraph& g, NodeId v, NodeId u) {
  const double denom = std::sqrt(g.degree(v) * g.degree(u));
  return denom == 0.0 ? 0.0 : cn(g, v, u) / denom;
}

inline double hub_promoted(const DenseGraph& g, NodeId v, NodeId u) {
  const double denom = std::min(g.degree(v), g.degree(u));
  return denom == 0.0 ? 0.0 : cn(g, v, u) / denom;
}

inline double hub_depressed(const DenseGraph& g, NodeId v, NodeId u) {
  const double denom = std::max(g.degree(v), g.degree(u));
  return denom == 0.0 ? 0.0 : cn(g, v, u) / denom;
}

inline double preferential_attachment(const DenseGraph& g, NodeId v, NodeId u) {
  return g.degree(v) * g.degree(u);
}

// All-pairs distances by Floyd-Warshall, then capped with the same sentinel
// rule as the fast path.
inline std::vector<std::vector<double>> all_pairs_distances(const DenseGraph& g) {
  const double inf = 1e18;
  std::vector<std::vector<double>> d(g.n, std::vector<double>(g.n, inf));
  for (std::size_t i = 0; i < g.n; ++i) {
    d[i][i] = 0.0;
    for (NodeId j : g.nbr[i]) d[i][j] = 1.0;
  }
  for (std::size_t k = 0; k < g.n; ++k) {
    for (std::size_t i = 0; i < g.n; ++i) {
      for (std::size_t j = 0; j < g.n; ++j) {
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
      }
    }
  }
  return d;
}

inline double shortest_path_distance(const DenseGraph& g, NodeId v, NodeId u,
                                     std::uint32_t cap) {
  const auto d = all_pairs_distances(g);
  const double dist = d[v][u];
  return dist > cap ? cap + 1.0 : dist;
}

inline double local_clustering(const DenseGraph& g, NodeId z) {
  const auto& nbrs = g.nbr[z];
  const std::size_t d = nbrs.size();
  if (d <= 1) return 0.0;
  std::uint64_t edges = 0;
  for (NodeId j : nbrs) {
    for (NodeId k : nbrs) {
      if (j < k && g.adj[j][k]) ++edges;
    }
  }
  return 2.0 * static_cast<double>(edges) /
         (static_cast<double>(d) * static_cast<double>(d - 1));
}

inline double node_clustering(const DenseGraph& g, NodeId v, NodeId u) {
  double sum = 0.0;
  for (NodeId z : g.common(v, u)) sum += local_clustering(g, z);
  return sum;
}

inline double node_link_clustering(const DenseGraph& g, NodeId v, NodeId u) {
  double sum = 0.0;
  for (NodeId z : g.common(v, u)) {
    const std::size_t dz = g.nbr[z].size();
    if (dz <= 1) continue;
    const double cz = local_clustering(g, z);
    std::set<NodeId> vz;
    std::set<NodeId> uz;
    for (NodeId w : g.nbr[z]) {
      if (g.nbr[v].count(w)) vz.insert(w);
      if (g.nbr[u].count(w)) uz.insert(w);
    }
    sum += static_cast<double>(vz.size()) / static_cast<double>(dz - 1) * cz;
    sum += static_cast<double>(uz.size()) / static_cast<double>(dz - 1) * cz;
  }
  return sum;
}

inline std::vector<std::vector<double>> dense_matmul(
    const std::vector<std::vector<double>>& a,
    const std::vector<std::vector<double>>& b) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> out(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < n; ++j) out[i][j] += a[i][k] * b[k][j];
    }
  }
  return out;
}

// Σ_{l=1..L} β^l (A^l)_{v,u} by explicit dense matrix powers.
inline double katz(const DenseGraph& g, NodeId v, NodeId u, double beta,
                   std::uint32_t max_len) {
  std::vector<std::vector<double>> a(g.n, std::vector<double>(g.n, 0.0));
  for (std::size_t i = 0; i < g.n; ++i) {
    for (NodeId j : g.nbr[i]) a[i][j] = 1.0;
  }
  std::vector<std::vector<double>> power = a;
  double total = 0.0;
  double beta_pow = beta;
  for (std::uint32_t l = 1; l <= max_len; ++l) {
    total += beta_pow * power[v][u];
    if (l < max_len) {
      power = dense_matmul(power, a);
      beta_pow *= beta;
    }
  }
  return total;
}

// Literal per-iteration re-implementation of the SimRank update
// s_{ij} <- C/(|Γ_i||Γ_j|) Σ_a Σ_b s_{Γ_i(a) Γ_j(b)}, diagonal pinned to 1.
inline std::vector<std::vector<double>> simrank(const DenseGraph& g, double decay,
                                                std::uint32_t iters) {
  std::vector<std::vector<double>> s(g.n, std::vector<double>(g.n, 0.0));
  for (std::size_t i = 0; i < g.n; ++i) s[i][i] = 1.0;
  for (std::uint32_t m = 0; m < iters; ++m) {
    std::vector<std::vector<double>> next(g.n, std::vector<double>(g.n, 0.0));
    for (std::size_t i = 0; i < g.n; ++i) {
      for (std::size_t j = 0; j < g.n; ++j) {
        if (i == j) {
          next[i][j] = 1.0;
          continue;
        }
        if (g.nbr[i].empty() || g.nbr[j].empty()) continue;
        double acc = 0.0;
        for (NodeId a : g.nbr[i]) {
          for (NodeId b : g.nbr[j]) acc += s[a][b];
        }
        next[i][j] = decay / (g.degree(i) * g.degree(j)) * acc;
      }
    }
    s.swap(next);
  }
  return s;
}

inline double heuristic_value(const DenseGraph& g, NodeId v, NodeId u,
                              HeuristicKind kind, const HeuristicConfig& cfg) {
  switch (kind) {
    case HeuristicKind::CN:
      return cn(g, v, u);
    case HeuristicKind::JA:
      return jaccard(g, v, u);
    case HeuristicKind::AA:
      return adamic_adar(g, v, u);
    case HeuristicKind::RA:
      return resource_allocation(g, v, u);
    case HeuristicKind::Sorensen:
      return sorensen(g, v, u);
    case HeuristicKind::Salton:
      return salton(g, v, u);
    case HeuristicKind::HPI:
      return hub_promoted(g, v, u);
    case HeuristicKind::HDI:
      return hub_depressed(g, v, u);
    case HeuristicKind::PA:
      return preferential_attachment(g, v, u);
    case HeuristicKind::SPD:
      return shortest_path_distance(g, v, u, cfg.spd_cap);
    case HeuristicKind::NodeCC:
      return node_clustering(g, v, u);
    case HeuristicKind::NodeLinkCC:
      return node_link_clustering(g, v, u);
    case HeuristicKind::Katz:
      return katz(g, v, u, cfg.katz_beta, cfg.katz_max_len);
    case HeuristicKind::SimRank:
      return simrank(g, cfg.simrank_decay, cfg.simrank_iters)[v][u];
  }
  throw UsageError("unhandled heuristic kind");
}

// Dense (D+I)^{-1} (A+I) H W reference for the mean-aggregation GCN layer.
inline Matrix gcn_forward(const DenseGraph& g, const Matrix& h, const Matrix& w) {
  Matrix agg(g.n, h.cols);
  for (std::size_t i = 0; i < g.n; ++i) {
    std::vector<double> acc(h.cols, 0.0);
    for (std::size_t c = 0; c < h.cols; ++c) acc[c] = h.at(i, c);
    for (NodeId j : g.nbr[i]) {
      for (std::size_t c = 0; c < h.cols; ++c) acc[c] += h.at(j, c);
    }
    const double inv = 1.0 / (g.degree(i) + 1.0);
    for (std::size_t c = 0; c < h.cols; ++c) agg.at(i, c) = acc[c] * inv;
  }
  return matmul(agg, w);
}

// L-hop ball around v (inclusive) by explicit breadth-first expansion.
inline std::set<NodeId> hop_ball(const DenseGraph& g, NodeId v, std::uint32_t hops) {
  std::set<NodeId> ball{v};
  std::set<NodeId> frontier{v};
  for (std::uint32_t l = 0; l < hops; ++l) {
    std::set<NodeId> next;
    for (NodeId x : frontier) {
      for (NodeId y : g.nbr[x]) {
        if (!ball.count(y)) next.insert(y);
      }
    }
    ball.insert(next.begin(), next.end());
    frontier = std::move(next);
  }
  return ball;
}

}  // namespace linkpred::oracle
