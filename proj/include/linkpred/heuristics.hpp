#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "linkpred/errors.hpp"
#include "linkpred/graph.hpp"
#include "linkpred/matrix.hpp"

namespace linkpred {

enum class HeuristicKind {
  CN,
  JA,
  AA,
  RA,
  Sorensen,
  Salton,
  HPI,
  HDI,
  PA,
  SPD,
  NodeCC,
  NodeLinkCC,
  Katz,
  SimRank,
};

inline constexpr std::array<std::pair<HeuristicKind, std::string_view>, 14>
    kHeuristicTokens{{
        {HeuristicKind::CN, "cn"},
        {HeuristicKind::JA, "ja"},
        {HeuristicKind::AA, "aa"},
        {HeuristicKind::RA, "ra"},
        {HeuristicKind::Sorensen, "sorensen"},
        {HeuristicKind::Salton, "salton"},
        {HeuristicKind::HPI, "hpi"},
        {HeuristicKind::HDI, "hdi"},
        {HeuristicKind::PA, "pa"},
        {HeuristicKind::SPD, "spd"},
        {HeuristicKind::NodeCC, "ncc"},
        {HeuristicKind::NodeLinkCC, "nlcc"},
        {HeuristicKind::Katz, "katz"},
        {HeuristicKind::SimRank, "simrank"},
    }};

inline std::string_view heuristic_token(HeuristicKind k) {
  for (const auto& [kind, token] : kHeuristicTokens) {
    if (kind == k) return token;
  }
  return "?";
}

inline std::string valid_heuristic_tokens() {
  std::string all;
  for (const auto& [kind, token] : kHeuristicTokens) {
    if (!all.empty()) all += ", ";
    all += token;
  }
  return all;
}

inline HeuristicKind parse_heuristic_kind(std::string_view token) {
  for (const auto& [kind, tok] : kHeuristicTokens) {
    if (tok == token) return kind;
  }
  throw UsageError("unknown heuristic '" + std::string(token) +
                   "'; valid tokens: " + valid_heuristic_tokens());
}

struct HeuristicConfig {
  double katz_beta = 0.1;       // damping, in (0, 1)
  std::uint32_t katz_max_len = 4;  // walk-length truncation, >= 1
  double simrank_decay = 0.8;   // C, in (0, 1)
  std::uint32_t simrank_iters = 5;  // K, >= 1
  std::uint32_t spd_cap = 6;    // max BFS depth, >= 1
  std::size_t simrank_node_limit = 5000;

  void validate() const {
    if (!(katz_beta > 0.0 && katz_beta < 1.0)) {
      throw UsageError("katz_beta must be in (0, 1)");
    }
    if (katz_max_len < 1) throw UsageError("katz_max_len must be >= 1");
    if (!(simrank_decay > 0.0 && simrank_decay < 1.0)) {
      throw UsageError("simrank_decay must be in (0, 1)");
    }
    if (simrank_iters < 1) throw UsageError("simrank_iters must be >= 1");
    if (spd_cap < 1) throw UsageError("spd_cap must be >= 1");
  }
};

// |Γ_v ∩ Γ_u| by linear merge of the sorted neighbor slices.
inline std::uint32_t cn(const Graph& g, NodeId v, NodeId u) {
  auto a = g.neighbors(v);
  auto b = g.neighbors(u);
  std::uint32_t count = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

// Ratio heuristics return 0 whenever the denominator is 0; the numerator is
// then necessarily 0 as well.
inline double jaccard(const Graph& g, NodeId v, NodeId u) {
  const double inter = cn(g, v, u);
  const double uni = static_cast<double>(g.degree(v)) + g.degree(u) - inter;
  return uni == 0.0 ? 0.0 : inter / uni;
}

// Sum of 1/ln(deg z) over common neighbors; a common neighbor of a proper
// pair always has degree >= 2, so ln is positive. Degree-1 corner (only
// reachable for self-pairs) contributes 0.
inline double adamic_adar(const Graph& g, NodeId v, NodeId u) {
  double sum = 0.0;
  for (NodeId z : g.common_neighbor_ids(v, u)) {
    const NodeId d = g.degree(z);
    if (d >= 2) sum += 1.0 / std::log(static_cast<double>(d));
  }
  return sum;
}

inline double resource_allocation(const Graph& g, NodeId v, NodeId u) {
  double sum = 0.0;
  for (NodeId z : g.common_neighbor_ids(v, u)) {
    const NodeId d = g.degree(z);
    if (d >= 1) sum += 1.0 / static_cast<double>(d);
  }
  return sum;
}

inline double sorensen(const Graph& g, NodeId v, NodeId u) {
  const double denom = static_cast<double>(g.degree(v)) + g.degree(u);
  return denom == 0.0 ? 0.0 : 2.0 * cn(g, v, u) / denom;
}

inline double salton(const Graph& g, NodeId v, NodeId u) {
  const double denom =
      std::sqrt(static_cast<double>(g.degree(v)) * static_cast<double>(g.degree(u)));
  return denom == 0.0 ? 0.0 : cn(g, v, u) / denom;
}

inline double hub_promoted(const Graph& g, NodeId v, NodeId u) {
  const double denom = std::min(g.degree(v), g.degree(u));
  return denom == 0.0 ? 0.0 : cn(g, v, u) / denom;
}

inline double hub_depressed(const Graph& g, NodeId v, NodeId u) {
  const double denom = std::max(g.degree(v), g.degree(u));
  return denom == 0.0 ? 0.0 : cn(g, v, u) / denom;
}

inline std::uint64_t preferential_attachment(const Graph& g, NodeId v, NodeId u) {
  return static_cast<std::uint64_t>(g.degree(v)) * g.degree(u);
}

// BFS hop count truncated at cap; unreachable-within-cap yields the sentinel
// cap + 1, which downstream encoders keep distinct from every finite value.
inline std::uint32_t shortest_path_distance(const Graph& g, NodeId v, NodeId u,
                                            std::uint32_t cap) {
  return shortest_path_hops(g, v, u, cap);
}

// C(z) = 2 * |edges among Γ_z| / (|Γ_z| (|Γ_z| - 1)); 0 when |Γ_z| <= 1.
inline double local_clustering(const Graph& g, NodeId z) {
  const auto nbrs = g.neighbors(z);
  const std::size_t d = nbrs.size();
  if (d <= 1) return 0.0;
  std::uint64_t closed = 0;  // counts each neighbor-neighbor edge twice
  for (NodeId j : nbrs) closed += cn(g, j, z);
  return static_cast<double>(closed) /
         (static_cast<double>(d) * static_cast<double>(d - 1));
}

inline double node_clustering(const Graph& g, NodeId v, NodeId u) {
  double sum = 0.0;
  for (NodeId z : g.common_neighbor_ids(v, u)) sum += local_clustering(g, z);
  return sum;
}

inline double node_link_clustering(const Graph& g, NodeId v, NodeId u) {
  double sum = 0.0;
  for (NodeId z : g.common_neighbor_ids(v, u)) {
    const NodeId dz = g.degree(z);
    if (dz <= 1) continue;
    const double cz = local_clustering(g, z);
    const double denom = static_cast<double>(dz - 1);
    sum += static_cast<double>(cn(g, v, z)) / denom * cz;
    sum += static_cast<double>(cn(g, u, z)) / denom * cz;
  }
  return sum;
}

// Damped walk-count sum Σ_{l=1..L} β^l (A^l)_{v,u}, computed by L sparse
// frontier expansions from v. Counts walks, not simple paths; truncation
// error of the infinite series is O(β^{L+1}).
inline double katz_truncated(const Graph& g, NodeId v, NodeId u,
                             const HeuristicConfig& cfg) {
  std::vector<double> walk(g.node_count(), 0.0);
  std::vector<double> next(g.node_count(), 0.0);
  walk[v] = 1.0;
  double total = 0.0;
  double beta_pow = 1.0;
  for (std::uint32_t l = 1; l <= cfg.katz_max_len; ++l) {
    std::fill(next.begin(), next.end(), 0.0);
    for (NodeId x = 0; x < g.node_count(); ++x) {
      const double w = walk[x];
      if (w == 0.0) continue;
      for (NodeId y : g.neighbors(x)) next[y] += w;
    }
    walk.swap(next);
    beta_pow *= cfg.katz_beta;
    total += beta_pow * walk[u];
  }
  return total;
}

// Dense all-pairs SimRank similarity. Entries live in [0, 1], the diagonal is
// pinned to 1 and nodes without neighbors keep 0 off-diagonal similarity.
struct SimRankMatrix {
  std::size_t n = 0;
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

// K iterations of s_{ij} <- C/(|Γ_i||Γ_j|) ΣΣ s_{ab} over neighbor pairs,
// with the diagonal re-pinned to 1 after each iteration.
inline SimRankMatrix simrank(const Graph& g, const HeuristicConfig& cfg,
                             std::uint32_t iters) {
  const std::size_t n = g.node_count();
  if (n > cfg.simrank_node_limit) {
    throw UsageError("simrank needs O(n^2) memory; n=" + std::to_string(n) +
                     " exceeds the configured limit " +
                     std::to_string(cfg.simrank_node_limit));
  }
  SimRankMatrix s;
  s.n = n;
  s.values.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) s.values[i * n + i] = 1.0;

  std::vector<double> t(n * n, 0.0);
  std::vector<double> next(n * n, 0.0);
  for (std::uint32_t m = 0; m < iters; ++m) {
    // t[i][j] = (1/|Γ_i|) Σ_{a in Γ_i} s[a][j]
    std::fill(t.begin(), t.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto nbrs = g.neighbors(static_cast<NodeId>(i));
      if (nbrs.empty()) continue;
      double* trow = t.data() + i * n;
      for (NodeId a : nbrs) {
        const double* srow = s.values.data() + static_cast<std::size_t>(a) * n;
        for (std::size_t j = 0; j < n; ++j) trow[j] += srow[j];
      }
      const double inv = 1.0 / static_cast<double>(nbrs.size());
      for (std::size_t j = 0; j < n; ++j) trow[j] *= inv;
    }
    // next[i][j] = C * (1/|Γ_j|) Σ_{b in Γ_j} t[i][b]
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const auto nbrs = g.neighbors(static_cast<NodeId>(j));
      if (nbrs.empty()) continue;
      const double scale = cfg.simrank_decay / static_cast<double>(nbrs.size());
      for (std::size_t i = 0; i < n; ++i) {
        const double* trow = t.data() + i * n;
        double acc = 0.0;
        for (NodeId b : nbrs) acc += trow[b];
        next[i * n + j] = scale * acc;
      }
    }
    s.values.swap(next);
    for (std::size_t i = 0; i < n; ++i) s.values[i * n + i] = 1.0;
  }
  return s;
}

inline SimRankMatrix simrank(const Graph& g, const HeuristicConfig& cfg) {
  return simrank(g, cfg, cfg.simrank_iters);
}

// Single-pair dispatch. SimRank scores come from a precomputed matrix when
// given; otherwise the full matrix is computed for this one lookup.
inline double heuristic_value(const Graph& g, NodeId v, NodeId u, HeuristicKind kind,
                              const HeuristicConfig& cfg,
                              const SimRankMatrix* sr = nullptr) {
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
      return static_cast<double>(preferential_attachment(g, v, u));
    case HeuristicKind::SPD:
      return shortest_path_distance(g, v, u, cfg.spd_cap);
    case HeuristicKind::NodeCC:
      return node_clustering(g, v, u);
    case HeuristicKind::NodeLinkCC:
      return node_link_clustering(g, v, u);
    case HeuristicKind::Katz:
      return katz_truncated(g, v, u, cfg);
    case HeuristicKind::SimRank: {
      if (sr) return sr->at(v, u);
      return simrank(g, cfg).at(v, u);
    }
  }
  throw UsageError("unhandled heuristic kind");
}

// One row per pair, one column per requested kind, row order preserved.
// Workers > 1 fan pairs out over threads with pre-assigned row slots, so the
// output is identical for any worker count.
inline Matrix batch_score(const Graph& g, std::span<const Edge> pairs,
                          std::span<const HeuristicKind> kinds,
                          const HeuristicConfig& cfg, unsigned workers = 1) {
  Matrix out(pairs.size(), kinds.size());
  if (pairs.empty() || kinds.empty()) return out;

  SimRankMatrix sr;
  const bool wants_simrank =
      std::find(kinds.begin(), kinds.end(), HeuristicKind::SimRank) != kinds.end();
  if (wants_simrank) sr = simrank(g, cfg);
  const SimRankMatrix* sr_ptr = wants_simrank ? &sr : nullptr;

  auto score_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      for (std::size_t k = 0; k < kinds.size(); ++k) {
        out.at(p, k) =
            heuristic_value(g, pairs[p].first, pairs[p].second, kinds[k], cfg, sr_ptr);
      }
    }
  };

  if (workers <= 1 || pairs.size() < 2) {
    score_range(0, pairs.size());
    return out;
  }
  const std::size_t n_threads = std::min<std::size_t>(workers, pairs.size());
  const std::size_t chunk = (pairs.size() + n_threads - 1) / n_threads;
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < n_threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(begin + chunk, pairs.size());
    if (begin >= end) break;
    threads.emplace_back(score_range, begin, end);
  }
  for (auto& th : threads) th.join();
  return out;
}

}  // namespace linkpred
