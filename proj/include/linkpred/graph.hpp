#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "linkpred/errors.hpp"
#include "linkpred/matrix.hpp"
#include "linkpred/rng.hpp"

namespace linkpred {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

inline std::uint64_t edge_key(NodeId v, NodeId u) {
  if (u < v) std::swap(v, u);
  return (static_cast<std::uint64_t>(v) << 32) | u;
}

// Unordered-pair membership set, used as a sampling exclusion list.
class EdgeSet {
 public:
  EdgeSet() = default;
  explicit EdgeSet(std::span<const Edge> edges) { insert(edges); }

  void insert(NodeId v, NodeId u) { keys_.insert(edge_key(v, u)); }
  void insert(std::span<const Edge> edges) {
    for (const Edge& e : edges) insert(e.first, e.second);
  }
  bool contains(NodeId v, NodeId u) const { return keys_.count(edge_key(v, u)) != 0; }
  std::size_t size() const { return keys_.size(); }

 private:
  std::unordered_set<std::uint64_t> keys_;
};

struct BuildStats {
  std::uint64_t duplicates_dropped = 0;
  std::uint64_t self_loops_dropped = 0;
};

// Immutable undirected simple graph in CSR form. Neighbor slices are sorted
// ascending and duplicate-free; construction canonicalizes the input edge
// list, so permuting the input yields a bitwise-identical structure.
class Graph {
 public:
  Graph() = default;

  static Graph build(std::vector<Edge> edges, NodeId node_count,
                     BuildStats* stats = nullptr) {
    BuildStats local;
    std::vector<Edge> canon;
    canon.reserve(edges.size());
    for (const Edge& e : edges) {
      if (e.first >= node_count || e.second >= node_count) {
        throw DataError("edge (" + std::to_string(e.first) + ", " +
                        std::to_string(e.second) + "): node id out of range for " +
                        std::to_string(node_count) + " nodes");
      }
      if (e.first == e.second) {
        ++local.self_loops_dropped;
        continue;
      }
      canon.emplace_back(std::min(e.first, e.second), std::max(e.first, e.second));
    }
    std::sort(canon.begin(), canon.end());
    const std::size_t before = canon.size();
    canon.erase(std::unique(canon.begin(), canon.end()), canon.end());
    local.duplicates_dropped = before - canon.size();
    if (stats) *stats = local;

    Graph g;
    g.node_count_ = node_count;
    g.edge_count_ = canon.size();
    g.offsets_.assign(static_cast<std::size_t>(node_count) + 1, 0);
    for (const Edge& e : canon) {
      ++g.offsets_[e.first + 1];
      ++g.offsets_[e.second + 1];
    }
    for (std::size_t i = 1; i < g.offsets_.size(); ++i) {
      g.offsets_[i] += g.offsets_[i - 1];
    }
    g.neighbor_ids_.resize(2 * canon.size());
    std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    // Scanning canonical (v < u) edges in sorted order fills every slice in
    // ascending neighbor order: for node x, all (s, x) with s < x come before
    // all (x, t) with t > x.
    for (const Edge& e : canon) {
      g.neighbor_ids_[cursor[e.first]++] = e.second;
      g.neighbor_ids_[cursor[e.second]++] = e.first;
    }
    return g;
  }

  NodeId node_count() const { return node_count_; }
  std::uint64_t edge_count() const { return edge_count_; }

  std::span<const NodeId> neighbors(NodeId v) const {
    check_node(v);
    return {neighbor_ids_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }

  NodeId degree(NodeId v) const {
    check_node(v);
    return static_cast<NodeId>(offsets_[v + 1] - offsets_[v]);
  }

  double average_degree() const {
    if (node_count_ == 0) return 0.0;
    return static_cast<double>(2 * edge_count_) / static_cast<double>(node_count_);
  }

  // Binary search within the neighbor slice; the CSR stays the single source
  // of truth for membership.
  bool has_edge(NodeId v, NodeId u) const {
    auto slice = neighbors(v);
    check_node(u);
    return std::binary_search(slice.begin(), slice.end(), u);
  }

  // Sorted intersection of the two neighbor slices by linear merge.
  std::vector<NodeId> common_neighbor_ids(NodeId v, NodeId u) const {
    auto a = neighbors(v);
    auto b = neighbors(u);
    std::vector<NodeId> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                          std::back_inserter(out));
    return out;
  }

  bool complete() const {
    const std::uint64_t n = node_count_;
    return n >= 2 && edge_count_ == n * (n - 1) / 2;
  }

  const std::vector<std::size_t>& offsets() const { return offsets_; }
  const std::vector<NodeId>& neighbor_ids() const { return neighbor_ids_; }

  // Canonical (v < u) edge list recovered from the CSR structure.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count_);
    for (NodeId v = 0; v < node_count_; ++v) {
      for (NodeId u : neighbors(v)) {
        if (v < u) out.emplace_back(v, u);
      }
    }
    return out;
  }

 private:
  void check_node(NodeId v) const {
    if (v >= node_count_) {
      throw DataError("node id " + std::to_string(v) + " out of range for " +
                      std::to_string(node_count_) + " nodes");
    }
  }

  NodeId node_count_ = 0;
  std::uint64_t edge_count_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> neighbor_ids_;
};

// Hop count between v and u by breadth-first search, truncated at `cap`.
// Unreachable within cap hops yields the sentinel cap + 1; hops(v, v) = 0.
inline std::uint32_t shortest_path_hops(const Graph& g, NodeId v, NodeId u,
                                        std::uint32_t cap) {
  if (v == u) return 0;
  std::vector<std::uint8_t> seen(g.node_count(), 0);
  std::vector<NodeId> frontier{v};
  seen[v] = 1;
  std::uint32_t depth = 0;
  std::vector<NodeId> next;
  while (!frontier.empty() && depth < cap) {
    ++depth;
    next.clear();
    for (NodeId x : frontier) {
      for (NodeId y : g.neighbors(x)) {
        if (seen[y]) continue;
        if (y == u) return depth;
        seen[y] = 1;
        next.push_back(y);
      }
    }
    frontier.swap(next);
  }
  return cap + 1;
}

// Uniform rejection sampling over non-edges. Sampled pairs are normalized
// (v < u), never self-pairs, never graph edges, never in `exclusion`.
// With min_spd > 0, pairs at hop distance <= min_spd are rejected too.
// Deterministic for a fixed RNG state.
inline std::vector<Edge> sample_negative_edges(const Graph& g, std::size_t count,
                                               Rng& rng, const EdgeSet& exclusion,
                                               std::uint32_t min_spd = 0) {
  std::vector<Edge> out;
  if (count == 0) return out;
  const NodeId n = g.node_count();
  if (n < 2 || g.complete()) {
    throw DataError("cannot sample negative edges: graph has no non-edges (n=" +
                    std::to_string(n) + ", |E|=" + std::to_string(g.edge_count()) +
                    ")");
  }
  out.reserve(count);
  const std::size_t max_attempts = 100 * count;
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (attempts++ >= max_attempts) {
      const double n_d = static_cast<double>(n);
      const double density =
          n >= 2 ? static_cast<double>(2 * g.edge_count()) / (n_d * (n_d - 1.0)) : 0.0;
      throw DataError("negative sampling filled " + std::to_string(out.size()) + "/" +
                      std::to_string(count) + " pairs after " +
                      std::to_string(max_attempts) + " attempts; graph density " +
                      std::to_string(density) + ", exclusion size " +
                      std::to_string(exclusion.size()) +
                      " leave too few admissible non-edges");
    }
    const NodeId v = static_cast<NodeId>(rng.below(n));
    const NodeId u = static_cast<NodeId>(rng.below(n));
    if (v == u || g.has_edge(v, u) || exclusion.contains(v, u)) continue;
    if (min_spd > 0 && shortest_path_hops(g, v, u, min_spd) <= min_spd) continue;
    out.emplace_back(std::min(v, u), std::max(v, u));
  }
  return out;
}

inline std::vector<Edge> sample_negative_edges(const Graph& g, std::size_t count,
                                               std::uint64_t rng_seed,
                                               const EdgeSet& exclusion,
                                               std::uint32_t min_spd = 0) {
  Rng rng(rng_seed, "negative-sampling");
  return sample_negative_edges(g, count, rng, exclusion, min_spd);
}

// ---------------------------------------------------------------------------
// File formats
//
// Edge list: UTF-8 text, one edge per line, two base-10 integers separated by
// a single TAB. Lines starting with '#' are ignored. Trailing newline
// optional.
// ---------------------------------------------------------------------------

struct EdgeListFile {
  std::vector<Edge> edges;
  NodeId node_count = 0;  // 1 + max id seen, 0 for an empty list
};

namespace detail {

inline bool parse_node_id(std::string_view text, NodeId& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto res = std::from_chars(first, last, out, 10);
  return res.ec == std::errc{} && res.ptr == last;
}

}  // namespace detail

inline EdgeListFile load_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open edge list: " + path.string());
  EdgeListFile result;
  std::string line;
  std::size_t line_no = 0;
  std::uint64_t max_id = 0;
  bool any = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::size_t tab = line.find('\t');
    NodeId v = 0, u = 0;
    const bool ok = tab != std::string::npos &&
                    detail::parse_node_id(std::string_view(line).substr(0, tab), v) &&
                    detail::parse_node_id(std::string_view(line).substr(tab + 1), u);
    if (!ok) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected '<int>\\t<int>', got '" + line + "'");
    }
    result.edges.emplace_back(v, u);
    max_id = std::max<std::uint64_t>(max_id, std::max(v, u));
    any = true;
  }
  result.node_count = any ? static_cast<NodeId>(max_id + 1) : 0;
  return result;
}

inline void save_edge_list(const std::filesystem::path& path,
                           std::span<const Edge> edges) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write edge list: " + path.string());
  for (const Edge& e : edges) {
    out << e.first << '\t' << e.second << '\n';
  }
}

// Train/valid/test edge lists for one dataset. Positive and negative lists of
// the same split never share a pair.
struct DatasetSplit {
  std::vector<Edge> train_pos;
  std::vector<Edge> valid_pos;
  std::vector<Edge> valid_neg;
  std::vector<Edge> test_pos;
  std::vector<Edge> test_neg;
  NodeId node_count = 0;

  void validate() const {
    auto check_disjoint = [](std::span<const Edge> pos, std::span<const Edge> neg,
                             const std::string& split) {
      EdgeSet set(pos);
      for (const Edge& e : neg) {
        if (set.contains(e.first, e.second)) {
          throw DataError("split '" + split + "': pair (" + std::to_string(e.first) +
                          ", " + std::to_string(e.second) +
                          ") appears in both positive and negative lists");
        }
      }
    };
    check_disjoint(valid_pos, valid_neg, "valid");
    check_disjoint(test_pos, test_neg, "test");
  }
};

inline constexpr const char* kSplitFiles[5] = {
    "train.tsv", "valid_pos.tsv", "valid_neg.tsv", "test_pos.tsv", "test_neg.tsv"};

inline DatasetSplit load_split(const std::filesystem::path& dir) {
  DatasetSplit split;
  std::vector<Edge>* lists[5] = {&split.train_pos, &split.valid_pos, &split.valid_neg,
                                 &split.test_pos, &split.test_neg};
  NodeId n = 0;
  for (int i = 0; i < 5; ++i) {
    const auto path = dir / kSplitFiles[i];
    if (!std::filesystem::exists(path)) {
      throw DataError("split file missing: " + path.string());
    }
    EdgeListFile f = load_edge_list(path);
    *lists[i] = std::move(f.edges);
    n = std::max(n, f.node_count);
  }
  split.node_count = n;
  split.validate();
  return split;
}

inline void save_split(const std::filesystem::path& dir, const DatasetSplit& split) {
  std::filesystem::create_directories(dir);
  save_edge_list(dir / kSplitFiles[0], split.train_pos);
  save_edge_list(dir / kSplitFiles[1], split.valid_pos);
  save_edge_list(dir / kSplitFiles[2], split.valid_neg);
  save_edge_list(dir / kSplitFiles[3], split.test_pos);
  save_edge_list(dir / kSplitFiles[4], split.test_neg);
}

// Feature matrix file: header line "N f", then N lines of f space-separated
// decimal reals.
inline Matrix load_feature_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open feature matrix: " + path.string());
  std::size_t n = 0, f = 0;
  if (!(in >> n >> f)) {
    throw DataError(path.string() + ":1: expected header '<N> <f>'");
  }
  Matrix m(n, f);
  for (std::size_t i = 0; i < n * f; ++i) {
    if (!(in >> m.values[i])) {
      throw DataError(path.string() + ": expected " + std::to_string(n * f) +
                      " values, got " + std::to_string(i));
    }
  }
  return m;
}

inline void save_feature_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write feature matrix: " + path.string());
  out << m.rows << ' ' << m.cols << '\n';
  char buf[64];
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m.at(i, j));
      out << buf << (j + 1 == m.cols ? '\n' : ' ');
    }
  }
}

}  // namespace linkpred
