#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "linkpred/errors.hpp"

namespace linkpred {

// Scored positive and negative sets. `neg_scores` is a shared pool
// (ogbl-ddi/collab/ppa style); per-positive negative lists (ogbl-citation2
// style) go through mrr_per_source directly.
struct RankingResult {
  std::vector<double> pos_scores;
  std::vector<double> neg_scores;
};

// Fraction of positives scored strictly above the K-th largest negative.
// Ties with the threshold count as misses.
inline double hits_at_k(std::span<const double> pos, std::span<const double> neg,
                        std::size_t k) {
  if (pos.empty()) throw DataError("hits_at_k: empty positive score list");
  if (k < 1) throw DataError("hits_at_k: K must be >= 1");
  if (neg.size() < k) {
    throw DataError("hits_at_k: need at least K=" + std::to_string(k) +
                    " negatives, got " + std::to_string(neg.size()));
  }
  std::vector<double> sorted(neg.begin(), neg.end());
  std::nth_element(sorted.begin(), sorted.begin() + (k - 1), sorted.end(),
                   std::greater<double>());
  const double threshold = sorted[k - 1];
  std::size_t hits = 0;
  for (double p : pos) {
    if (p > threshold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pos.size());
}

// rank_i = 1 + |{neg > pos_i}| + 0.5 |{neg == pos_i}|; returns mean of
// 1/rank_i. An empty negative list gives rank 1.
inline double mrr_per_source(std::span<const double> pos,
                             std::span<const std::vector<double>> neg_lists) {
  if (pos.empty()) throw DataError("mrr: empty positive score list");
  if (neg_lists.size() != pos.size()) {
    throw DataError("mrr: one negative list per positive required");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    double above = 0.0;
    double tied = 0.0;
    for (double n : neg_lists[i]) {
      if (n > pos[i]) {
        above += 1.0;
      } else if (n == pos[i]) {
        tied += 1.0;
      }
    }
    sum += 1.0 / (1.0 + above + 0.5 * tied);
  }
  return sum / static_cast<double>(pos.size());
}

// Shared-pool MRR: every positive ranks against the same negative list.
inline double mrr_shared(std::span<const double> pos, std::span<const double> neg) {
  if (pos.empty()) throw DataError("mrr: empty positive score list");
  std::vector<double> sorted(neg.begin(), neg.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double p : pos) {
    const auto lo = std::lower_bound(sorted.begin(), sorted.end(), p);
    const auto hi = std::upper_bound(sorted.begin(), sorted.end(), p);
    const double above = static_cast<double>(sorted.end() - hi);
    const double tied = static_cast<double>(hi - lo);
    sum += 1.0 / (1.0 + above + 0.5 * tied);
  }
  return sum / static_cast<double>(pos.size());
}

// P(pos > neg) + 0.5 P(pos == neg) over all cross pairs, by rank sums in
// O((P+Q) log (P+Q)).
inline double auc(std::span<const double> pos, std::span<const double> neg) {
  if (pos.empty() || neg.empty()) throw DataError("auc: empty score list");
  struct Entry {
    double score;
    bool positive;
  };
  std::vector<Entry> all;
  all.reserve(pos.size() + neg.size());
  for (double p : pos) all.push_back({p, true});
  for (double n : neg) all.push_back({n, false});
  std::sort(all.begin(), all.end(),
            [](const Entry& a, const Entry& b) { return a.score < b.score; });
  // Average ranks over tie groups give the half-credit tie rule.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    while (j < all.size() && all[j].score == all[i].score) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k) {
      if (all[k].positive) rank_sum_pos += avg_rank;
    }
    i = j;
  }
  const double p_count = static_cast<double>(pos.size());
  const double q_count = static_cast<double>(neg.size());
  const double u_stat = rank_sum_pos - p_count * (p_count + 1.0) / 2.0;
  return u_stat / (p_count * q_count);
}

struct Metrics {
  std::map<std::string, double> values;

  nlohmann::json to_json() const {
    nlohmann::json j;
    for (const auto& [key, value] : values) j[key] = value;
    return j;
  }

  std::string to_csv() const {
    std::string out = "metric,value\n";
    char buf[64];
    for (const auto& [key, value] : values) {
      std::snprintf(buf, sizeof(buf), "%.9g", value);
      out += key + "," + buf + "\n";
    }
    return out;
  }
};

// Shared-negative evaluation: AUC, MRR and Hits@K for every K that the
// negative pool can support.
inline Metrics compute_ranking_metrics(std::span<const double> pos,
                                       std::span<const double> neg,
                                       std::span<const std::size_t> ks) {
  Metrics m;
  m.values["auc"] = auc(pos, neg);
  m.values["mrr"] = mrr_shared(pos, neg);
  for (std::size_t k : ks) {
    if (neg.size() >= k) {
      m.values["hits@" + std::to_string(k)] = hits_at_k(pos, neg, k);
    }
  }
  return m;
}

inline const std::size_t kDefaultHitsKs[3] = {20, 50, 100};

}  // namespace linkpred
