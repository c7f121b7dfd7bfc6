#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "linkpred/errors.hpp"
#include "linkpred/heuristics.hpp"
#include "linkpred/matrix.hpp"
#include "linkpred/rng.hpp"

namespace linkpred {

enum class BinMode { Integer, Float };

// CN, PA and SPD take small integer values and get identity vocabularies;
// everything else is binned as a float.
inline bool is_integer_kind(HeuristicKind k) {
  return k == HeuristicKind::CN || k == HeuristicKind::PA || k == HeuristicKind::SPD;
}

// Maps one heuristic's values to embedding indices.
//
// Integer mode: value r in 0..int_cap keeps index r; anything above int_cap
// goes to the overflow index int_cap + 1 (vocab_size = int_cap + 2).
//
// Float mode: B equal-width bins over the fitted [lo, hi] with interior
// boundaries stored; values outside [lo, hi] go to the out-of-range index B
// (vocab_size = B + 1). The top bin is right-closed so hi itself stays a
// regular bin.
struct BinSpec {
  HeuristicKind kind = HeuristicKind::CN;
  BinMode mode = BinMode::Integer;
  std::uint32_t int_cap = 0;
  std::vector<double> boundaries;  // strictly increasing, size B - 1
  double lo = 0.0;
  double hi = 0.0;
  std::uint32_t vocab_size = 0;

  std::uint32_t bin_count() const {
    return mode == BinMode::Integer ? int_cap + 1
                                    : static_cast<std::uint32_t>(boundaries.size()) + 1;
  }

  // Total: every real (NaN included) maps to an index < vocab_size.
  std::uint32_t encode(double value) const {
    if (mode == BinMode::Integer) {
      if (!(value > 0.0)) return 0;
      const double r = std::round(value);
      if (r > static_cast<double>(int_cap)) return int_cap + 1;
      return static_cast<std::uint32_t>(r);
    }
    if (!(value >= lo && value <= hi)) return bin_count();  // out of range
    const auto it = std::upper_bound(boundaries.begin(), boundaries.end(), value);
    return static_cast<std::uint32_t>(it - boundaries.begin());
  }
};

struct EncoderConfig {
  std::uint32_t int_cap = 64;
  std::uint32_t float_bins = 64;
  std::uint32_t dim_h = 32;
};

// Fits one BinSpec per requested kind from training-pair values, in the given
// kind order. Refitting on identical data yields identical specs.
inline std::vector<BinSpec> fit_bin_specs(std::span<const HeuristicKind> kinds,
                                          std::span<const std::vector<double>> values,
                                          const EncoderConfig& cfg,
                                          const HeuristicConfig& hcfg) {
  if (kinds.size() != values.size()) {
    throw DataError("fit_bin_specs: one value array per kind required");
  }
  std::vector<BinSpec> specs;
  specs.reserve(kinds.size());
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    const HeuristicKind kind = kinds[i];
    if (values[i].empty()) {
      throw DataError("fit_bin_specs: no training values for heuristic '" +
                      std::string(heuristic_token(kind)) + "'");
    }
    BinSpec spec;
    spec.kind = kind;
    if (is_integer_kind(kind)) {
      spec.mode = BinMode::Integer;
      spec.int_cap = cfg.int_cap;
      // The SPD sentinel cap+1 keeps a dedicated index so "disconnected"
      // stays distinguishable from every finite distance.
      if (kind == HeuristicKind::SPD) {
        spec.int_cap = std::max(spec.int_cap, hcfg.spd_cap + 1);
      }
      spec.vocab_size = spec.int_cap + 2;
    } else {
      spec.mode = BinMode::Float;
      const auto [lo_it, hi_it] = std::minmax_element(values[i].begin(), values[i].end());
      spec.lo = *lo_it;
      spec.hi = *hi_it;
      if (spec.hi > spec.lo) {
        spec.boundaries.reserve(cfg.float_bins - 1);
        const double width = spec.hi - spec.lo;
        for (std::uint32_t k = 1; k < cfg.float_bins; ++k) {
          spec.boundaries.push_back(spec.lo + width * static_cast<double>(k) /
                                                  static_cast<double>(cfg.float_bins));
        }
      }
      // hi == lo: single degenerate bin, everything in-range maps to index 0.
      spec.vocab_size = spec.bin_count() + 1;
    }
    specs.push_back(std::move(spec));
  }
  return specs;
}

inline std::string bin_mode_name(BinMode m) {
  return m == BinMode::Integer ? "integer" : "float";
}

inline nlohmann::json bin_spec_to_json(const BinSpec& s, std::uint32_t dim_h) {
  nlohmann::json j;
  j["kind"] = std::string(heuristic_token(s.kind));
  j["mode"] = bin_mode_name(s.mode);
  if (s.mode == BinMode::Integer) {
    j["int_cap"] = s.int_cap;
  } else {
    j["boundaries"] = s.boundaries;
    j["lo"] = s.lo;
    j["hi"] = s.hi;
  }
  j["vocab_size"] = s.vocab_size;
  j["dim_h"] = dim_h;
  return j;
}

inline BinSpec bin_spec_from_json(const nlohmann::json& j) {
  BinSpec s;
  s.kind = parse_heuristic_kind(j.at("kind").get<std::string>());
  const std::string mode = j.at("mode").get<std::string>();
  if (mode == "integer") {
    s.mode = BinMode::Integer;
    s.int_cap = j.at("int_cap").get<std::uint32_t>();
  } else if (mode == "float") {
    s.mode = BinMode::Float;
    s.boundaries = j.at("boundaries").get<std::vector<double>>();
    s.lo = j.at("lo").get<double>();
    s.hi = j.at("hi").get<double>();
  } else {
    throw DataError("bin spec: unknown mode '" + mode + "'");
  }
  s.vocab_size = j.at("vocab_size").get<std::uint32_t>();
  if (s.vocab_size != (s.mode == BinMode::Integer ? s.int_cap + 2 : s.bin_count() + 1)) {
    throw DataError("bin spec: vocab_size inconsistent with mode");
  }
  return s;
}

// Fitted bin specs plus one trainable embedding table per spec. Spec order
// fixes the concatenation order of the per-heuristic embeddings.
struct HeuristicEncoder {
  std::vector<BinSpec> specs;
  std::uint32_t dim_h = 0;
  std::vector<Matrix> tables;  // specs.size() tables, vocab_size x dim_h

  bool empty() const { return specs.empty(); }
  std::size_t total_dim() const { return specs.size() * dim_h; }

  static HeuristicEncoder create(std::vector<BinSpec> specs, std::uint32_t dim_h,
                                 Rng& rng) {
    HeuristicEncoder enc;
    enc.specs = std::move(specs);
    enc.dim_h = dim_h;
    enc.tables.reserve(enc.specs.size());
    for (const BinSpec& s : enc.specs) {
      Matrix t = init_params(s.vocab_size, dim_h, InitScheme::Xavier, rng);
      t.make_trainable();
      enc.tables.push_back(std::move(t));
    }
    return enc;
  }

  std::vector<HeuristicKind> kinds() const {
    std::vector<HeuristicKind> out;
    out.reserve(specs.size());
    for (const BinSpec& s : specs) out.push_back(s.kind);
    return out;
  }

  // Embedding indices for one pair's heuristic values (spec order).
  std::vector<std::uint32_t> encode_row(std::span<const double> values) const {
    if (values.size() != specs.size()) {
      throw DataError("encoder: expected one value per fitted heuristic");
    }
    std::vector<std::uint32_t> idx(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) idx[i] = specs[i].encode(values[i]);
    return idx;
  }

  // Concatenated table rows for one pair, in spec order.
  std::vector<double> embed_pair(std::span<const double> values) const {
    const auto idx = encode_row(values);
    std::vector<double> out;
    out.reserve(total_dim());
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const auto row = tables[i].row(idx[i]);
      out.insert(out.end(), row.begin(), row.end());
    }
    return out;
  }

  nlohmann::json specs_to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const BinSpec& s : specs) arr.push_back(bin_spec_to_json(s, dim_h));
    return arr;
  }

  // Rebuilds specs and zeroed tables; table weights come from a checkpoint.
  static HeuristicEncoder from_specs_json(const nlohmann::json& arr) {
    HeuristicEncoder enc;
    for (const auto& j : arr) {
      enc.specs.push_back(bin_spec_from_json(j));
      enc.dim_h = j.at("dim_h").get<std::uint32_t>();
    }
    for (const BinSpec& s : enc.specs) {
      Matrix t(s.vocab_size, enc.dim_h);
      t.make_trainable();
      enc.tables.push_back(std::move(t));
    }
    return enc;
  }
};

}  // namespace linkpred
