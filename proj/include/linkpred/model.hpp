#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "linkpred/encoding.hpp"
#include "linkpred/errors.hpp"
#include "linkpred/graph.hpp"
#include "linkpred/heuristics.hpp"
#include "linkpred/matrix.hpp"
#include "linkpred/nn.hpp"

namespace linkpred {

// Model variants: heuristic encoding only, GNN over node features and/or
// trainable node embeddings, and GNN+HE combinations.
enum class Variant { HE, GNN_X, GNN_NE, GNN_XNE, GNN_X_HE, GNN_NE_HE, GNN_XNE_HE };

inline bool variant_uses_x(Variant v) {
  return v == Variant::GNN_X || v == Variant::GNN_XNE || v == Variant::GNN_X_HE ||
         v == Variant::GNN_XNE_HE;
}
inline bool variant_uses_ne(Variant v) {
  return v == Variant::GNN_NE || v == Variant::GNN_XNE || v == Variant::GNN_NE_HE ||
         v == Variant::GNN_XNE_HE;
}
inline bool variant_uses_gnn(Variant v) { return v != Variant::HE; }
inline bool variant_uses_he(Variant v) {
  return v == Variant::HE || v == Variant::GNN_X_HE || v == Variant::GNN_NE_HE ||
         v == Variant::GNN_XNE_HE;
}

inline constexpr std::array<std::pair<Variant, std::string_view>, 7> kVariantNames{{
    {Variant::HE, "he"},
    {Variant::GNN_X, "gnn_x"},
    {Variant::GNN_NE, "gnn_ne"},
    {Variant::GNN_XNE, "gnn_xne"},
    {Variant::GNN_X_HE, "gnn_x_he"},
    {Variant::GNN_NE_HE, "gnn_ne_he"},
    {Variant::GNN_XNE_HE, "gnn_xne_he"},
}};

inline std::string variant_name(Variant v) {
  for (const auto& [var, name] : kVariantNames) {
    if (var == v) return std::string(name);
  }
  return "?";
}

inline Variant parse_variant(const std::string& name) {
  for (const auto& [var, tok] : kVariantNames) {
    if (tok == name) return var;
  }
  std::string all;
  for (const auto& [var, tok] : kVariantNames) {
    if (!all.empty()) all += ", ";
    all += tok;
  }
  throw UsageError("unknown variant '" + name + "'; valid: " + all);
}

// Full training configuration. JSON round-trips with unknown-key rejection.
// Defaults follow the dense-graph configuration: 2 GCN layers, 4-layer MLP
// predictor, embedding dim 512, lr 0.003, dropout 0.3, clip norm 5,
// batch size 100000, heuristic embedding dim 32.
struct ModelConfig {
  Variant variant = Variant::GNN_NE;
  std::uint32_t gnn_layers = 2;
  std::uint32_t predictor_layers = 4;
  std::uint32_t predictor_hidden = 256;
  std::uint32_t node_emb_dim = 512;
  std::vector<HeuristicKind> heuristics;
  EncoderConfig encoder;
  HeuristicConfig heuristic_cfg;
  CombineMode combine = CombineMode::Hadamard;
  double lr = 0.003;
  double lr_decay = 1.0;
  double dropout = 0.3;
  double clip_norm = 5.0;
  std::size_t batch_size = 100000;
  std::uint32_t epochs = 100;
  std::uint32_t patience = 20;
  std::uint32_t feature_dim = 64;
  std::string valid_metric = "auc";
  std::uint32_t negative_min_spd = 0;
  std::uint64_t seed = 1;

  void validate() const {
    if (variant_uses_he(variant) && heuristics.empty()) {
      throw UsageError("variant '" + variant_name(variant) +
                       "' requires at least one heuristic kind");
    }
    if (variant_uses_gnn(variant) && gnn_layers < 1) {
      throw UsageError("GNN variants require gnn_layers >= 1");
    }
    if (predictor_layers < 1) throw UsageError("predictor_layers must be >= 1");
    if (predictor_hidden < 1) throw UsageError("predictor_hidden must be >= 1");
    if (variant_uses_ne(variant) && node_emb_dim < 1) {
      throw UsageError("node_emb_dim must be >= 1");
    }
    if (variant_uses_x(variant) && feature_dim < 1) {
      throw UsageError("feature_dim must be >= 1");
    }
    if (encoder.int_cap < 1 || encoder.float_bins < 1 || encoder.dim_h < 1) {
      throw UsageError("encoder int_cap, float_bins and dim_h must be >= 1");
    }
    if (lr < 0.0) throw UsageError("lr must be >= 0");
    if (!(lr_decay > 0.0 && lr_decay <= 1.0)) {
      throw UsageError("lr_decay must be in (0, 1]");
    }
    if (dropout < 0.0 || dropout >= 1.0) throw UsageError("dropout must be in [0, 1)");
    if (clip_norm < 0.0) throw UsageError("clip_norm must be >= 0");
    if (batch_size < 1) throw UsageError("batch_size must be >= 1");
    if (patience < 1) throw UsageError("patience must be >= 1");
    if (valid_metric != "auc" && valid_metric.rfind("hits@", 0) != 0) {
      throw UsageError("valid_metric must be 'auc' or 'hits@<K>'");
    }
    heuristic_cfg.validate();
  }
};

inline nlohmann::json model_config_to_json(const ModelConfig& c) {
  nlohmann::json j;
  j["variant"] = variant_name(c.variant);
  j["gnn_layers"] = c.gnn_layers;
  j["predictor_layers"] = c.predictor_layers;
  j["predictor_hidden"] = c.predictor_hidden;
  j["node_emb_dim"] = c.node_emb_dim;
  nlohmann::json kinds = nlohmann::json::array();
  for (HeuristicKind k : c.heuristics) kinds.push_back(std::string(heuristic_token(k)));
  j["heuristics"] = kinds;
  j["heuristic_dim"] = c.encoder.dim_h;
  j["int_cap"] = c.encoder.int_cap;
  j["float_bins"] = c.encoder.float_bins;
  j["katz_beta"] = c.heuristic_cfg.katz_beta;
  j["katz_max_len"] = c.heuristic_cfg.katz_max_len;
  j["simrank_decay"] = c.heuristic_cfg.simrank_decay;
  j["simrank_iters"] = c.heuristic_cfg.simrank_iters;
  j["spd_cap"] = c.heuristic_cfg.spd_cap;
  j["combine"] = combine_mode_name(c.combine);
  j["lr"] = c.lr;
  j["lr_decay"] = c.lr_decay;
  j["dropout"] = c.dropout;
  j["clip_norm"] = c.clip_norm;
  j["batch_size"] = c.batch_size;
  j["epochs"] = c.epochs;
  j["patience"] = c.patience;
  j["feature_dim"] = c.feature_dim;
  j["valid_metric"] = c.valid_metric;
  j["negative_min_spd"] = c.negative_min_spd;
  j["seed"] = c.seed;
  return j;
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "variant") {
      c.variant = parse_variant(value.get<std::string>());
    } else if (key == "gnn_layers") {
      c.gnn_layers = value.get<std::uint32_t>();
    } else if (key == "predictor_layers") {
      c.predictor_layers = value.get<std::uint32_t>();
    } else if (key == "predictor_hidden") {
      c.predictor_hidden = value.get<std::uint32_t>();
    } else if (key == "node_emb_dim") {
      c.node_emb_dim = value.get<std::uint32_t>();
    } else if (key == "heuristics") {
      c.heuristics.clear();
      for (const auto& tok : value) {
        c.heuristics.push_back(parse_heuristic_kind(tok.get<std::string>()));
      }
    } else if (key == "heuristic_dim") {
      c.encoder.dim_h = value.get<std::uint32_t>();
    } else if (key == "int_cap") {
      c.encoder.int_cap = value.get<std::uint32_t>();
    } else if (key == "float_bins") {
      c.encoder.float_bins = value.get<std::uint32_t>();
    } else if (key == "katz_beta") {
      c.heuristic_cfg.katz_beta = value.get<double>();
    } else if (key == "katz_max_len") {
      c.heuristic_cfg.katz_max_len = value.get<std::uint32_t>();
    } else if (key == "simrank_decay") {
      c.heuristic_cfg.simrank_decay = value.get<double>();
    } else if (key == "simrank_iters") {
      c.heuristic_cfg.simrank_iters = value.get<std::uint32_t>();
    } else if (key == "spd_cap") {
      c.heuristic_cfg.spd_cap = value.get<std::uint32_t>();
    } else if (key == "combine") {
      c.combine = parse_combine_mode(value.get<std::string>());
    } else if (key == "lr") {
      c.lr = value.get<double>();
    } else if (key == "lr_decay") {
      c.lr_decay = value.get<double>();
    } else if (key == "dropout") {
      c.dropout = value.get<double>();
    } else if (key == "clip_norm") {
      c.clip_norm = value.get<double>();
    } else if (key == "batch_size") {
      c.batch_size = value.get<std::size_t>();
    } else if (key == "epochs") {
      c.epochs = value.get<std::uint32_t>();
    } else if (key == "patience") {
      c.patience = value.get<std::uint32_t>();
    } else if (key == "feature_dim") {
      c.feature_dim = value.get<std::uint32_t>();
    } else if (key == "valid_metric") {
      c.valid_metric = value.get<std::string>();
    } else if (key == "negative_min_spd") {
      c.negative_min_spd = value.get<std::uint32_t>();
    } else if (key == "seed") {
      c.seed = value.get<std::uint64_t>();
    } else {
      throw UsageError("unknown config key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

// One supervised link sample. v != u always.
struct LinkSample {
  NodeId v = 0;
  NodeId u = 0;
  double label = 0.0;
};

// All state of one model instance: constants (features), trainable parameters
// and the fitted heuristic encoder. Only the parameters the variant requires
// are allocated.
struct ModelBundle {
  ModelConfig cfg;
  NodeId node_count = 0;
  std::size_t feat_dim = 0;
  Matrix features;                 // N x f, constant
  Matrix node_emb;                 // N x d, trainable
  std::vector<Matrix> gcn_weights; // L square d0 x d0 weights
  Mlp predictor;
  HeuristicEncoder encoder;

  std::size_t input_dim() const {
    return (variant_uses_x(cfg.variant) ? feat_dim : 0) +
           (variant_uses_ne(cfg.variant) ? cfg.node_emb_dim : 0);
  }
  std::size_t combine_dim() const {
    return variant_uses_gnn(cfg.variant) ? combine_width(input_dim(), cfg.combine) : 0;
  }
  std::size_t predictor_input_dim() const {
    return combine_dim() + (variant_uses_he(cfg.variant) ? encoder.total_dim() : 0);
  }

  // Trainable parameters in a stable order with stable paths.
  std::vector<ParamRef> params() {
    std::vector<ParamRef> out;
    if (!node_emb.empty()) out.push_back({"node_emb", &node_emb, true});
    for (std::size_t l = 0; l < gcn_weights.size(); ++l) {
      out.push_back({"gcn." + std::to_string(l) + ".weight", &gcn_weights[l], false});
    }
    for (std::size_t l = 0; l < predictor.weights.size(); ++l) {
      out.push_back({"mlp." + std::to_string(l) + ".weight", &predictor.weights[l],
                     false});
      out.push_back({"mlp." + std::to_string(l) + ".bias", &predictor.biases[l],
                     false});
    }
    for (std::size_t i = 0; i < encoder.tables.size(); ++i) {
      out.push_back({"heur." + std::string(heuristic_token(encoder.specs[i].kind)) +
                         ".table",
                     &encoder.tables[i], true});
    }
    return out;
  }

  void zero_grads() {
    for (ParamRef& p : params()) p.param->zero_grad();
  }
};

// Allocates exactly the parameters the variant requires. `features` must have
// one row per node for X variants; `specs` must be fitted for HE variants.
inline ModelBundle build_model(const Graph& g, ModelConfig cfg, Matrix features,
                               std::vector<BinSpec> specs, Rng& rng) {
  cfg.validate();
  ModelBundle mb;
  mb.cfg = cfg;
  mb.node_count = g.node_count();
  if (variant_uses_x(cfg.variant)) {
    check_shape(features.rows == g.node_count(),
                "feature matrix row count vs graph node count");
    mb.feat_dim = features.cols;
    mb.features = std::move(features);
  }
  if (variant_uses_ne(cfg.variant)) {
    mb.node_emb =
        init_params(g.node_count(), cfg.node_emb_dim, InitScheme::Xavier, rng);
    mb.node_emb.make_trainable();
  }
  if (variant_uses_gnn(cfg.variant)) {
    const std::size_t d0 = mb.input_dim();
    check_shape(d0 > 0, "GNN input width");
    for (std::uint32_t l = 0; l < cfg.gnn_layers; ++l) {
      Matrix w = init_params(d0, d0, InitScheme::Xavier, rng);
      w.make_trainable();
      mb.gcn_weights.push_back(std::move(w));
    }
  }
  if (variant_uses_he(cfg.variant)) {
    if (specs.size() != cfg.heuristics.size()) {
      throw DataError("build_model: fitted bin specs required for HE variants");
    }
    mb.encoder = HeuristicEncoder::create(std::move(specs), cfg.encoder.dim_h, rng);
  }
  mb.predictor =
      Mlp::create(mb.predictor_input_dim(), cfg.predictor_hidden, cfg.predictor_layers,
                  rng);
  return mb;
}

// Everything the backward pass needs from one forward pass.
struct ForwardTape {
  Matrix h0;
  std::vector<Matrix> agg;       // per layer: mean-aggregated input
  std::vector<Matrix> pre;       // per layer: agg * W
  std::vector<Matrix> hidden;    // per layer: post-activation output
  std::vector<Matrix> gcn_mask;  // dropout masks for hidden GCN layers
  Matrix combined;               // B x combine_dim
  Matrix heur_emb;               // B x total_dim
  std::vector<std::vector<std::uint32_t>> heur_idx;
  Matrix mlp_in;
  std::vector<Matrix> mlp_pre;
  std::vector<Matrix> mlp_act;
  std::vector<Matrix> mlp_mask;
  std::vector<double> logits;
};

namespace detail {

inline void relu_dropout_inplace(Matrix& m, const Matrix& mask) {
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    double v = m.values[i] > 0.0 ? m.values[i] : 0.0;
    if (!mask.empty()) v *= mask.values[i];
    m.values[i] = v;
  }
}

}  // namespace detail

// Forward pass through the whole architecture: L rounds of mean aggregation
// and weight transform over the full graph, pairwise combine, heuristic
// embedding lookup, MLP predictor. `heur_values` holds one row per sample
// with the raw heuristic values in encoder spec order (HE variants only).
inline ForwardTape model_forward(const Graph& g, const ModelBundle& mb,
                                 std::span<const LinkSample> samples,
                                 const Matrix& heur_values, bool training = false,
                                 Rng* dropout_rng = nullptr) {
  const ModelConfig& cfg = mb.cfg;
  const bool use_gnn = variant_uses_gnn(cfg.variant);
  const bool use_he = variant_uses_he(cfg.variant);
  const bool drop = training && cfg.dropout > 0.0 && dropout_rng != nullptr;
  ForwardTape tape;
  const std::size_t batch = samples.size();

  for (const LinkSample& s : samples) {
    if (s.v == s.u) throw DataError("link sample with v == u");
    if (s.v >= mb.node_count || s.u >= mb.node_count) {
      throw DataError("link sample node id out of range");
    }
  }

  if (use_gnn) {
    const std::size_t d0 = mb.input_dim();
    tape.h0 = Matrix(mb.node_count, d0);
    std::size_t col0 = 0;
    if (variant_uses_x(cfg.variant)) {
      for (std::size_t r = 0; r < mb.features.rows; ++r) {
        const auto src = mb.features.row(r);
        auto dst = tape.h0.row(r);
        for (std::size_t c = 0; c < mb.feat_dim; ++c) dst[c] = src[c];
      }
      col0 = mb.feat_dim;
    }
    if (variant_uses_ne(cfg.variant)) {
      for (std::size_t r = 0; r < mb.node_emb.rows; ++r) {
        const auto src = mb.node_emb.row(r);
        auto dst = tape.h0.row(r);
        for (std::size_t c = 0; c < mb.node_emb.cols; ++c) dst[col0 + c] = src[c];
      }
    }

    const Matrix* h = &tape.h0;
    for (std::size_t l = 0; l < mb.gcn_weights.size(); ++l) {
      tape.agg.push_back(mean_aggregate(g, *h));
      tape.pre.push_back(matmul(tape.agg.back(), mb.gcn_weights[l]));
      Matrix out = tape.pre.back();
      if (l + 1 < mb.gcn_weights.size()) {
        Matrix mask;
        if (drop) mask = make_dropout_mask(out.rows, out.cols, cfg.dropout, *dropout_rng);
        detail::relu_dropout_inplace(out, mask);
        tape.gcn_mask.push_back(std::move(mask));
      }
      tape.hidden.push_back(std::move(out));
      h = &tape.hidden.back();
    }

    const Matrix& reps = tape.hidden.back();
    tape.combined = Matrix(batch, mb.combine_dim());
    for (std::size_t b = 0; b < batch; ++b) {
      combine(reps.row(samples[b].v), reps.row(samples[b].u), cfg.combine,
              tape.combined.row(b));
    }
  }

  if (use_he) {
    check_shape(heur_values.rows == batch &&
                    heur_values.cols == mb.encoder.specs.size(),
                "heuristic value matrix for batch");
    tape.heur_emb = Matrix(batch, mb.encoder.total_dim());
    tape.heur_idx.resize(batch);
    for (std::size_t b = 0; b < batch; ++b) {
      tape.heur_idx[b] = mb.encoder.encode_row(heur_values.row(b));
      auto dst = tape.heur_emb.row(b);
      for (std::size_t k = 0; k < mb.encoder.specs.size(); ++k) {
        const auto row = mb.encoder.tables[k].row(tape.heur_idx[b][k]);
        for (std::size_t c = 0; c < mb.encoder.dim_h; ++c) {
          dst[k * mb.encoder.dim_h + c] = row[c];
        }
      }
    }
  }

  // Assemble predictor input [combined | heuristic embedding].
  const std::size_t cw = tape.combined.empty() ? 0 : tape.combined.cols;
  const std::size_t hw = tape.heur_emb.empty() ? 0 : tape.heur_emb.cols;
  tape.mlp_in = Matrix(batch, cw + hw);
  for (std::size_t b = 0; b < batch; ++b) {
    auto dst = tape.mlp_in.row(b);
    if (cw > 0) {
      const auto src = tape.combined.row(b);
      for (std::size_t c = 0; c < cw; ++c) dst[c] = src[c];
    }
    if (hw > 0) {
      const auto src = tape.heur_emb.row(b);
      for (std::size_t c = 0; c < hw; ++c) dst[cw + c] = src[c];
    }
  }

  const Matrix* a = &tape.mlp_in;
  for (std::size_t l = 0; l < mb.predictor.weights.size(); ++l) {
    Matrix z = matmul(*a, mb.predictor.weights[l]);
    const Matrix& bias = mb.predictor.biases[l];
    for (std::size_t r = 0; r < z.rows; ++r) {
      auto row = z.row(r);
      for (std::size_t c = 0; c < z.cols; ++c) row[c] += bias.at(0, c);
    }
    tape.mlp_pre.push_back(z);
    if (l + 1 < mb.predictor.weights.size()) {
      Matrix mask;
      if (drop) mask = make_dropout_mask(z.rows, z.cols, cfg.dropout, *dropout_rng);
      detail::relu_dropout_inplace(z, mask);
      tape.mlp_mask.push_back(std::move(mask));
    }
    tape.mlp_act.push_back(std::move(z));
    a = &tape.mlp_act.back();
  }

  tape.logits.resize(batch);
  for (std::size_t b = 0; b < batch; ++b) tape.logits[b] = tape.mlp_act.back().at(b, 0);
  return tape;
}

// Reverse-mode pass: accumulates exact gradients of the mean BCE loss into
// every trainable parameter and returns the loss. Embedding-table gradients
// are nonzero only on rows inside the batch's receptive fields.
inline double model_backward(const Graph& g, ModelBundle& mb, const ForwardTape& tape,
                             std::span<const LinkSample> samples) {
  const ModelConfig& cfg = mb.cfg;
  const std::size_t batch = samples.size();
  std::vector<double> labels(batch);
  for (std::size_t b = 0; b < batch; ++b) labels[b] = samples[b].label;
  const double loss = bce_with_logits(tape.logits, labels);

  Matrix dz(batch, 1);
  for (std::size_t b = 0; b < batch; ++b) {
    dz.at(b, 0) = (sigmoid(tape.logits[b]) - labels[b]) / static_cast<double>(batch);
  }

  for (std::size_t l = mb.predictor.weights.size(); l-- > 0;) {
    const Matrix& a_prev = l == 0 ? tape.mlp_in : tape.mlp_act[l - 1];
    Matrix dw = matmul_at_b(a_prev, dz);
    Matrix& w = mb.predictor.weights[l];
    for (std::size_t i = 0; i < dw.values.size(); ++i) w.grad[i] += dw.values[i];
    Matrix& bias = mb.predictor.biases[l];
    for (std::size_t r = 0; r < dz.rows; ++r) {
      for (std::size_t c = 0; c < dz.cols; ++c) bias.grad[c] += dz.at(r, c);
    }
    Matrix da = matmul_a_bt(dz, w);
    if (l == 0) {
      dz = std::move(da);
      break;
    }
    const Matrix& pre = tape.mlp_pre[l - 1];
    const Matrix& mask = tape.mlp_mask[l - 1];
    for (std::size_t i = 0; i < da.values.size(); ++i) {
      double v = pre.values[i] > 0.0 ? da.values[i] : 0.0;
      if (!mask.empty()) v *= mask.values[i];
      da.values[i] = v;
    }
    dz = std::move(da);
  }
  // dz is now the gradient w.r.t. the predictor input.
  const std::size_t cw = tape.combined.empty() ? 0 : tape.combined.cols;

  if (variant_uses_he(cfg.variant) && !tape.heur_emb.empty()) {
    const std::size_t dim_h = mb.encoder.dim_h;
    for (std::size_t b = 0; b < batch; ++b) {
      const auto src = dz.row(b);
      for (std::size_t k = 0; k < mb.encoder.tables.size(); ++k) {
        auto grow = mb.encoder.tables[k].grad_row(tape.heur_idx[b][k]);
        for (std::size_t c = 0; c < dim_h; ++c) {
          grow[c] += src[cw + k * dim_h + c];
        }
      }
    }
  }

  if (variant_uses_gnn(cfg.variant)) {
    const Matrix& reps = tape.hidden.back();
    Matrix dh(reps.rows, reps.cols);
    for (std::size_t b = 0; b < batch; ++b) {
      const auto dcomb = dz.row(b);
      const NodeId v = samples[b].v;
      const NodeId u = samples[b].u;
      auto dv = dh.row(v);
      auto du = dh.row(u);
      if (cfg.combine == CombineMode::Hadamard) {
        const auto rv = reps.row(v);
        const auto ru = reps.row(u);
        for (std::size_t c = 0; c < reps.cols; ++c) {
          dv[c] += dcomb[c] * ru[c];
          du[c] += dcomb[c] * rv[c];
        }
      } else {
        for (std::size_t c = 0; c < reps.cols; ++c) {
          dv[c] += dcomb[c];
          du[c] += dcomb[c + reps.cols];
        }
      }
    }

    for (std::size_t l = mb.gcn_weights.size(); l-- > 0;) {
      if (l + 1 < mb.gcn_weights.size()) {
        const Matrix& pre = tape.pre[l];
        const Matrix& mask = tape.gcn_mask[l];
        for (std::size_t i = 0; i < dh.values.size(); ++i) {
          double v = pre.values[i] > 0.0 ? dh.values[i] : 0.0;
          if (!mask.empty()) v *= mask.values[i];
          dh.values[i] = v;
        }
      }
      Matrix dw = matmul_at_b(tape.agg[l], dh);
      Matrix& w = mb.gcn_weights[l];
      for (std::size_t i = 0; i < dw.values.size(); ++i) w.grad[i] += dw.values[i];
      Matrix dp = matmul_a_bt(dh, w);
      dh = mean_aggregate_adjoint(g, dp);
    }

    if (variant_uses_ne(cfg.variant)) {
      const std::size_t col0 = variant_uses_x(cfg.variant) ? mb.feat_dim : 0;
      for (std::size_t r = 0; r < mb.node_emb.rows; ++r) {
        const auto src = dh.row(r);
        auto dst = mb.node_emb.grad_row(r);
        for (std::size_t c = 0; c < mb.node_emb.cols; ++c) dst[c] += src[col0 + c];
      }
    }
  }
  return loss;
}

// Raw heuristic values for a pair list in the encoder's spec order, computed
// on the (training) graph.
inline Matrix heuristic_values_for_pairs(const Graph& g, const ModelBundle& mb,
                                         std::span<const Edge> pairs,
                                         unsigned workers = 1) {
  if (!variant_uses_he(mb.cfg.variant)) return {};
  const auto kinds = mb.encoder.kinds();
  return batch_score(g, pairs, kinds, mb.cfg.heuristic_cfg, workers);
}

// Evaluation-mode logits for a pair list. Heuristics for HE variants are
// computed on the given graph, which callers keep as the training graph.
inline std::vector<double> predict_scores(const Graph& g, const ModelBundle& mb,
                                          std::span<const Edge> pairs,
                                          unsigned workers = 1) {
  std::vector<LinkSample> samples;
  samples.reserve(pairs.size());
  for (const Edge& e : pairs) samples.push_back({e.first, e.second, 0.0});
  const Matrix heur = heuristic_values_for_pairs(g, mb, pairs, workers);
  ForwardTape tape = model_forward(g, mb, samples, heur, /*training=*/false);
  return std::move(tape.logits);
}

}  // namespace linkpred
