#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "linkpred/errors.hpp"
#include "linkpred/graph.hpp"
#include "linkpred/matrix.hpp"

namespace linkpred {

// Mean over {i} ∪ Γ_i of the input rows; an isolated node keeps its own row.
// Neighbor order is fixed by the sorted CSR slices, so the summation order
// (and the f64 result) does not depend on input edge order.
inline Matrix mean_aggregate(const Graph& g, const Matrix& h_in) {
  check_shape(h_in.rows == g.node_count(), "mean_aggregate: one row per node");
  Matrix out(h_in.rows, h_in.cols);
  for (NodeId i = 0; i < g.node_count(); ++i) {
    auto acc = out.row(i);
    const auto self = h_in.row(i);
    for (std::size_t c = 0; c < h_in.cols; ++c) acc[c] = self[c];
    for (NodeId j : g.neighbors(i)) {
      const auto nrow = h_in.row(j);
      for (std::size_t c = 0; c < h_in.cols; ++c) acc[c] += nrow[c];
    }
    const double inv = 1.0 / (static_cast<double>(g.degree(i)) + 1.0);
    for (std::size_t c = 0; c < h_in.cols; ++c) acc[c] *= inv;
  }
  return out;
}

// Adjoint of mean_aggregate: out_i = Σ_{j ∈ Γ_i ∪ {i}} grad_j / (deg_j + 1).
inline Matrix mean_aggregate_adjoint(const Graph& g, const Matrix& grad_out) {
  check_shape(grad_out.rows == g.node_count(), "mean_aggregate_adjoint rows");
  Matrix scaled(grad_out.rows, grad_out.cols);
  for (NodeId j = 0; j < g.node_count(); ++j) {
    const double inv = 1.0 / (static_cast<double>(g.degree(j)) + 1.0);
    const auto src = grad_out.row(j);
    auto dst = scaled.row(j);
    for (std::size_t c = 0; c < grad_out.cols; ++c) dst[c] = src[c] * inv;
  }
  Matrix out(grad_out.rows, grad_out.cols);
  for (NodeId i = 0; i < g.node_count(); ++i) {
    auto acc = out.row(i);
    const auto self = scaled.row(i);
    for (std::size_t c = 0; c < grad_out.cols; ++c) acc[c] = self[c];
    for (NodeId j : g.neighbors(i)) {
      const auto nrow = scaled.row(j);
      for (std::size_t c = 0; c < grad_out.cols; ++c) acc[c] += nrow[c];
    }
  }
  return out;
}

// One GCN layer: mean aggregation followed by the shared weight transform.
inline Matrix gcn_forward(const Graph& g, const Matrix& h_in, const Matrix& weight) {
  check_shape(h_in.cols == weight.rows, "gcn_forward weight input width");
  return matmul(mean_aggregate(g, h_in), weight);
}

enum class CombineMode { Hadamard, Concat };

inline std::size_t combine_width(std::size_t dim, CombineMode mode) {
  return mode == CombineMode::Hadamard ? dim : 2 * dim;
}

inline void combine(std::span<const double> a, std::span<const double> b,
                    CombineMode mode, std::span<double> out) {
  if (mode == CombineMode::Hadamard) {
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  } else {
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[a.size() + i] = b[i];
  }
}

inline CombineMode parse_combine_mode(const std::string& name) {
  if (name == "hadamard") return CombineMode::Hadamard;
  if (name == "concat") return CombineMode::Concat;
  throw UsageError("unknown combine mode '" + name + "'; use hadamard or concat");
}

inline std::string combine_mode_name(CombineMode m) {
  return m == CombineMode::Hadamard ? "hadamard" : "concat";
}

// MLP with ReLU hidden activations and a single logit output.
struct Mlp {
  std::vector<Matrix> weights;  // layer l: d_{l-1} x d_l
  std::vector<Matrix> biases;   // 1 x d_l

  std::size_t depth() const { return weights.size(); }

  static Mlp create(std::size_t input_dim, std::size_t hidden_dim, std::size_t layers,
                    Rng& rng) {
    if (layers < 1) throw UsageError("predictor needs at least one layer");
    Mlp mlp;
    std::size_t in = input_dim;
    for (std::size_t l = 0; l < layers; ++l) {
      const bool last = l + 1 == layers;
      const std::size_t out = last ? 1 : hidden_dim;
      Matrix w = init_params(in, out, last ? InitScheme::Xavier : InitScheme::He, rng);
      w.make_trainable();
      Matrix b(1, out);
      b.make_trainable();
      mlp.weights.push_back(std::move(w));
      mlp.biases.push_back(std::move(b));
      in = out;
    }
    return mlp;
  }

  // Single-sample inference (no dropout).
  double forward(std::span<const double> x) const {
    std::vector<double> cur(x.begin(), x.end());
    std::vector<double> next;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      const Matrix& w = weights[l];
      next.assign(w.cols, 0.0);
      for (std::size_t i = 0; i < w.rows; ++i) {
        const double xv = cur[i];
        if (xv == 0.0) continue;
        for (std::size_t j = 0; j < w.cols; ++j) next[j] += xv * w.at(i, j);
      }
      for (std::size_t j = 0; j < w.cols; ++j) next[j] += biases[l].at(0, j);
      if (l + 1 < weights.size()) {
        for (double& v : next) v = v > 0.0 ? v : 0.0;
      }
      cur.swap(next);
    }
    return cur[0];
  }
};

// Mean binary cross-entropy on logits, in the stabilized
// max(z,0) - z*y + log(1 + exp(-|z|)) form.
inline double bce_with_logits(std::span<const double> logits,
                              std::span<const double> labels) {
  check_shape(logits.size() == labels.size(), "bce logits vs labels");
  if (logits.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double z = logits[i];
    sum += std::max(z, 0.0) - z * labels[i] + std::log1p(std::exp(-std::abs(z)));
  }
  return sum / static_cast<double>(logits.size());
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Named handle to one trainable matrix. `row_sparse` marks embedding-style
// tables whose untouched rows (exact-zero gradient) are skipped entirely by
// the optimizer, moments included.
struct ParamRef {
  std::string path;
  Matrix* param = nullptr;
  bool row_sparse = false;
};

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  void init(std::span<const ParamRef> params) {
    step = 0;
    m.clear();
    v.clear();
    for (const ParamRef& p : params) {
      m.emplace_back(p.param->size(), 0.0);
      v.emplace_back(p.param->size(), 0.0);
    }
  }
};

inline void adam_step(std::span<const ParamRef> params, AdamState& state, double lr) {
  if (state.m.size() != params.size()) state.init(params);
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t p = 0; p < params.size(); ++p) {
    Matrix& mat = *params[p].param;
    auto& m = state.m[p];
    auto& v = state.v[p];
    auto update_range = [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const double gr = mat.grad[i];
        m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * gr;
        v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * gr * gr;
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        mat.values[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
      }
    };
    if (params[p].row_sparse) {
      for (std::size_t r = 0; r < mat.rows; ++r) {
        const auto row = mat.grad_row(r);
        bool touched = false;
        for (double gv : row) {
          if (gv != 0.0) {
            touched = true;
            break;
          }
        }
        if (touched) update_range(r * mat.cols, (r + 1) * mat.cols);
      }
    } else {
      update_range(0, mat.size());
    }
  }
}

// Scales all gradients by max_norm / ||g||_joint when the joint norm exceeds
// max_norm. Returns the pre-clip joint norm.
inline double clip_grad_norm(std::span<const ParamRef> params, double max_norm) {
  double sq = 0.0;
  for (const ParamRef& p : params) {
    for (double gv : p.param->grad) sq += gv * gv;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (const ParamRef& p : params) {
      for (double& gv : p.param->grad) gv *= scale;
    }
  }
  return norm;
}

// ExponentialLR: lr_t = lr0 * gamma^t with t counted in epochs.
struct LrSchedule {
  double base_lr = 1e-3;
  double gamma = 1.0;

  double at(std::int64_t epoch) const {
    return base_lr * std::pow(gamma, static_cast<double>(epoch));
  }
};

}  // namespace linkpred
