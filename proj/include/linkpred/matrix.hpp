#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "linkpred/errors.hpp"
#include "linkpred/rng.hpp"

namespace linkpred {

// Dense row-major f64 matrix with an optional same-shape gradient buffer.
// All model state (parameters, activations, feature tables) uses this type.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::vector<double> grad;  // empty unless trainable

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), values(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {values.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * cols, cols};
  }
  std::span<double> grad_row(std::size_t r) { return {grad.data() + r * cols, cols}; }
  std::span<const double> grad_row(std::size_t r) const {
    return {grad.data() + r * cols, cols};
  }

  bool empty() const { return values.empty(); }
  std::size_t size() const { return values.size(); }

  bool trainable() const { return !grad.empty(); }
  void make_trainable() { grad.assign(values.size(), 0.0); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

inline void check_shape(bool ok, const std::string& what) {
  if (!ok) throw DataError("shape mismatch: " + what);
}

// a(r x k) * b(k x c)
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  check_shape(a.cols == b.rows, "matmul inner dimensions");
  Matrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.values.data() + i * a.cols;
    double* orow = out.values.data() + i * out.cols;
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double av = arow[k];
      if (av == 0.0) continue;
      const double* brow = b.values.data() + k * b.cols;
      for (std::size_t j = 0; j < b.cols; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

// a^T(k x r) * b(k x c) -> (r x c)
inline Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
  check_shape(a.rows == b.rows, "matmul_at_b outer dimensions");
  Matrix out(a.cols, b.cols);
  for (std::size_t k = 0; k < a.rows; ++k) {
    const double* arow = a.values.data() + k * a.cols;
    const double* brow = b.values.data() + k * b.cols;
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* orow = out.values.data() + i * out.cols;
      for (std::size_t j = 0; j < b.cols; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

// a(r x k) * b^T(c x k) -> (r x c)
inline Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
  check_shape(a.cols == b.cols, "matmul_a_bt inner dimensions");
  Matrix out(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.values.data() + i * a.cols;
    for (std::size_t j = 0; j < b.rows; ++j) {
      const double* brow = b.values.data() + j * b.cols;
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) acc += arow[k] * brow[k];
      out.values[i * out.cols + j] = acc;
    }
  }
  return out;
}

enum class InitScheme { Xavier, He };

// Uniform[-a, a] fan-based init; fan_in = rows, fan_out = cols of the weight.
// Xavier: a = sqrt(6 / (fan_in + fan_out)).  He: a = sqrt(6 / fan_in).
inline Matrix init_params(std::size_t rows, std::size_t cols, InitScheme scheme,
                          Rng& rng) {
  const double fan_in = static_cast<double>(rows);
  const double fan_out = static_cast<double>(cols);
  const double a = scheme == InitScheme::Xavier ? std::sqrt(6.0 / (fan_in + fan_out))
                                                : std::sqrt(6.0 / fan_in);
  Matrix m(rows, cols);
  for (double& x : m.values) x = rng.uniform(-a, a);
  return m;
}

// Mask entries are 0 with probability `rate`, else 1/(1-rate).
inline Matrix make_dropout_mask(std::size_t rows, std::size_t cols, double rate,
                                Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw UsageError("dropout rate must be in [0, 1)");
  Matrix m(rows, cols);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (double& x : m.values) x = rng.uniform() < rate ? 0.0 : keep_scale;
  return m;
}

// Identity when not training or rate == 0.
inline Matrix dropout(const Matrix& x, double rate, Rng& rng, bool training) {
  if (!training || rate == 0.0) return x;
  Matrix mask = make_dropout_mask(x.rows, x.cols, rate, rng);
  Matrix out = x;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] *= mask.values[i];
  return out;
}

}  // namespace linkpred
