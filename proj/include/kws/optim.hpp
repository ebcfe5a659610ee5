#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "kws/rng.hpp"
#include "kws/tensor.hpp"

namespace kws {

enum class InitKind { Xavier, TruncatedNormal };

struct InitSpec {
  InitKind kind = InitKind::Xavier;
  double stddev = 0.01;  // truncated normal only
  uint64_t seed = 0;
};

// Fan-in/fan-out for the Xavier bound. Dense [m,n] uses (m, n); conv kernels
// [kh,kw,in,out] use the receptive-field-scaled (kh*kw*in, kh*kw*out).
inline std::pair<long long, long long> init_fans(const std::vector<int>& shape) {
  if (shape.size() < 2) throw ParamError("weight initialization needs >= 2 dims");
  if (shape.size() == 2) return {shape[0], shape[1]};
  long long receptive = 1;
  for (size_t i = 0; i + 2 < shape.size(); ++i) receptive *= shape[i];
  return {receptive * shape[shape.size() - 2], receptive * shape[shape.size() - 1]};
}

inline double xavier_bound(const std::vector<int>& shape) {
  const auto [fan_in, fan_out] = init_fans(shape);
  return std::sqrt(6.0) / std::sqrt(static_cast<double>(fan_in + fan_out));
}

template <typename T>
void fill_xavier(Tensor<T>& t, Rng& rng) {
  const double eps = xavier_bound(t.shape);
  for (T& v : t.data) v = static_cast<T>(rng.uniform(-eps, eps));
}

template <typename T>
Tensor<T> xavier_init(std::vector<int> shape, uint64_t seed) {
  Tensor<T> t(std::move(shape));
  Rng rng(seed);
  fill_xavier(t, rng);
  return t;
}

// Normal draws with anything beyond two standard deviations rejected and
// redrawn. max_retries (optional) reports the worst per-element redraw count.
template <typename T>
void fill_truncated_normal(Tensor<T>& t, double stddev, Rng& rng, int* max_retries = nullptr) {
  if (stddev <= 0.0) throw ParamError("stddev must be positive");
  for (T& v : t.data) {
    int retries = 0;
    double draw;
    do {
      draw = stddev * rng.normal();
      ++retries;
    } while (std::abs(draw) > 2.0 * stddev);
    if (max_retries) *max_retries = std::max(*max_retries, retries - 1);
    v = static_cast<T>(draw);
  }
}

template <typename T>
Tensor<T> truncated_normal_init(std::vector<int> shape, double stddev, uint64_t seed,
                                int* max_retries = nullptr) {
  Tensor<T> t(std::move(shape));
  Rng rng(seed);
  fill_truncated_normal(t, stddev, rng, max_retries);
  return t;
}

enum class OptimizerKind { Sgd, Adam };

namespace detail {
template <typename T>
void check_finite(const std::vector<T>& values, const char* what) {
  for (const T v : values)
    if (!std::isfinite(static_cast<double>(v)))
      throw Error(std::string("optimizer produced a non-finite value in ") + what);
}
}  // namespace detail

// p <- p - lr * g
template <typename T>
void sgd_step(std::vector<T>& params, const std::vector<T>& grads, double lr) {
  if (params.size() != grads.size()) throw ShapeError("sgd_step size mismatch");
  const T rate = static_cast<T>(lr);
  for (size_t i = 0; i < params.size(); ++i) params[i] -= rate * grads[i];
  detail::check_finite(params, "sgd_step");
}

template <typename T>
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int step_count = 0;
  std::vector<std::vector<T>> m, v;
  bool initialized = false;

  void init(const std::vector<size_t>& param_sizes) {
    m.clear();
    v.clear();
    for (const size_t n : param_sizes) {
      m.emplace_back(n, T{});
      v.emplace_back(n, T{});
    }
    step_count = 0;
    initialized = true;
  }
};

// Standard Adam with bias correction, applied tensor by tensor. The state's
// step counter advances once per call.
template <typename T>
void adam_step(std::vector<std::vector<T>*> params, std::vector<const std::vector<T>*> grads,
               AdamState<T>& state) {
  if (!state.initialized) throw Error("adam_step called with uninitialized state");
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw ShapeError("adam_step parameter/state count mismatch");
  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, state.step_count);
  const double bc2 = 1.0 - std::pow(state.beta2, state.step_count);
  for (size_t p = 0; p < params.size(); ++p) {
    std::vector<T>& w = *params[p];
    const std::vector<T>& g = *grads[p];
    std::vector<T>& m = state.m[p];
    std::vector<T>& v = state.v[p];
    if (w.size() != g.size() || w.size() != m.size())
      throw ShapeError("adam_step tensor size mismatch");
    const T b1 = static_cast<T>(state.beta1), b2 = static_cast<T>(state.beta2);
    for (size_t i = 0; i < w.size(); ++i) {
      m[i] = b1 * m[i] + (T{1} - b1) * g[i];
      v[i] = b2 * v[i] + (T{1} - b2) * g[i] * g[i];
      const double mhat = static_cast<double>(m[i]) / bc1;
      const double vhat = static_cast<double>(v[i]) / bc2;
      w[i] -= static_cast<T>(state.lr * mhat / (std::sqrt(vhat) + state.eps));
    }
    detail::check_finite(w, "adam_step");
  }
}

}  // namespace kws
