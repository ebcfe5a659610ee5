#pragma once

#include <string>
#include <vector>

#include "kws/error.hpp"

namespace kws {

inline long long numel_of(const std::vector<int>& shape) {
  long long n = 1;
  for (const int d : shape) {
    if (d < 0) throw ShapeError("negative dimension");
    n *= d;
  }
  return n;
}

inline std::string shape_str(const std::vector<int>& shape) {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

// Dense row-major N-dimensional array.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s)
      : shape(std::move(s)), data(static_cast<size_t>(numel_of(shape)), T{}) {}
  Tensor(std::vector<int> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
    if (static_cast<long long>(data.size()) != numel_of(shape))
      throw ShapeError("tensor data size does not match shape " + shape_str(shape));
  }

  long long numel() const { return static_cast<long long>(data.size()); }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(shape);
    for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
    return out;
  }

  static Tensor full(std::vector<int> s, T value) {
    Tensor t(std::move(s));
    std::fill(t.data.begin(), t.data.end(), value);
    return t;
  }
};

}  // namespace kws
