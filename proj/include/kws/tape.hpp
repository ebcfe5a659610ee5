#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "kws/gemm.hpp"
#include "kws/rng.hpp"
#include "kws/tensor.hpp"

namespace kws {

enum class Padding { Valid, Same };

struct ConvGeometry {
  int out_h = 0, out_w = 0;
  int pad_top = 0, pad_left = 0;
};

// VALID: out = floor((in - k) / stride) + 1. SAME: out = ceil(in / stride)
// with the extra padding pixel on the bottom/right.
inline ConvGeometry conv_geometry(int h, int w, int kh, int kw, int sh, int sw, Padding pad) {
  if (kh < 1 || kw < 1) throw ParamError("kernel dims must be positive");
  if (sh < 1 || sw < 1) throw ParamError("strides must be positive");
  ConvGeometry g;
  if (pad == Padding::Valid) {
    if (h < kh || w < kw)
      throw ShapeError("kernel " + std::to_string(kh) + "x" + std::to_string(kw) +
                       " larger than input " + std::to_string(h) + "x" + std::to_string(w));
    g.out_h = (h - kh) / sh + 1;
    g.out_w = (w - kw) / sw + 1;
  } else {
    g.out_h = (h + sh - 1) / sh;
    g.out_w = (w + sw - 1) / sw;
    const int pad_h = std::max(0, (g.out_h - 1) * sh + kh - h);
    const int pad_w = std::max(0, (g.out_w - 1) * sw + kw - w);
    g.pad_top = pad_h / 2;
    g.pad_left = pad_w / 2;
  }
  return g;
}

inline int pool_out_dim(int in, int stride) { return (in + stride - 1) / stride; }

template <typename T>
struct Var {
  int id = -1;
};

// Records operations in creation order; creation order is topological, so
// backward walks the node list exactly once in reverse.
template <typename T>
class Tape {
 public:
  Var<T> input(const Tensor<T>& value, bool requires_grad = false) {
    return make(value.shape, value.data, requires_grad);
  }

  Var<T> make(std::vector<int> shape, std::vector<T> value, bool requires_grad) {
    if (static_cast<long long>(value.size()) != numel_of(shape))
      throw ShapeError("node value does not match shape " + shape_str(shape));
    Node node;
    node.shape = std::move(shape);
    node.val = std::move(value);
    node.requires_grad = requires_grad;
    if (requires_grad) node.grad.assign(node.val.size(), T{});
    nodes_.push_back(std::move(node));
    return Var<T>{static_cast<int>(nodes_.size()) - 1};
  }

  const std::vector<int>& shape(Var<T> v) const { return node(v).shape; }
  const std::vector<T>& val(Var<T> v) const { return node(v).val; }
  bool requires_grad(Var<T> v) const { return node(v).requires_grad; }
  const std::vector<T>& grad(Var<T> v) const {
    if (!node(v).requires_grad) throw Error("node has no gradient");
    return node(v).grad;
  }
  std::vector<T>& mutable_grad(Var<T> v) { return nodes_[check(v)].grad; }

  Tensor<T> value_tensor(Var<T> v) const { return Tensor<T>(node(v).shape, node(v).val); }
  Tensor<T> grad_tensor(Var<T> v) const { return Tensor<T>(node(v).shape, grad(v)); }

  void set_backward(Var<T> v, std::function<void(Tape&)> fn) {
    nodes_[check(v)].back = std::move(fn);
  }

  void backward(Var<T> loss) {
    Node& l = nodes_[check(loss)];
    if (l.val.size() != 1) throw Error("backward requires a scalar loss");
    if (!l.requires_grad) return;  // loss does not depend on any tracked input
    l.grad[0] = T{1};
    for (int i = loss.id; i >= 0; --i) {
      Node& n = nodes_[static_cast<size_t>(i)];
      if (n.requires_grad && n.back) n.back(*this);
    }
  }

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    std::vector<int> shape;
    std::vector<T> val;
    std::vector<T> grad;
    bool requires_grad = false;
    std::function<void(Tape&)> back;
  };

  size_t check(Var<T> v) const {
    if (v.id < 0 || static_cast<size_t>(v.id) >= nodes_.size()) throw Error("invalid tape var");
    return static_cast<size_t>(v.id);
  }
  const Node& node(Var<T> v) const { return nodes_[check(v)]; }

  std::vector<Node> nodes_;
};

namespace detail {

// Gathers conv patches: rows = b*oh*ow, cols = kh*kw*c, zero padded.
template <typename T>
std::vector<T> im2col(const std::vector<T>& x, int b, int h, int w, int c, int kh, int kw, int sh,
                      int sw, const ConvGeometry& g) {
  const int cols = kh * kw * c;
  std::vector<T> col(static_cast<size_t>(b) * g.out_h * g.out_w * cols, T{});
  size_t row = 0;
  for (int bi = 0; bi < b; ++bi) {
    const T* img = x.data() + static_cast<size_t>(bi) * h * w * c;
    for (int oy = 0; oy < g.out_h; ++oy) {
      for (int ox = 0; ox < g.out_w; ++ox, ++row) {
        T* dst = col.data() + row * cols;
        const int y0 = oy * sh - g.pad_top;
        const int x0 = ox * sw - g.pad_left;
        for (int ky = 0; ky < kh; ++ky) {
          const int y = y0 + ky;
          if (y < 0 || y >= h) continue;
          for (int kx = 0; kx < kw; ++kx) {
            const int xx = x0 + kx;
            if (xx < 0 || xx >= w) continue;
            const T* src = img + (static_cast<size_t>(y) * w + xx) * c;
            T* d = dst + (static_cast<size_t>(ky) * kw + kx) * c;
            for (int ch = 0; ch < c; ++ch) d[ch] = src[ch];
          }
        }
      }
    }
  }
  return col;
}

// Scatter-adds column gradients back into the input layout.
template <typename T>
void col2im_add(const std::vector<T>& col, int b, int h, int w, int c, int kh, int kw, int sh,
                int sw, const ConvGeometry& g, std::vector<T>& dx) {
  const int cols = kh * kw * c;
  size_t row = 0;
  for (int bi = 0; bi < b; ++bi) {
    T* img = dx.data() + static_cast<size_t>(bi) * h * w * c;
    for (int oy = 0; oy < g.out_h; ++oy) {
      for (int ox = 0; ox < g.out_w; ++ox, ++row) {
        const T* src_row = col.data() + row * cols;
        const int y0 = oy * sh - g.pad_top;
        const int x0 = ox * sw - g.pad_left;
        for (int ky = 0; ky < kh; ++ky) {
          const int y = y0 + ky;
          if (y < 0 || y >= h) continue;
          for (int kx = 0; kx < kw; ++kx) {
            const int xx = x0 + kx;
            if (xx < 0 || xx >= w) continue;
            T* d = img + (static_cast<size_t>(y) * w + xx) * c;
            const T* s = src_row + (static_cast<size_t>(ky) * kw + kx) * c;
            for (int ch = 0; ch < c; ++ch) d[ch] += s[ch];
          }
        }
      }
    }
  }
}

template <typename T>
Var<T> elementwise(Tape<T>& tape, Var<T> x, const std::function<T(T)>& fw,
                   const std::function<T(T, T)>& dvalue_dy) {
  const std::vector<T>& xv = tape.val(x);
  std::vector<T> out(xv.size());
  for (size_t i = 0; i < xv.size(); ++i) out[i] = fw(xv[i]);
  const Var<T> y = tape.make(tape.shape(x), std::move(out), tape.requires_grad(x));
  if (tape.requires_grad(x)) {
    tape.set_backward(y, [x, y, dvalue_dy](Tape<T>& t) {
      const std::vector<T>& g = t.grad(y);
      const std::vector<T>& xin = t.val(x);
      const std::vector<T>& yout = t.val(y);
      std::vector<T>& dx = t.mutable_grad(x);
      for (size_t i = 0; i < g.size(); ++i) dx[i] += g[i] * dvalue_dy(xin[i], yout[i]);
    });
  }
  return y;
}

}  // namespace detail

// input [b,h,w,c] (*) kernel [kh,kw,c,oc], cross-correlation, no kernel flip.
template <typename T>
Var<T> conv2d(Tape<T>& tape, Var<T> input, Var<T> kernel, int stride_h, int stride_w,
              Padding padding) {
  const std::vector<int>& xs = tape.shape(input);
  const std::vector<int>& ks = tape.shape(kernel);
  if (xs.size() != 4) throw ShapeError("conv2d input must be 4-D, got " + shape_str(xs));
  if (ks.size() != 4) throw ShapeError("conv2d kernel must be 4-D, got " + shape_str(ks));
  if (xs[3] != ks[2])
    throw ShapeError("conv2d channel mismatch: input " + shape_str(xs) + " kernel " +
                     shape_str(ks));
  const int b = xs[0], h = xs[1], w = xs[2], c = xs[3];
  const int kh = ks[0], kw = ks[1], oc = ks[3];
  const ConvGeometry g = conv_geometry(h, w, kh, kw, stride_h, stride_w, padding);
  const int rows = b * g.out_h * g.out_w;
  const int cols = kh * kw * c;

  const std::vector<T> col =
      detail::im2col(tape.val(input), b, h, w, c, kh, kw, stride_h, stride_w, g);
  std::vector<T> out(static_cast<size_t>(rows) * oc);
  gemm_nn(rows, oc, cols, col.data(), tape.val(kernel).data(), out.data(), false);

  const bool needs = tape.requires_grad(input) || tape.requires_grad(kernel);
  const Var<T> y = tape.make({b, g.out_h, g.out_w, oc}, std::move(out), needs);
  if (needs) {
    tape.set_backward(y, [input, kernel, y, b, h, w, c, kh, kw, oc, stride_h, stride_w, g, rows,
                          cols](Tape<T>& t) {
      const std::vector<T>& gy = t.grad(y);
      if (t.requires_grad(kernel)) {
        const std::vector<T> col2 =
            detail::im2col(t.val(input), b, h, w, c, kh, kw, stride_h, stride_w, g);
        gemm_tn(rows, oc, cols, col2.data(), gy.data(), t.mutable_grad(kernel).data(), true);
      }
      if (t.requires_grad(input)) {
        std::vector<T> dcol(static_cast<size_t>(rows) * cols);
        gemm_nt(rows, cols, oc, gy.data(), t.val(kernel).data(), dcol.data(), false);
        detail::col2im_add(dcol, b, h, w, c, kh, kw, stride_h, stride_w, g, t.mutable_grad(input));
      }
    });
  }
  return y;
}

// SAME-style pooling: out = ceil(in / stride); padded cells never win the
// max. Gradient routes to the first (row-major) argmax of each window.
template <typename T>
Var<T> maxpool2d(Tape<T>& tape, Var<T> input, int pool_h = 2, int pool_w = 2, int stride = 2) {
  if (pool_h < 1 || pool_w < 1) throw ParamError("pool size must be >= 1");
  if (stride < 1) throw ParamError("pool stride must be >= 1");
  const std::vector<int>& xs = tape.shape(input);
  if (xs.size() != 4) throw ShapeError("maxpool2d input must be 4-D, got " + shape_str(xs));
  const int b = xs[0], h = xs[1], w = xs[2], c = xs[3];
  const int oh = pool_out_dim(h, stride);
  const int ow = pool_out_dim(w, stride);

  const std::vector<T>& xv = tape.val(input);
  std::vector<T> out(static_cast<size_t>(b) * oh * ow * c);
  std::vector<int64_t> argmax(out.size());
  size_t o = 0;
  for (int bi = 0; bi < b; ++bi) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        for (int ch = 0; ch < c; ++ch, ++o) {
          T best = -std::numeric_limits<T>::infinity();
          int64_t best_idx = -1;
          for (int py = 0; py < pool_h; ++py) {
            const int y = oy * stride + py;
            if (y >= h) break;
            for (int px = 0; px < pool_w; ++px) {
              const int x = ox * stride + px;
              if (x >= w) break;
              const int64_t idx =
                  ((static_cast<int64_t>(bi) * h + y) * w + x) * c + ch;
              const T v = xv[static_cast<size_t>(idx)];
              if (v > best || best_idx < 0) {
                best = v;
                best_idx = idx;
              }
            }
          }
          out[o] = best;
          argmax[o] = best_idx;
        }
      }
    }
  }
  const Var<T> y = tape.make({b, oh, ow, c}, std::move(out), tape.requires_grad(input));
  if (tape.requires_grad(input)) {
    tape.set_backward(y, [input, y, argmax = std::move(argmax)](Tape<T>& t) {
      const std::vector<T>& gy = t.grad(y);
      std::vector<T>& dx = t.mutable_grad(input);
      for (size_t i = 0; i < gy.size(); ++i) dx[static_cast<size_t>(argmax[i])] += gy[i];
    });
  }
  return y;
}

// out = x * w + b with x [batch,m], w [m,n], b [n].
template <typename T>
Var<T> dense(Tape<T>& tape, Var<T> x, Var<T> w, Var<T> b) {
  const std::vector<int>& xs = tape.shape(x);
  const std::vector<int>& ws = tape.shape(w);
  const std::vector<int>& bs = tape.shape(b);
  if (xs.size() != 2 || ws.size() != 2)
    throw ShapeError("dense expects 2-D input and weights, got " + shape_str(xs) + " and " +
                     shape_str(ws));
  if (xs[1] != ws[0])
    throw ShapeError("dense shape mismatch: input " + shape_str(xs) + " vs weights " +
                     shape_str(ws));
  if (bs.size() != 1 || bs[0] != ws[1])
    throw ShapeError("dense bias " + shape_str(bs) + " does not match weights " + shape_str(ws));
  const int batch = xs[0], m = xs[1], n = ws[1];
  std::vector<T> out(static_cast<size_t>(batch) * n);
  gemm_nn(batch, n, m, tape.val(x).data(), tape.val(w).data(), out.data(), false);
  const std::vector<T>& bv = tape.val(b);
  for (int i = 0; i < batch; ++i)
    for (int j = 0; j < n; ++j) out[static_cast<size_t>(i) * n + j] += bv[static_cast<size_t>(j)];

  const bool needs = tape.requires_grad(x) || tape.requires_grad(w) || tape.requires_grad(b);
  const Var<T> y = tape.make({batch, n}, std::move(out), needs);
  if (needs) {
    tape.set_backward(y, [x, w, b, y, batch, m, n](Tape<T>& t) {
      const std::vector<T>& gy = t.grad(y);
      if (t.requires_grad(x))
        gemm_nt(batch, m, n, gy.data(), t.val(w).data(), t.mutable_grad(x).data(), true);
      if (t.requires_grad(w))
        gemm_tn(batch, n, m, t.val(x).data(), gy.data(), t.mutable_grad(w).data(), true);
      if (t.requires_grad(b)) {
        std::vector<T>& db = t.mutable_grad(b);
        for (int i = 0; i < batch; ++i)
          for (int j = 0; j < n; ++j) db[static_cast<size_t>(j)] += gy[static_cast<size_t>(i) * n + j];
      }
    });
  }
  return y;
}

// Broadcasts b over the trailing axis (conv channel bias).
template <typename T>
Var<T> bias_add(Tape<T>& tape, Var<T> x, Var<T> b) {
  const std::vector<int>& xs = tape.shape(x);
  const std::vector<int>& bs = tape.shape(b);
  if (xs.empty() || bs.size() != 1 || xs.back() != bs[0])
    throw ShapeError("bias_add: bias " + shape_str(bs) + " does not match input " + shape_str(xs));
  const int n = bs[0];
  const std::vector<T>& xv = tape.val(x);
  const std::vector<T>& bv = tape.val(b);
  std::vector<T> out(xv.size());
  for (size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] + bv[i % static_cast<size_t>(n)];
  const bool needs = tape.requires_grad(x) || tape.requires_grad(b);
  const Var<T> y = tape.make(xs, std::move(out), needs);
  if (needs) {
    tape.set_backward(y, [x, b, y, n](Tape<T>& t) {
      const std::vector<T>& gy = t.grad(y);
      if (t.requires_grad(x)) {
        std::vector<T>& dx = t.mutable_grad(x);
        for (size_t i = 0; i < gy.size(); ++i) dx[i] += gy[i];
      }
      if (t.requires_grad(b)) {
        std::vector<T>& db = t.mutable_grad(b);
        for (size_t i = 0; i < gy.size(); ++i) db[i % static_cast<size_t>(n)] += gy[i];
      }
    });
  }
  return y;
}

template <typename T>
Var<T> relu(Tape<T>& tape, Var<T> x) {
  return detail::elementwise<T>(
      tape, x, [](T v) { return v > T{} ? v : T{}; },
      [](T v, T) { return v > T{} ? T{1} : T{}; });
}

template <typename T>
Var<T> elu(Tape<T>& tape, Var<T> x, T alpha = T{1}) {
  return detail::elementwise<T>(
      tape, x, [alpha](T v) { return v > T{} ? v : alpha * (std::exp(v) - T{1}); },
      [alpha](T v, T y) { return v > T{} ? T{1} : y + alpha; });
}

template <typename T>
Var<T> sigmoid(Tape<T>& tape, Var<T> x) {
  return detail::elementwise<T>(
      tape, x,
      [](T v) {
        return v >= T{} ? T{1} / (T{1} + std::exp(-v)) : std::exp(v) / (T{1} + std::exp(v));
      },
      [](T, T y) { return y * (T{1} - y); });
}

template <typename T>
Var<T> tanh_act(Tape<T>& tape, Var<T> x) {
  return detail::elementwise<T>(
      tape, x, [](T v) { return std::tanh(v); }, [](T, T y) { return T{1} - y * y; });
}

// Inverted dropout: kept elements are scaled by 1/keep_prob, inference is
// the identity. The mask is a pure function of (seed, element count).
template <typename T>
Var<T> dropout(Tape<T>& tape, Var<T> x, double keep_prob, bool training, uint64_t seed) {
  if (keep_prob <= 0.0 || keep_prob > 1.0) throw ParamError("keep_prob must be in (0, 1]");
  if (!training || keep_prob == 1.0) {
    return detail::elementwise<T>(
        tape, x, [](T v) { return v; }, [](T, T) { return T{1}; });
  }
  Rng rng(seed);
  const std::vector<T>& xv = tape.val(x);
  std::vector<T> mask(xv.size());
  const T scale = static_cast<T>(1.0 / keep_prob);
  for (size_t i = 0; i < mask.size(); ++i)
    mask[i] = rng.uniform() < keep_prob ? scale : T{};
  std::vector<T> out(xv.size());
  for (size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] * mask[i];
  const Var<T> y = tape.make(tape.shape(x), std::move(out), tape.requires_grad(x));
  if (tape.requires_grad(x)) {
    tape.set_backward(y, [x, y, mask = std::move(mask)](Tape<T>& t) {
      const std::vector<T>& gy = t.grad(y);
      std::vector<T>& dx = t.mutable_grad(x);
      for (size_t i = 0; i < gy.size(); ++i) dx[i] += gy[i] * mask[i];
    });
  }
  return y;
}

// Mean cross-entropy over the batch, max-stabilized. Gradient w.r.t. logits
// is (softmax - onehot) / batch.
template <typename T>
Var<T> softmax_cross_entropy(Tape<T>& tape, Var<T> logits, const std::vector<int>& labels) {
  const std::vector<int>& ls = tape.shape(logits);
  if (ls.size() != 2) throw ShapeError("logits must be 2-D, got " + shape_str(ls));
  const int batch = ls[0], classes = ls[1];
  if (static_cast<int>(labels.size()) != batch)
    throw ShapeError("label count does not match batch size");
  for (const int l : labels)
    if (l < 0 || l >= classes) throw ParamError("label " + std::to_string(l) + " out of range");

  const std::vector<T>& z = tape.val(logits);
  std::vector<T> probs(z.size());
  double total = 0.0;
  for (int i = 0; i < batch; ++i) {
    const T* row = z.data() + static_cast<size_t>(i) * classes;
    T* prow = probs.data() + static_cast<size_t>(i) * classes;
    T mx = row[0];
    for (int j = 1; j < classes; ++j) mx = std::max(mx, row[j]);
    T sum{};
    for (int j = 0; j < classes; ++j) {
      prow[j] = std::exp(row[j] - mx);
      sum += prow[j];
    }
    for (int j = 0; j < classes; ++j) prow[j] /= sum;
    total += -(static_cast<double>(row[labels[static_cast<size_t>(i)]]) -
               static_cast<double>(mx) - std::log(static_cast<double>(sum)));
  }
  const T loss = static_cast<T>(total / batch);
  const Var<T> y = tape.make({1}, {loss}, tape.requires_grad(logits));
  if (tape.requires_grad(logits)) {
    tape.set_backward(y, [logits, y, labels, batch, classes, probs = std::move(probs)](Tape<T>& t) {
      const T g = t.grad(y)[0];
      std::vector<T>& dz = t.mutable_grad(logits);
      const T inv_batch = T{1} / static_cast<T>(batch);
      for (int i = 0; i < batch; ++i) {
        const T* prow = probs.data() + static_cast<size_t>(i) * classes;
        T* drow = dz.data() + static_cast<size_t>(i) * classes;
        for (int j = 0; j < classes; ++j) {
          T v = prow[j];
          if (j == labels[static_cast<size_t>(i)]) v -= T{1};
          drow[j] += g * v * inv_batch;
        }
      }
    });
  }
  return y;
}

// Row softmax of a 2-D tensor (no tape participation; argmax/diagnostics).
template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& logits) {
  if (logits.shape.size() != 2) throw ShapeError("softmax_rows expects 2-D logits");
  const int batch = logits.shape[0], classes = logits.shape[1];
  Tensor<T> out(logits.shape);
  for (int i = 0; i < batch; ++i) {
    const T* row = logits.data.data() + static_cast<size_t>(i) * classes;
    T* orow = out.data.data() + static_cast<size_t>(i) * classes;
    T mx = row[0];
    for (int j = 1; j < classes; ++j) mx = std::max(mx, row[j]);
    T sum{};
    for (int j = 0; j < classes; ++j) {
      orow[j] = std::exp(row[j] - mx);
      sum += orow[j];
    }
    for (int j = 0; j < classes; ++j) orow[j] /= sum;
  }
  return out;
}

template <typename T>
Var<T> reshape(Tape<T>& tape, Var<T> x, std::vector<int> new_shape) {
  if (numel_of(new_shape) != numel_of(tape.shape(x)))
    throw ShapeError("reshape from " + shape_str(tape.shape(x)) + " to " + shape_str(new_shape) +
                     " changes the element count");
  const Var<T> y = tape.make(std::move(new_shape), tape.val(x), tape.requires_grad(x));
  if (tape.requires_grad(x)) {
    tape.set_backward(y, [x, y](Tape<T>& t) {
      const std::vector<T>& gy = t.grad(y);
      std::vector<T>& dx = t.mutable_grad(x);
      for (size_t i = 0; i < gy.size(); ++i) dx[i] += gy[i];
    });
  }
  return y;
}

template <typename T>
Var<T> sum(Tape<T>& tape, Var<T> x) {
  const std::vector<T>& xv = tape.val(x);
  T total{};
  for (const T v : xv) total += v;
  const Var<T> y = tape.make({1}, {total}, tape.requires_grad(x));
  if (tape.requires_grad(x)) {
    tape.set_backward(y, [x, y](Tape<T>& t) {
      const T g = t.grad(y)[0];
      std::vector<T>& dx = t.mutable_grad(x);
      for (T& v : dx) v += g;
    });
  }
  return y;
}

template <typename T>
Var<T> add(Tape<T>& tape, Var<T> a, Var<T> b) {
  if (tape.shape(a) != tape.shape(b))
    throw ShapeError("add shape mismatch: " + shape_str(tape.shape(a)) + " vs " +
                     shape_str(tape.shape(b)));
  const std::vector<T>& av = tape.val(a);
  const std::vector<T>& bv = tape.val(b);
  std::vector<T> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  const bool needs = tape.requires_grad(a) || tape.requires_grad(b);
  const Var<T> y = tape.make(tape.shape(a), std::move(out), needs);
  if (needs) {
    tape.set_backward(y, [a, b, y](Tape<T>& t) {
      const std::vector<T>& gy = t.grad(y);
      if (t.requires_grad(a)) {
        std::vector<T>& da = t.mutable_grad(a);
        for (size_t i = 0; i < gy.size(); ++i) da[i] += gy[i];
      }
      if (t.requires_grad(b)) {
        std::vector<T>& db = t.mutable_grad(b);
        for (size_t i = 0; i < gy.size(); ++i) db[i] += gy[i];
      }
    });
  }
  return y;
}

template <typename T>
Var<T> mul(Tape<T>& tape, Var<T> a, Var<T> b) {
  if (tape.shape(a) != tape.shape(b))
    throw ShapeError("mul shape mismatch: " + shape_str(tape.shape(a)) + " vs " +
                     shape_str(tape.shape(b)));
  const std::vector<T>& av = tape.val(a);
  const std::vector<T>& bv = tape.val(b);
  std::vector<T> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  const bool needs = tape.requires_grad(a) || tape.requires_grad(b);
  const Var<T> y = tape.make(tape.shape(a), std::move(out), needs);
  if (needs) {
    tape.set_backward(y, [a, b, y](Tape<T>& t) {
      const std::vector<T>& gy = t.grad(y);
      if (t.requires_grad(a)) {
        std::vector<T>& da = t.mutable_grad(a);
        const std::vector<T>& bvv = t.val(b);
        for (size_t i = 0; i < gy.size(); ++i) da[i] += gy[i] * bvv[i];
      }
      if (t.requires_grad(b)) {
        std::vector<T>& db = t.mutable_grad(b);
        const std::vector<T>& avv = t.val(a);
        for (size_t i = 0; i < gy.size(); ++i) db[i] += gy[i] * avv[i];
      }
    });
  }
  return y;
}

}  // namespace kws
