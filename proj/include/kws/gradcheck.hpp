#pragma once

#include <functional>

#include "kws/tape.hpp"

namespace kws {

// Central finite differences against the tape's analytic gradient. Returns
// the max over coordinates of |analytic - numeric| / max(1e-8, |analytic| +
// |numeric|). The numeric side only ever evaluates f, so it is independent
// of the backward pass it checks.
template <typename T>
double finite_diff_check(const std::function<Var<T>(Tape<T>&, Var<T>)>& f, const Tensor<T>& x,
                         T eps = static_cast<T>(1e-5)) {
  std::vector<T> analytic;
  {
    Tape<T> tape;
    const Var<T> in = tape.input(x, true);
    const Var<T> loss = f(tape, in);
    if (tape.val(loss).size() != 1) throw Error("finite_diff_check requires a scalar function");
    tape.backward(loss);
    analytic = tape.grad(in);
  }

  const auto eval = [&](const Tensor<T>& point) {
    Tape<T> tape;
    const Var<T> in = tape.input(point, false);
    return static_cast<double>(tape.val(f(tape, in))[0]);
  };

  double max_rel = 0.0;
  Tensor<T> probe = x;
  for (size_t i = 0; i < probe.data.size(); ++i) {
    const T saved = probe.data[i];
    probe.data[i] = saved + eps;
    const double hi = eval(probe);
    probe.data[i] = saved - eps;
    const double lo = eval(probe);
    probe.data[i] = saved;
    const double numeric = (hi - lo) / (2.0 * static_cast<double>(eps));
    const double a = static_cast<double>(analytic[i]);
    const double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace kws
