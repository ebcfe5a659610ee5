#include "kws/fft.hpp"

#include <cmath>
#include <cstdint>

#include "kws/error.hpp"
#include "kws/rng.hpp"

namespace kws {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

int next_pow2(int n) {
  int m = 1;
  while (m < n) m <<= 1;
  return m;
}

// exp(-i pi k^2 / n) with the k^2 reduced mod 2n in integer arithmetic, so
// the phase stays accurate for large k.
std::complex<double> chirp_factor(int64_t k, int64_t n) {
  const int64_t r = (k * k) % (2 * n);
  const double phase = -kPi * static_cast<double>(r) / static_cast<double>(n);
  return {std::cos(phase), std::sin(phase)};
}

}  // namespace

void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  if (!is_pow2(static_cast<int>(n))) throw ParamError("fft_radix2 size must be a power of two");
  // bit-reversal permutation
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double angle = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
    const std::complex<double> step(std::cos(angle), std::sin(angle));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= step;
      }
    }
  }
  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= inv_n;
  }
}

DftPlan::DftPlan(int n) : n_(n) {
  if (n < 1) throw ParamError("DFT size must be >= 1");
  pow2_ = is_pow2(n);
  if (pow2_) return;
  m_ = next_pow2(2 * n - 1);
  chirp_.resize(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) chirp_[static_cast<size_t>(k)] = chirp_factor(k, n);
  std::vector<std::complex<double>> b(static_cast<size_t>(m_), {0.0, 0.0});
  for (int k = 0; k < n; ++k) {
    const std::complex<double> v = std::conj(chirp_[static_cast<size_t>(k)]);
    b[static_cast<size_t>(k)] = v;
    if (k > 0) b[static_cast<size_t>(m_ - k)] = v;
  }
  fft_radix2(b, false);
  chirp_fft_ = std::move(b);
}

std::vector<std::complex<double>> DftPlan::transform(const std::vector<double>& frame) const {
  if (static_cast<int>(frame.size()) != n_)
    throw ParamError("frame length does not match DFT plan size");
  if (n_ == 1) return {std::complex<double>(frame[0], 0.0)};
  if (pow2_) {
    std::vector<std::complex<double>> a(frame.begin(), frame.end());
    fft_radix2(a, false);
    return a;
  }
  // Bluestein: X_k = c_k * (x c) (*) conj-chirp, via the length-m FFT pair.
  std::vector<std::complex<double>> a(static_cast<size_t>(m_), {0.0, 0.0});
  for (int k = 0; k < n_; ++k)
    a[static_cast<size_t>(k)] = frame[static_cast<size_t>(k)] * chirp_[static_cast<size_t>(k)];
  fft_radix2(a, false);
  for (int k = 0; k < m_; ++k) a[static_cast<size_t>(k)] *= chirp_fft_[static_cast<size_t>(k)];
  fft_radix2(a, true);
  std::vector<std::complex<double>> out(static_cast<size_t>(n_));
  for (int k = 0; k < n_; ++k)
    out[static_cast<size_t>(k)] = a[static_cast<size_t>(k)] * chirp_[static_cast<size_t>(k)];
  return out;
}

std::vector<double> DftPlan::magnitudes(const std::vector<double>& frame) const {
  const std::vector<std::complex<double>> spectrum = transform(frame);
  std::vector<double> mags(static_cast<size_t>(n_ / 2 + 1));
  for (size_t k = 0; k < mags.size(); ++k) mags[k] = std::abs(spectrum[k]);
  return mags;
}

}  // namespace kws
