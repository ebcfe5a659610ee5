#pragma once

#include <complex>
#include <vector>

namespace kws {

// In-place iterative radix-2 transform; n must be a power of two. The
// inverse includes the 1/n factor.
void fft_radix2(std::vector<std::complex<double>>& a, bool inverse);

// Exact N-point DFT for arbitrary N. Power-of-two sizes go straight through
// radix-2; everything else uses Bluestein's chirp-z reduction. Precomputed
// tables live in the plan, so reuse one plan per frame length.
class DftPlan {
 public:
  explicit DftPlan(int n);

  int size() const { return n_; }

  std::vector<std::complex<double>> transform(const std::vector<double>& frame) const;

  // Magnitudes of bins 0..N/2 (real input spectrum is conjugate-symmetric).
  std::vector<double> magnitudes(const std::vector<double>& frame) const;

 private:
  int n_ = 0;
  bool pow2_ = false;
  int m_ = 0;                                    // Bluestein convolution length
  std::vector<std::complex<double>> chirp_;      // exp(-i pi k^2 / n)
  std::vector<std::complex<double>> chirp_fft_;  // FFT of the chirp filter
};

}  // namespace kws
