#pragma once

#include <cstring>

namespace kws {

// Small row-major matrix kernels. Loop orders keep the innermost axis at
// unit stride so the compiler can vectorize; accumulation order is fixed, so
// results are deterministic.

// C[M,N] = (accumulate ? C : 0) + A[M,K] * B[K,N]
template <typename T>
void gemm_nn(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate) {
  if (!accumulate) std::memset(c, 0, sizeof(T) * static_cast<size_t>(m) * n);
  for (int i = 0; i < m; ++i) {
    const T* arow = a + static_cast<size_t>(i) * k;
    T* crow = c + static_cast<size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const T aip = arow[p];
      if (aip == T{}) continue;
      const T* brow = b + static_cast<size_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
}

// C[M,N] = (accumulate ? C : 0) + A[M,K] * B[N,K]^T
template <typename T>
void gemm_nt(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate) {
  for (int i = 0; i < m; ++i) {
    const T* arow = a + static_cast<size_t>(i) * k;
    T* crow = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const T* brow = b + static_cast<size_t>(j) * k;
      T sum{};
      for (int p = 0; p < k; ++p) sum += arow[p] * brow[p];
      crow[j] = accumulate ? crow[j] + sum : sum;
    }
  }
}

// C[K,N] = (accumulate ? C : 0) + A[M,K]^T * B[M,N]
template <typename T>
void gemm_tn(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate) {
  if (!accumulate) std::memset(c, 0, sizeof(T) * static_cast<size_t>(k) * n);
  for (int i = 0; i < m; ++i) {
    const T* arow = a + static_cast<size_t>(i) * k;
    const T* brow = b + static_cast<size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const T aip = arow[p];
      if (aip == T{}) continue;
      T* crow = c + static_cast<size_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
}

}  // namespace kws
