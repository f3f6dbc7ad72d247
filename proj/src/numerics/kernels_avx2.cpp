// Compiled with -mavx2 -mfma. Keep this file free of includes that define inline
// functions shared with other translation units.
#include <immintrin.h>

#include <cmath>

#include "disent/numerics/kernels.hpp"

namespace disent::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// ci[0..n) += a * bp[0..n)
inline void axpy_row(double a, const double* bp, double* ci, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    __m256d c0 = _mm256_loadu_pd(ci + j);
    __m256d c1 = _mm256_loadu_pd(ci + j + 4);
    c0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bp + j), c0);
    c1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bp + j + 4), c1);
    _mm256_storeu_pd(ci + j, c0);
    _mm256_storeu_pd(ci + j + 4, c1);
  }
  for (; j + 4 <= n; j += 4) {
    _mm256_storeu_pd(ci + j,
                     _mm256_fmadd_pd(av, _mm256_loadu_pd(bp + j), _mm256_loadu_pd(ci + j)));
  }
  for (; j < n; ++j) ci[j] = std::fma(a, bp[j], ci[j]);
}

void gemm_nn_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                 double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    for (std::size_t p = 0; p < k; ++p) axpy_row(a[i * k + p], b + p * n, ci, n);
  }
}

void gemm_tn_acc(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                 double* c) {
  for (std::size_t p = 0; p < k; ++p) {
    const double* ap = a + p * m;
    const double* bp = b + p * n;
    for (std::size_t i = 0; i < m; ++i) axpy_row(ap[i], bp, c + i * n, n);
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double s = hsum(acc);
  for (; i < n; ++i) s = std::fma(a[i], b[i], s);
  return s;
}

double sum_abs_diff(const double* a, const double* b, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign, d));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

void momentum_update(double* w, double* v, const double* g, std::size_t n, double lr, double mu) {
  const __m256d muv = _mm256_set1_pd(mu);
  const __m256d nlr = _mm256_set1_pd(-lr);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vi = _mm256_fmadd_pd(muv, _mm256_loadu_pd(v + i), _mm256_loadu_pd(g + i));
    _mm256_storeu_pd(v + i, vi);
    _mm256_storeu_pd(w + i, _mm256_fmadd_pd(nlr, vi, _mm256_loadu_pd(w + i)));
  }
  for (; i < n; ++i) {
    v[i] = std::fma(mu, v[i], g[i]);
    w[i] = std::fma(-lr, v[i], w[i]);
  }
}

}  // namespace

namespace detail {
const KernelTable& avx2_table() noexcept {
  static const KernelTable table{Isa::avx2, gemm_nn_acc, gemm_tn_acc, dot, sum_abs_diff,
                                 momentum_update};
  return table;
}
}  // namespace detail

}  // namespace disent::kernels
