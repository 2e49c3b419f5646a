#include <immintrin.h>

#include <array>

#include "popmc/kernels.hpp"

namespace popmc::kernels::detail {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void matmul_avx2(const double* a, const double* b, double* c, std::size_t n) {
  for (std::size_t i = 0; i < n * n; ++i) c[i] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double* ci = c + i * n;
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a[i * n + k];
      if (aik == 0.0) continue;
      const double* bk = b + k * n;
      const __m256d va = _mm256_set1_pd(aik);
      std::size_t j = 0;
      for (; j + 4 <= n; j += 4)
        _mm256_storeu_pd(ci + j, _mm256_fmadd_pd(va, _mm256_loadu_pd(bk + j), _mm256_loadu_pd(ci + j)));
      for (; j < n; ++j) ci[j] += aik * bk[j];
    }
  }
}

constexpr int kMaxPower = 31;

void power_sums_avx2(const double* w, const double* z, std::size_t n, int kmax, double* out) {
  if (kmax > kMaxPower) {
    // Fall back to plain loops; never hit by the library (moment orders are small).
    for (int k = 0; k <= kmax; ++k) out[k] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double p = w[i];
      for (int k = 0; k <= kmax; ++k) {
        out[k] += p;
        p *= z[i];
      }
    }
    return;
  }
  __m256d acc[kMaxPower + 1];
  for (int k = 0; k <= kmax; ++k) acc[k] = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d p = _mm256_loadu_pd(w + i);
    const __m256d vz = _mm256_loadu_pd(z + i);
    for (int k = 0; k <= kmax; ++k) {
      acc[k] = _mm256_add_pd(acc[k], p);
      p = _mm256_mul_pd(p, vz);
    }
  }
  for (int k = 0; k <= kmax; ++k) out[k] = hsum(acc[k]);
  for (; i < n; ++i) {
    double p = w[i];
    for (int k = 0; k <= kmax; ++k) {
      out[k] += p;
      p *= z[i];
    }
  }
}

void csr_spmv_avx2(const std::int64_t* row_ptr, const std::int32_t* cols, const double* vals,
                   const double* x, double* y, std::size_t rows) {
  for (std::size_t r = 0; r < rows; ++r) {
    std::int64_t k = row_ptr[r];
    const std::int64_t end = row_ptr[r + 1];
    __m256d acc = _mm256_setzero_pd();
    for (; k + 4 <= end; k += 4) {
      const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(cols + k));
      const __m256d xv = _mm256_i32gather_pd(x, idx, 8);
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(vals + k), xv, acc);
    }
    double s = hsum(acc);
    for (; k < end; ++k) s += vals[k] * x[cols[k]];
    y[r] = s;
  }
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{"avx2", axpy_avx2, dot_avx2, matmul_avx2, power_sums_avx2,
                                 csr_spmv_avx2};
  return table;
}

}  // namespace popmc::kernels::detail
