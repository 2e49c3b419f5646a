#include "popmc/kernels.hpp"

namespace popmc::kernels {
namespace {

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void matmul_scalar(const double* a, const double* b, double* c, std::size_t n) {
  for (std::size_t i = 0; i < n * n; ++i) c[i] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a[i * n + k];
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) c[i * n + j] += aik * b[k * n + j];
    }
  }
}

void power_sums_scalar(const double* w, const double* z, std::size_t n, int kmax, double* out) {
  for (int k = 0; k <= kmax; ++k) out[k] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double p = w[i];
    for (int k = 0; k <= kmax; ++k) {
      out[k] += p;
      p *= z[i];
    }
  }
}

void csr_spmv_scalar(const std::int64_t* row_ptr, const std::int32_t* cols, const double* vals,
                     const double* x, double* y, std::size_t rows) {
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += vals[k] * x[cols[k]];
    y[r] = s;
  }
}

}  // namespace

const KernelTable& scalar() {
  static const KernelTable table{"scalar", axpy_scalar, dot_scalar, matmul_scalar,
                                 power_sums_scalar, csr_spmv_scalar};
  return table;
}

}  // namespace popmc::kernels
