#pragma once
// Data-parallel inner loops shared by the ODE, Kolmogorov, quadrature and
// uniformization code. Every kernel has a scalar reference implementation;
// an AVX2/FMA variant is selected at runtime when the CPU supports it.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace popmc::kernels {

struct KernelTable {
  std::string_view name;

  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // C = A * B, all n x n row-major.
  void (*matmul)(const double* a, const double* b, double* c, std::size_t n);
  // out[k] = sum_i w[i] * z[i]^k for k = 0..kmax
  void (*power_sums)(const double* w, const double* z, std::size_t n, int kmax, double* out);
  // y = A x with A in CSR form
  void (*csr_spmv)(const std::int64_t* row_ptr, const std::int32_t* cols, const double* vals,
                   const double* x, double* y, std::size_t rows);
};

const KernelTable& scalar();
// nullptr when the variant was not compiled in or the CPU lacks AVX2+FMA.
const KernelTable* avx2();

// Table picked at first use. Setting POPMC_FORCE_SCALAR=1 pins the scalar path.
const KernelTable& active();

}  // namespace popmc::kernels
