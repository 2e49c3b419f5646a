#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "popmc/kernels.hpp"

using namespace popmc::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("scalar kernels against naive loops") {
  const auto& k = scalar();
  std::mt19937_64 rng(1);
  const auto x = random_vec(37, rng), y0 = random_vec(37, rng);
  auto y = y0;
  k.axpy(0.5, x.data(), y.data(), x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(y[i] == doctest::Approx(y0[i] + 0.5 * x[i]).epsilon(1e-15));
    d += x[i] * y0[i];
  }
  CHECK(k.dot(x.data(), y0.data(), x.size()) == doctest::Approx(d).epsilon(1e-14));

  std::vector<double> out(4);
  const std::vector<double> w = {1.0, 2.0}, z = {0.5, -1.0};
  k.power_sums(w.data(), z.data(), 2, 3, out.data());
  CHECK(out[0] == doctest::Approx(3.0));
  CHECK(out[1] == doctest::Approx(-1.5));
  CHECK(out[2] == doctest::Approx(2.25));
  CHECK(out[3] == doctest::Approx(-1.875));
}

TEST_CASE("avx2 kernels match the scalar reference") {
  const KernelTable* v = avx2();
  if (v == nullptr) {
    MESSAGE("AVX2 variant unavailable on this CPU; only the scalar path is exercised");
    return;
  }
  const auto& s = scalar();
  std::mt19937_64 rng(2);
  for (std::size_t n : {1u, 3u, 4u, 7u, 8u, 33u, 200u}) {
    const auto x = random_vec(n, rng), y0 = random_vec(n, rng);
    auto ys = y0, yv = y0;
    s.axpy(-1.3, x.data(), ys.data(), n);
    v->axpy(-1.3, x.data(), yv.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(rel(yv[i], ys[i]) < 1e-14);
    CHECK(rel(v->dot(x.data(), y0.data(), n), s.dot(x.data(), y0.data(), n)) < 1e-12);

    const auto a = random_vec(n * n, rng), b = random_vec(n * n, rng);
    std::vector<double> cs(n * n), cv(n * n);
    s.matmul(a.data(), b.data(), cs.data(), n);
    v->matmul(a.data(), b.data(), cv.data(), n);
    for (std::size_t i = 0; i < n * n; ++i) CHECK(rel(cv[i], cs[i]) < 1e-12);

    const auto w = random_vec(n, rng, 0.0, 1.0), z = random_vec(n, rng);
    std::vector<double> ps(9), pv(9);
    s.power_sums(w.data(), z.data(), n, 8, ps.data());
    v->power_sums(w.data(), z.data(), n, 8, pv.data());
    for (int k = 0; k <= 8; ++k) CHECK(rel(pv[k], ps[k]) < 1e-12);
  }
}

TEST_CASE("csr product agrees across variants and with dense multiplication") {
  std::mt19937_64 rng(3);
  const std::size_t n = 50;
  std::vector<std::int64_t> rp = {0};
  std::vector<std::int32_t> cols;
  std::vector<double> vals;
  std::vector<double> dense(n * n, 0.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (u(rng) < 0.2) {
        cols.push_back(static_cast<std::int32_t>(j));
        vals.push_back(u(rng));
        dense[i * n + j] = vals.back();
      }
    }
    rp.push_back(static_cast<std::int64_t>(cols.size()));
  }
  const auto x = random_vec(n, rng);
  std::vector<double> ys(n), yv(n);
  scalar().csr_spmv(rp.data(), cols.data(), vals.data(), x.data(), ys.data(), n);
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < n; ++j) r += dense[i * n + j] * x[j];
    CHECK(ys[i] == doctest::Approx(r).epsilon(1e-13));
  }
  if (const KernelTable* v = avx2()) {
    v->csr_spmv(rp.data(), cols.data(), vals.data(), x.data(), yv.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(rel(yv[i], ys[i]) < 1e-13);
  }
  CHECK(!active().name.empty());
}
