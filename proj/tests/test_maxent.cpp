#include <cmath>
#include <random>

#include "doctest.h"
#include "popmc/maxent.hpp"

using namespace popmc;

namespace {

double phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("gauss-legendre integrates polynomials exactly") {
  std::vector<double> x, w;
  gauss_legendre(20, x, w);
  double s0 = 0.0, s6 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s0 += w[i];
    s6 += w[i] * std::pow(x[i], 6);
  }
  CHECK(s0 == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s6 == doctest::Approx(2.0 / 7.0).epsilon(1e-13));
}

TEST_CASE("two moments give the standard normal") {
  const auto d = reconstruct({{0.0, 1.0}, -12.0, 12.0});
  for (auto [a, b] : std::vector<std::pair<double, double>>{{-1, 1}, {-3, -0.2}, {0.5, 2.5}, {-12, 0}}) {
    CHECK(std::abs(interval_prob(d, a, b) - (phi(b) - phi(a))) <= 1e-4);
  }
  CHECK(d.density(0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-4));
}

TEST_CASE("four normal moments recover the same density") {
  const auto d = reconstruct({{0.0, 1.0, 0.0, 3.0}, -12.0, 12.0});
  for (auto [a, b] : std::vector<std::pair<double, double>>{{-1, 1}, {-2, 0.7}, {1.5, 12}}) {
    CHECK(std::abs(interval_prob(d, a, b) - (phi(b) - phi(a))) <= 1e-3);
  }
}

TEST_CASE("negative variance is infeasible") {
  CHECK_THROWS_AS(reconstruct({{2.0, 3.0}, 0.0, 10.0}), Error);
}

TEST_CASE("interval probabilities") {
  const auto d = reconstruct({{3.0, 10.5, 40.0}, 0.0, 10.0});
  CHECK(interval_prob(d, 0.0, 10.0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(interval_prob(d, -INFINITY, INFINITY) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(interval_prob(d, 11.0, 20.0) == 0.0);
  CHECK(interval_prob(d, 0.0, 4.2) + interval_prob(d, 4.2, 10.0) == doctest::Approx(1.0).epsilon(1e-8));
  const auto m = d.moments_z(2);
  CHECK(m[0] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("the dual objective is convex") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g(0.0, 0.5);
  const std::vector<double> mu = {0.1, 1.2, 0.3, 3.5};
  for (int i = 0; i < 100; ++i) {
    std::vector<double> a(4), b(4), mid(4);
    for (std::size_t k = 0; k < 4; ++k) {
      a[k] = g(rng);
      b[k] = g(rng);
      mid[k] = 0.5 * (a[k] + b[k]);
    }
    a[3] = std::abs(a[3]);
    b[3] = std::abs(b[3]);
    mid[3] = 0.5 * (a[3] + b[3]);
    const double fa = maxent_dual(a, mu, -4.0, 4.0), fb = maxent_dual(b, mu, -4.0, 4.0);
    CHECK(maxent_dual(mid, mu, -4.0, 4.0) <= 0.5 * (fa + fb) + 1e-10);
  }
}
