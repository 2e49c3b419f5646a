#include "popmc/maxent.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "popmc/kernels.hpp"

namespace popmc {

void gauss_legendre(std::size_t n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / static_cast<double>(j);
      }
      pp = static_cast<double>(n) * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
}

namespace {

struct Quad {
  std::vector<double> z, w;
};

Quad make_quad(double lo, double hi, std::size_t n) {
  Quad q;
  gauss_legendre(n, q.z, q.w);
  const double h = 0.5 * (hi - lo), c = 0.5 * (hi + lo);
  for (std::size_t i = 0; i < n; ++i) {
    q.z[i] = c + h * q.z[i];
    q.w[i] *= h;
  }
  return q;
}

double exponent(const std::vector<double>& lambda, double z) {
  double acc = 0.0, zk = 1.0;
  for (double l : lambda) {
    zk *= z;
    acc += l * zk;
  }
  return -acc;
}

// Unnormalized weighted moments sum_i w_i e^{-poly(z_i) - shift} z_i^k.
std::vector<double> weighted_moments(const std::vector<double>& lambda, const Quad& q, int kmax, double& shift) {
  std::vector<double> e(q.z.size());
  shift = -INFINITY;
  for (std::size_t i = 0; i < q.z.size(); ++i) {
    e[i] = exponent(lambda, q.z[i]);
    shift = std::max(shift, e[i]);
  }
  for (std::size_t i = 0; i < q.z.size(); ++i) e[i] = q.w[i] * std::exp(e[i] - shift);
  std::vector<double> out(static_cast<std::size_t>(kmax) + 1);
  kernels::active().power_sums(e.data(), q.z.data(), q.z.size(), kmax, out.data());
  return out;
}

double dual(const std::vector<double>& lambda, const std::vector<double>& nu, const Quad& q) {
  double shift = 0.0;
  const auto m = weighted_moments(lambda, q, 0, shift);
  double v = std::log(m[0]) + shift;
  for (std::size_t k = 0; k < lambda.size(); ++k) v += lambda[k] * nu[k];
  return v;
}

}  // namespace

double maxent_dual(const std::vector<double>& lambda, const std::vector<double>& z_moments, double zlo, double zhi,
                   std::size_t nodes) {
  return dual(lambda, z_moments, make_quad(zlo, zhi, nodes));
}

double MaxEntDensity::density(double x) const {
  const double z = (x - shift) / scale;
  if (z < zlo || z > zhi) return 0.0;
  return std::exp(exponent(lambda, z) - log_z) / scale;
}

std::vector<double> MaxEntDensity::moments_z(int kmax) const {
  double sh = 0.0;
  const auto m = weighted_moments(lambda, make_quad(zlo, zhi, nodes), kmax, sh);
  std::vector<double> out(m.size());
  for (std::size_t k = 0; k < m.size(); ++k) out[k] = m[k] / m[0];
  return out;
}

MaxEntDensity reconstruct(const MomentConstraints& c) {
  const int m = c.order();
  if (m < 1) throw Error("max-entropy needs at least one moment");
  if (!(c.lo < c.hi)) throw Error("max-entropy support is empty");
  const double mean = c.raw[0];
  double sigma = 0.25 * (c.hi - c.lo);
  if (m >= 2) {
    const double var = c.raw[1] - mean * mean;
    if (var < -1e-12 * std::max(1.0, c.raw[1])) throw Error("infeasible moments: negative variance");
    if (var <= 0.0) throw Error("infeasible moments: zero variance");
    sigma = std::sqrt(var);
  }
  // Standardized raw moments nu_k = E[((x - mean)/sigma)^k].
  std::vector<double> nu(static_cast<std::size_t>(m));
  for (int k = 1; k <= m; ++k) {
    double acc = 0.0;
    double binom = 1.0;
    for (int j = 0; j <= k; ++j) {
      const double raw_j = j == 0 ? 1.0 : c.raw[static_cast<std::size_t>(j - 1)];
      acc += binom * raw_j * std::pow(-mean, k - j);
      binom = binom * (k - j) / (j + 1);
    }
    nu[static_cast<std::size_t>(k - 1)] = acc / std::pow(sigma, k);
  }
  MaxEntDensity d;
  d.shift = mean;
  d.scale = sigma;
  d.zlo = (c.lo - mean) / sigma;
  d.zhi = (c.hi - mean) / sigma;
  if (mean < c.lo || mean > c.hi) throw Error("infeasible moments: mean outside support");

  std::vector<double> lambda(static_cast<std::size_t>(m), 0.0);
  if (m >= 2) lambda[1] = 0.5;
  std::vector<double> prev_probe;
  for (std::size_t nodes = 200; nodes <= 6400; nodes *= 2) {
    const Quad q = make_quad(d.zlo, d.zhi, nodes);
    int it = 0;
    bool converged = false;
    for (; it < 200; ++it) {
      double sh = 0.0;
      const auto w = weighted_moments(lambda, q, 2 * m, sh);
      Eigen::VectorXd g(m);
      Eigen::MatrixXd H(m, m);
      for (int k = 0; k < m; ++k) g[k] = nu[static_cast<std::size_t>(k)] - w[static_cast<std::size_t>(k + 1)] / w[0];
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
          H(a, b) = w[static_cast<std::size_t>(a + b + 2)] / w[0] -
                    (w[static_cast<std::size_t>(a + 1)] / w[0]) * (w[static_cast<std::size_t>(b + 1)] / w[0]);
        }
      }
      if (!g.allFinite() || !H.allFinite()) break;
      if (g.norm() <= 1e-8) {
        converged = true;
        break;
      }
      Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
      Eigen::VectorXd step = -ldlt.solve(g);
      if (ldlt.info() != Eigen::Success || !step.allFinite()) step = -g;
      const double f0 = dual(lambda, nu, q);
      const double slope = g.dot(step);
      double t = 1.0;
      std::vector<double> trial(lambda);
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls) {
        for (int k = 0; k < m; ++k) trial[static_cast<std::size_t>(k)] = lambda[static_cast<std::size_t>(k)] + t * step[k];
        const double f1 = dual(trial, nu, q);
        if (std::isfinite(f1) && f1 <= f0 + 1e-4 * t * slope) {
          moved = true;
          break;
        }
        t *= 0.5;
      }
      if (!moved) {
        // Flat objective at round-off level: accept if the gradient is small.
        if (g.norm() <= 1e-6) converged = true;
        break;
      }
      lambda = trial;
    }
    if (!converged) throw MaxEntError("max-entropy optimization did not converge");
    d.lambda = lambda;
    d.nodes = nodes;
    d.iterations += it;
    double sh = 0.0;
    d.log_z = std::log(weighted_moments(lambda, q, 0, sh)[0]) + sh;
    // Node doubling: stop once probabilities on a fixed probe set settle.
    std::vector<double> probe;
    for (int k = -3; k <= 3; ++k) probe.push_back(interval_prob(d, -INFINITY, mean + k * sigma));
    if (!prev_probe.empty()) {
      double diff = 0.0;
      for (std::size_t i = 0; i < probe.size(); ++i) diff = std::max(diff, std::abs(probe[i] - prev_probe[i]));
      if (diff < 1e-8) break;
    }
    prev_probe = probe;
  }
  return d;
}

double interval_prob(const MaxEntDensity& d, double lo, double hi) {
  double a = std::max((lo - d.shift) / d.scale, d.zlo);
  double b = std::min((hi - d.shift) / d.scale, d.zhi);
  if (!(b > a)) return 0.0;
  const Quad q = make_quad(a, b, d.nodes);
  double acc = 0.0;
  for (std::size_t i = 0; i < q.z.size(); ++i) acc += q.w[i] * std::exp(exponent(d.lambda, q.z[i]) - d.log_z);
  return std::clamp(acc, 0.0, 1.0);
}

}  // namespace popmc
