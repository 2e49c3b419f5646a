#include "popmc/process.hpp"

#include <cmath>

#include "popmc/diagnostics.hpp"

namespace popmc {

double clamp_rate(double value, const std::string& name) {
  if (std::isnan(value)) return 0.0;
  if (value < 0.0) {
    if (value < -1e-12) warn("negative rate clamped to 0 in transition '" + name + "'");
    return 0.0;
  }
  return value;
}

bool PopulationProcess::polynomial() const {
  for (const auto& t : transitions) {
    if (!t.count_poly) return false;
  }
  return true;
}

int PopulationProcess::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return static_cast<int>(i);
  }
  return -1;
}

double PopulationProcess::rate(std::size_t k, std::span<const double> counts) const {
  const auto& t = transitions[k];
  for (const auto& [var, need] : t.guard) {
    if (counts[static_cast<std::size_t>(var)] < need - 1e-9) return 0.0;
  }
  return clamp_rate(t.count_rate(counts), t.name);
}

double PopulationProcess::density(std::size_t k, std::span<const double> x) const {
  const auto& t = transitions[k];
  return clamp_rate(t.density_rate(x), t.name);
}

Eigen::VectorXd PopulationProcess::drift(std::span<const double> x) const {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim()));
  for (std::size_t k = 0; k < transitions.size(); ++k) {
    const double r = density(k, x);
    if (r == 0.0) continue;
    const auto& v = transitions[k].update;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] != 0) f[static_cast<Eigen::Index>(i)] += v[i] * r;
    }
  }
  return f;
}

Eigen::MatrixXd PopulationProcess::diffusion(std::span<const double> x) const {
  const auto n = static_cast<Eigen::Index>(dim());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < transitions.size(); ++k) {
    const double r = density(k, x);
    if (r == 0.0) continue;
    const auto& v = transitions[k].update;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (v[static_cast<std::size_t>(i)] == 0) continue;
      for (Eigen::Index j = 0; j < n; ++j) {
        d(i, j) += v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(j)] * r;
      }
    }
  }
  return d;
}

void PopulationProcess::finalize() {
  for (auto& t : transitions) {
    t.density_grad.clear();
    if (!t.density_poly) continue;
    for (std::size_t i = 0; i < dim(); ++i) t.density_grad.push_back(t.density_poly->derivative(i));
  }
}

Eigen::MatrixXd PopulationProcess::jacobian(std::span<const double> x) const {
  for (const auto& t : transitions) {
    if (!t.density_poly) return jacobian_fd(x);
  }
  const auto n = static_cast<Eigen::Index>(dim());
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < transitions.size(); ++k) {
    const auto& t = transitions[k];
    // Clamped rates have zero derivative where the raw value is negative.
    if (t.density_rate(x) < 0.0) continue;
    for (Eigen::Index c = 0; c < n; ++c) {
      const auto ci = static_cast<std::size_t>(c);
      const double g = ci < t.density_grad.size() ? t.density_grad[ci].evaluate(x)
                                                  : t.density_poly->derivative(ci).evaluate(x);
      if (g == 0.0) continue;
      for (Eigen::Index r = 0; r < n; ++r) j(r, c) += t.update[static_cast<std::size_t>(r)] * g;
    }
  }
  return j;
}

Eigen::MatrixXd PopulationProcess::jacobian_fd(std::span<const double> x) const {
  const auto n = static_cast<Eigen::Index>(dim());
  Eigen::MatrixXd j(n, n);
  std::vector<double> xp(x.begin(), x.end());
  for (Eigen::Index c = 0; c < n; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    const double h = 1e-6 * std::max(1.0, std::abs(x[ci]));
    xp[ci] = x[ci] + h;
    const Eigen::VectorXd fp = drift(xp);
    xp[ci] = x[ci] - h;
    const Eigen::VectorXd fm = drift(xp);
    xp[ci] = x[ci];
    j.col(c) = (fp - fm) / (2.0 * h);
  }
  return j;
}

Eigen::VectorXd PopulationProcess::initial_density() const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < dim(); ++i) x[static_cast<Eigen::Index>(i)] = initial[i] / N;
  return x;
}

}  // namespace popmc
