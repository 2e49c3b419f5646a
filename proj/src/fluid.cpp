#include "popmc/fluid.hpp"

#include <cmath>

#include "popmc/error.hpp"

namespace popmc {

namespace {

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

OdeSystem fluid_system(const PopulationProcess& p) {
  OdeSystem sys;
  sys.dim = p.dim();
  sys.labels = p.labels;
  sys.rhs = [&p](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy = p.drift(as_span(y)); };
  return sys;
}

void check_chain(std::size_t procs, const std::vector<double>& bounds) {
  if (procs == 0 || bounds.size() != procs + 1) throw Error("chain: need one more bound than processes");
}

}  // namespace

OdeSolution fluid_solve(const PopulationProcess& p, double T, const Eigen::VectorXd& phi0, const OdeConfig& cfg) {
  return integrate(fluid_system(p), 0.0, T, phi0, cfg);
}

OdeSolution fluid_solve(const PopulationModel& m, double T, const OdeConfig& cfg) {
  const PopulationProcess p = m.to_process();
  return fluid_solve(p, T, p.initial_density(), cfg);
}

OdeSolution fluid_chain(const std::vector<const PopulationProcess*>& procs, const std::vector<double>& bounds,
                        const Eigen::VectorXd& phi0, const OdeConfig& cfg) {
  check_chain(procs.size(), bounds);
  OdeSolution out;
  Eigen::VectorXd y = phi0;
  for (std::size_t j = 0; j < procs.size(); ++j) {
    OdeSolution s = integrate(fluid_system(*procs[j]), bounds[j], bounds[j + 1], y, cfg);
    y = s.final_state();
    if (j == 0) out = std::move(s);
    else out.append(s);
  }
  return out;
}

ClaInit ClaInit::deterministic(const Eigen::VectorXd& phi) {
  const auto n = phi.size();
  return {phi, Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n)};
}

Eigen::VectorXd ClaSolution::phi(double t) const { return sol_(t).head(static_cast<Eigen::Index>(n_)); }

Eigen::VectorXd ClaSolution::e(double t) const {
  return sol_(t).segment(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
}

Eigen::MatrixXd ClaSolution::c(double t) const {
  const auto n = static_cast<Eigen::Index>(n_);
  const Eigen::VectorXd y = sol_(t);
  const Eigen::Map<const Eigen::MatrixXd> c(y.data() + 2 * n, n, n);
  // The interpolant between symmetrized steps is symmetric only up to rounding.
  return 0.5 * (c + c.transpose());
}

ClaInit ClaSolution::state(double t) const { return {phi(t), e(t), c(t)}; }

Eigen::VectorXd ClaSolution::pop_mean(double t) const {
  return N_ * phi(t) + std::sqrt(static_cast<double>(N_)) * e(t);
}

Eigen::MatrixXd ClaSolution::pop_cov(double t) const { return N_ * c(t); }

OdeSystem cla_system(const PopulationProcess& p) {
  OdeSystem sys;
  const std::size_t n = p.dim();
  sys.dim = 2 * n + n * n;
  sys.labels = p.labels;
  sys.rhs = [&p, n](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const auto ni = static_cast<Eigen::Index>(n);
    dy.resize(y.size());
    const Eigen::VectorXd phi = y.head(ni);
    const auto xs = as_span(phi);
    const Eigen::MatrixXd J = p.jacobian(xs);
    dy.head(ni) = p.drift(xs);
    dy.segment(ni, ni) = J * y.segment(ni, ni);
    Eigen::Map<const Eigen::MatrixXd> C(y.data() + 2 * ni, ni, ni);
    Eigen::Map<Eigen::MatrixXd> dC(dy.data() + 2 * ni, ni, ni);
    dC = J * C + C * J.transpose() + p.diffusion(xs);
  };
  return sys;
}

void project_covariance(Eigen::Ref<Eigen::VectorXd> packed, std::size_t n) {
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::Map<Eigen::MatrixXd> C(packed.data() + 2 * ni, ni, ni);
  const Eigen::MatrixXd sym = 0.5 * (C + C.transpose());
  C = sym;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const Eigen::VectorXd ev = es.eigenvalues();
  bool clip = false;
  Eigen::VectorXd fixed = ev;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < 0.0 && ev[i] >= -1e-8) {
      fixed[i] = 0.0;
      clip = true;
    }
  }
  if (clip) {
    C = es.eigenvectors() * fixed.asDiagonal() * es.eigenvectors().transpose();
    const Eigen::MatrixXd s2 = 0.5 * (C + C.transpose());
    C = s2;
  }
}

ClaSolution cla_solve(const PopulationProcess& p, double T, const ClaInit& init, const OdeConfig& cfg) {
  return cla_chain({&p}, {0.0, T}, init, cfg);
}

ClaSolution cla_solve(const PopulationModel& m, double T, const OdeConfig& cfg) {
  const PopulationProcess p = m.to_process();
  return cla_solve(p, T, ClaInit::deterministic(p.initial_density()), cfg);
}

ClaSolution cla_chain(const std::vector<const PopulationProcess*>& procs, const std::vector<double>& bounds,
                      const ClaInit& init, const OdeConfig& cfg) {
  check_chain(procs.size(), bounds);
  const std::size_t n = procs.front()->dim();
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::VectorXd y(2 * ni + ni * ni);
  y.head(ni) = init.phi;
  y.segment(ni, ni) = init.e;
  Eigen::Map<Eigen::MatrixXd>(y.data() + 2 * ni, ni, ni) = init.c;
  OdeConfig c2 = cfg;
  c2.post_step = [n](double, Eigen::VectorXd& v) { project_covariance(v, n); };
  OdeSolution out;
  for (std::size_t j = 0; j < procs.size(); ++j) {
    OdeSolution s = integrate(cla_system(*procs[j]), bounds[j], bounds[j + 1], y, c2);
    y = s.final_state();
    if (j == 0) out = std::move(s);
    else out.append(s);
  }
  return ClaSolution(std::move(out), n, procs.front()->N);
}

}  // namespace popmc
