#include "popmc/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "popmc/error.hpp"

namespace popmc {

int AgentClass::state_index(std::string_view name) const {
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i] == name) return static_cast<int>(i);
  }
  return -1;
}

int AgentClass::find_local(int source, std::string_view label, int target) const {
  for (std::size_t i = 0; i < local_transitions.size(); ++i) {
    const auto& l = local_transitions[i];
    if (l.source == source && l.target == target && l.label == label) return static_cast<int>(i);
  }
  return -1;
}

std::vector<std::string> AgentClass::labels() const {
  std::vector<std::string> out;
  for (const auto& l : local_transitions) {
    if (std::find(out.begin(), out.end(), l.label) == out.end()) out.push_back(l.label);
  }
  return out;
}

void AgentClass::validate() const {
  std::set<std::string> seen;
  for (const auto& s : states) {
    if (!seen.insert(s).second) throw ModelError("duplicate state '" + s + "'");
  }
  const int n = static_cast<int>(states.size());
  std::set<std::tuple<int, std::string, int>> edges;
  for (const auto& l : local_transitions) {
    if (l.source < 0 || l.source >= n || l.target < 0 || l.target >= n) {
      throw ModelError("local transition '" + l.label + "' has undeclared endpoint");
    }
    edges.emplace(l.source, l.label, l.target);
  }
  if (edges.size() != local_transitions.size()) throw ModelError("duplicate local transition");
}

int PopulationModel::param_index(std::string_view name) const {
  for (std::size_t i = 0; i < param_names.size(); ++i) {
    if (param_names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

void PopulationModel::set_param(const std::string& name, double value) {
  const int k = param_index(name);
  if (k < 0) throw ModelError("unknown parameter '" + name + "'");
  param_values[static_cast<std::size_t>(k)] = value;
  set_population(N);
}

void PopulationModel::set_population(int n) {
  if (n < 1) throw ModelError("population size must be positive");
  N = n;
  if (initial_exprs.empty()) return;
  initial.assign(num_states(), 0);
  long total = 0;
  for (std::size_t s = 0; s < num_states(); ++s) {
    const double v = initial_exprs[s].evaluate({}, N, param_values);
    const double r = std::round(v);
    if (std::abs(v - r) > 1e-9 || r < 0) {
      throw ModelError("initial count of '" + agent.states[s] + "' is not a non-negative integer");
    }
    initial[s] = static_cast<int>(r);
    total += initial[s];
  }
  if (total != N) {
    throw ModelError("initial counts sum to " + std::to_string(total) + ", expected N=" + std::to_string(N));
  }
}

void PopulationModel::validate() const {
  agent.validate();
  if (N < 1) throw ModelError("population size must be positive");
  if (initial.size() != num_states()) throw ModelError("initial state has wrong dimension");
  long total = 0;
  for (int c : initial) {
    if (c < 0) throw ModelError("negative initial count");
    total += c;
  }
  if (total != N) throw ModelError("initial counts do not sum to N");
  for (const auto& t : transitions) {
    for (const auto& e : t.sync) {
      if (e.local < 0 || e.local >= static_cast<int>(agent.local_transitions.size())) {
        throw ModelError("transition '" + t.name + "' references an unknown local transition");
      }
      if (e.multiplicity < 1) throw ModelError("transition '" + t.name + "' has multiplicity < 1");
    }
    for (int v : t.rate.variables()) {
      if (v < 0 || v >= static_cast<int>(num_states())) {
        throw ModelError("transition '" + t.name + "' reads an unknown variable");
      }
    }
  }
}

std::vector<int> PopulationModel::guard_counts(const GlobalTransition& t) const {
  std::vector<int> k(num_states(), 0);
  for (const auto& e : t.sync) {
    k[static_cast<std::size_t>(agent.local_transitions[static_cast<std::size_t>(e.local)].source)] += e.multiplicity;
  }
  return k;
}

double PopulationModel::raw_rate(const GlobalTransition& t, std::span<const double> counts) const {
  return t.rate.evaluate(counts, N, param_values);
}

double PopulationModel::rate(const GlobalTransition& t, std::span<const double> counts) const {
  const auto k = guard_counts(t);
  for (std::size_t s = 0; s < k.size(); ++s) {
    if (counts[s] < k[s]) return 0.0;
  }
  return clamp_rate(raw_rate(t, counts), t.name);
}

double PopulationModel::density_rate(const GlobalTransition& t, std::span<const double> xhat) const {
  std::vector<double> x(xhat.begin(), xhat.end());
  for (double& v : x) v *= N;
  return clamp_rate(raw_rate(t, x) / N, t.name);
}

UpdateVector update_vector(const GlobalTransition& t, const AgentClass& a) {
  UpdateVector v(a.states.size(), 0);
  for (const auto& e : t.sync) {
    const auto& l = a.local_transitions[static_cast<std::size_t>(e.local)];
    v[static_cast<std::size_t>(l.target)] += e.multiplicity;
    v[static_cast<std::size_t>(l.source)] -= e.multiplicity;
  }
  return v;
}

PopulationProcess PopulationModel::to_process() const {
  PopulationProcess p;
  p.labels = agent.states;
  p.N = N;
  p.initial.assign(initial.begin(), initial.end());
  const std::size_t n = num_states();
  const double pop = N;
  std::vector<Polynomial> scale;
  for (std::size_t i = 0; i < n; ++i) scale.push_back(Polynomial::variable(n, i) * pop);
  for (const auto& t : transitions) {
    ProcessTransition pt;
    pt.name = t.name;
    pt.update = update_vector(t, agent);
    const auto k = guard_counts(t);
    for (std::size_t s = 0; s < n; ++s) {
      if (k[s] > 0) pt.guard.emplace_back(static_cast<int>(s), k[s]);
    }
    const RateExpr expr = t.rate;
    const std::vector<double> params = param_values;
    pt.count_rate = [expr, params, pop](std::span<const double> x) { return expr.evaluate(x, pop, params); };
    pt.density_rate = [expr, params, pop](std::span<const double> x) {
      std::vector<double> c(x.begin(), x.end());
      for (double& v : c) v *= pop;
      return expr.evaluate(c, pop, params) / pop;
    };
    pt.count_poly = t.rate.to_polynomial(n, pop, param_values);
    if (pt.count_poly) {
      Polynomial d = pt.count_poly->substitute(scale) * (1.0 / pop);
      d.prune(1e-15 * std::max(1.0, pop));
      pt.density_poly = d;
    }
    p.transitions.push_back(std::move(pt));
  }
  p.finalize();
  return p;
}

Eigen::VectorXd drift(const PopulationModel& m, std::span<const double> xhat) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.num_states()));
  for (const auto& t : m.transitions) {
    const double r = m.density_rate(t, xhat);
    if (r == 0.0) continue;
    const auto v = update_vector(t, m.agent);
    for (std::size_t i = 0; i < v.size(); ++i) f[static_cast<Eigen::Index>(i)] += v[i] * r;
  }
  return f;
}

Eigen::MatrixXd diffusion(const PopulationModel& m, std::span<const double> xhat) {
  const auto n = static_cast<Eigen::Index>(m.num_states());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (const auto& t : m.transitions) {
    const double r = m.density_rate(t, xhat);
    if (r == 0.0) continue;
    const auto v = update_vector(t, m.agent);
    Eigen::VectorXd ve(n);
    for (Eigen::Index i = 0; i < n; ++i) ve[i] = v[static_cast<std::size_t>(i)];
    d.noalias() += r * ve * ve.transpose();
  }
  return d;
}

std::vector<EnabledTransition> enabled_transitions(const PopulationModel& m, std::span<const int> x) {
  std::vector<double> c(x.begin(), x.end());
  std::vector<EnabledTransition> out;
  for (std::size_t k = 0; k < m.transitions.size(); ++k) {
    const auto& t = m.transitions[k];
    out.push_back({static_cast<int>(k), m.rate(t, c), update_vector(t, m.agent)});
  }
  return out;
}

void check_density_dependence(const PopulationModel& m, int samples, double rel_tol, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  const std::size_t n = m.num_states();
  const double sizes[2] = {1e3, 1e6};
  for (int k = 0; k < samples; ++k) {
    std::vector<double> xhat(n);
    double total = 0.0;
    for (double& v : xhat) total += (v = expo(rng));
    for (double& v : xhat) v /= total;
    for (const auto& t : m.transitions) {
      double f[2];
      for (int j = 0; j < 2; ++j) {
        std::vector<double> c(xhat);
        for (double& v : c) v *= sizes[j];
        f[j] = t.rate.evaluate(c, sizes[j], m.param_values) / sizes[j];
      }
      const double scale = std::max({std::abs(f[0]), std::abs(f[1]), 1e-300});
      if (std::abs(f[0] - f[1]) > rel_tol * scale && std::abs(f[0] - f[1]) > 1e-300) {
        std::ostringstream os;
        os << "transition '" << t.name << "' is not density dependent: f(Nx)/N = " << f[0] << " at N=1e3 vs "
           << f[1] << " at N=1e6";
        throw ModelError(os.str());
      }
    }
  }
}

PopulationModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace popmc
