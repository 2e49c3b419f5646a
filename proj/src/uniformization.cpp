#include "popmc/uniformization.hpp"

#include <cmath>
#include <deque>
#include <unordered_map>

#include "popmc/error.hpp"
#include "popmc/kernels.hpp"

namespace popmc {

namespace {

struct VecHash {
  std::size_t operator()(const std::vector<int>& v) const {
    std::size_t h = 1469598103934665603ULL;
    for (int x : v) h = (h ^ static_cast<std::size_t>(x + 0x9e37)) * 1099511628211ULL;
    return h;
  }
};

std::vector<double> as_double(const std::vector<int>& v) { return {v.begin(), v.end()}; }

}  // namespace

std::map<int, double> TransientDistribution::marginal(const std::vector<int>& vars) const {
  std::map<int, double> out;
  for (std::size_t i = 0; i < states.size(); ++i) {
    int s = 0;
    for (int v : vars) s += states[i][static_cast<std::size_t>(v)];
    out[s] += prob[static_cast<Eigen::Index>(i)];
  }
  return out;
}

TransientDistribution exact_transient_chain(const std::vector<const PopulationProcess*>& procs,
                                            const std::vector<double>& bounds, std::size_t cap) {
  if (procs.empty() || bounds.size() != procs.size() + 1) throw Error("exact_transient: bad region chain");
  TransientDistribution out;
  std::unordered_map<std::vector<int>, int, VecHash> index;
  std::vector<int> init;
  for (double v : procs.front()->initial) init.push_back(static_cast<int>(std::lround(v)));
  out.states.push_back(init);
  index[init] = 0;
  // Reachable set under the union of all region processes.
  std::deque<int> queue{0};
  while (!queue.empty()) {
    const int i = queue.front();
    queue.pop_front();
    const std::vector<double> x = as_double(out.states[static_cast<std::size_t>(i)]);
    for (const auto* p : procs) {
      for (std::size_t k = 0; k < p->transitions.size(); ++k) {
        if (p->rate(k, x) <= 0.0) continue;
        std::vector<int> y = out.states[static_cast<std::size_t>(i)];
        for (std::size_t v = 0; v < y.size(); ++v) y[v] += p->transitions[k].update[v];
        if (index.count(y)) continue;
        if (out.states.size() >= cap) throw Error("state space exceeds the cap of " + std::to_string(cap));
        index[y] = static_cast<int>(out.states.size());
        out.states.push_back(y);
        queue.push_back(index[y]);
      }
    }
  }
  const std::size_t S = out.states.size();
  Eigen::VectorXd pi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(S));
  pi[0] = 1.0;
  for (std::size_t j = 0; j < procs.size(); ++j) {
    const double dt = bounds[j + 1] - bounds[j];
    if (dt <= 0.0) continue;
    // Transposed uniformized matrix in CSR: row = target state.
    std::vector<std::vector<std::pair<int, double>>> in(S);
    std::vector<double> exit(S, 0.0);
    for (std::size_t i = 0; i < S; ++i) {
      const std::vector<double> x = as_double(out.states[i]);
      for (std::size_t k = 0; k < procs[j]->transitions.size(); ++k) {
        const double r = procs[j]->rate(k, x);
        if (r <= 0.0) continue;
        std::vector<int> y = out.states[i];
        for (std::size_t v = 0; v < y.size(); ++v) y[v] += procs[j]->transitions[k].update[v];
        in[static_cast<std::size_t>(index.at(y))].emplace_back(static_cast<int>(i), r);
        exit[i] += r;
      }
    }
    double max_exit = 0.0;
    for (double e : exit) max_exit = std::max(max_exit, e);
    if (max_exit <= 0.0) continue;
    const double lambda = 1.05 * max_exit;
    std::vector<std::int64_t> row_ptr{0};
    std::vector<std::int32_t> cols;
    std::vector<double> vals;
    for (std::size_t i = 0; i < S; ++i) {
      cols.push_back(static_cast<std::int32_t>(i));
      vals.push_back(1.0 - exit[i] / lambda);
      for (const auto& [src, r] : in[i]) {
        cols.push_back(src);
        vals.push_back(r / lambda);
      }
      row_ptr.push_back(static_cast<std::int64_t>(cols.size()));
    }
    const double lt = lambda * dt;
    Eigen::VectorXd term = pi, next(static_cast<Eigen::Index>(S));
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(S));
    double cum = 0.0;
    const auto& kt = kernels::active();
    for (std::size_t k = 0;; ++k) {
      const double w = std::exp(-lt + static_cast<double>(k) * std::log(lt) - std::lgamma(static_cast<double>(k) + 1.0));
      acc += w * term;
      cum += w;
      if (cum >= 1.0 - 1e-10 && static_cast<double>(k) > lt) break;
      if (k > static_cast<std::size_t>(lt + 50.0 * std::sqrt(lt + 1.0) + 100.0)) break;
      kt.csr_spmv(row_ptr.data(), cols.data(), vals.data(), term.data(), next.data(), S);
      term.swap(next);
    }
    pi = acc / cum;
  }
  out.prob = pi;
  return out;
}

TransientDistribution exact_transient(const PopulationProcess& p, double T, std::size_t cap) {
  return exact_transient_chain({&p}, {0.0, T}, cap);
}

}  // namespace popmc
