#include <algorithm>
#include <random>
#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "popmc/synchronize.hpp"

using namespace popmc;

namespace {

std::shared_ptr<const OneGDTA> dta(const PopulationModel& m, const char* name) {
  return testing::epidemic_props(m).find_dta(name);
}

int local_index(const AgentClass& a, const std::string& label) {
  for (std::size_t i = 0; i < a.local_transitions.size(); ++i) {
    if (a.local_transitions[i].label == label) return static_cast<int>(i);
  }
  return -1;
}

int state(const ProductAgentClass& p, const std::string& name) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p.state_name(static_cast<int>(i)) == name) return static_cast<int>(i);
  }
  FAIL("no product state " << name);
  return -1;
}

const char* kPair = R"(
param N = 10;
state S, I, R;
trans pair : I->R, I->R @ 0.3 * X_I * (X_I - 1) / N;
trans loss : R->S @ 0.1 * X_R;
init S = 4; init I = 6;
)";

}  // namespace

TEST_CASE("shared labels are made unique and edges copied") {
  const auto m = testing::local_model();
  const auto d = dta(m, "late_infection");
  const auto [a, r] = relabel_unique(m.agent, *d);
  CHECK(local_index(a, "inf_S") >= 0);
  CHECK(local_index(a, "inf_I") >= 0);
  CHECK(local_index(a, "ext") >= 0);
  CHECK(r.edges.size() == 2 * d->edges.size());

  const auto unique = parse_model("param N = 2;\nstate A, B;\ntrans go : A->B @ X_A;\ninit A = N;\n");
  OneGDTA one;
  one.states = {"q0"};
  one.final = {false};
  const auto [a2, r2] = relabel_unique(unique.agent, one);
  CHECK(a2.local_transitions[0].label == "go");
}

TEST_CASE("pruning keeps only edges whose formula holds at the source") {
  const auto m = testing::local_model();
  const auto [a, r] = relabel_unique(m.agent, *dta(m, "late_infection"));
  const OneGDTA p = prune_state_conditions(a, r);
  CHECK(p.edges.size() == 2);
  for (const auto& e : p.edges) CHECK(e.action == "inf_S");
}

TEST_CASE("slicing by clock constants") {
  const auto m = testing::local_model();
  const auto prod = synchronize(m.agent, *dta(m, "late_infection"), Rational(300));
  const auto& sp = prod.sliced;
  REQUIRE(sp.num_regions() == 2);
  CHECK(sp.times == std::vector<Rational>{Rational(0), Rational(10), Rational(300)});
  const int l = local_index(prod.agent, "inf_S");
  const int q0 = 0;
  const int qb = static_cast<int>(std::find(sp.q_names.begin(), sp.q_names.end(), "qb") - sp.q_names.begin());
  const int qf = static_cast<int>(std::find(sp.q_names.begin(), sp.q_names.end(), "qf") - sp.q_names.begin());
  CHECK(sp.regions[0].next[q0][static_cast<std::size_t>(l)] == qb);
  CHECK(sp.regions[1].next[q0][static_cast<std::size_t>(l)] == qf);
  CHECK(sp.region_at(9.99) == 0);
  CHECK(sp.region_at(10.0) == 1);

  // Constants at or beyond the horizon do not split.
  CHECK(synchronize(m.agent, *dta(m, "late_infection"), Rational(8)).sliced.num_regions() == 1);
  CHECK(synchronize(m.agent, *dta(m, "patched_first"), Rational(50)).sliced.num_regions() == 1);
}

TEST_CASE("product agent class") {
  const auto m = testing::local_model();
  const auto p = synchronize(m.agent, *dta(m, "patched_first"), Rational(50));
  CHECK(p.size() == 9);
  // Final automaton components never change.
  for (const auto& region : p.regions) {
    for (const auto& t : region) {
      if (p.sliced.final[static_cast<std::size_t>(p.q_state(t.from))]) CHECK(p.q_state(t.to) == p.q_state(t.from));
    }
  }
  OneGDTA one;
  one.states = {"q0"};
  one.final = {false};
  const auto iso = synchronize(m.agent, one, Rational(5));
  CHECK(iso.size() == 3);
  CHECK(iso.regions[0].size() == m.agent.local_transitions.size());
}

TEST_CASE("single automaton state leaves the rates unchanged") {
  const auto m = testing::global_model(10);
  OneGDTA one;
  one.states = {"q0"};
  one.final = {false};
  const auto pm = product_population(m, synchronize(m.agent, one, Rational(5)));
  const auto base = m.to_process();
  const std::vector<double> x = {4, 3, 3};
  REQUIRE(pm.regions[0].transitions.size() == base.transitions.size());
  for (std::size_t k = 0; k < base.transitions.size(); ++k) {
    CHECK(pm.regions[0].rate(k, x) == doctest::Approx(base.rate(k, x)));
  }
}

TEST_CASE("infection rate split by hand") {
  auto m = testing::local_model(10);
  const auto pm = product_population(m, synchronize(m.agent, *dta(m, "late_infection"), Rational(30)));
  const auto& p = pm.agent;
  std::vector<double> x(p.size(), 0.0);
  const int s0 = state(p, "S.q0"), sb = state(p, "S.qb"), i0 = state(p, "I.q0"), ib = state(p, "I.qb");
  const int if_ = state(p, "I.qf");
  x[static_cast<std::size_t>(s0)] = 3;
  x[static_cast<std::size_t>(sb)] = 2;
  x[static_cast<std::size_t>(i0)] = 1;
  x[static_cast<std::size_t>(ib)] = 4;
  // f = 1 * X_S X_I / N = 2.5 with X_S = X_I = 5.
  const auto& region = pm.regions[1];
  double into_final = 0.0, specific = -1.0;
  for (std::size_t k = 0; k < region.transitions.size(); ++k) {
    const auto& t = region.transitions[k];
    if (t.name.rfind("inf[", 0) != 0) continue;
    if (t.update[static_cast<std::size_t>(s0)] == -1 && t.update[static_cast<std::size_t>(if_)] == 1) {
      into_final += region.rate(k, x);
      auto slots = t.split->slots;
      std::sort(slots.begin(), slots.end());
      std::vector<std::pair<int, int>> want = {{s0, 1}, {ib, 1}};
      std::sort(want.begin(), want.end());
      if (slots == want) specific = region.rate(k, x);
    }
  }
  CHECK(into_final == doctest::Approx(2.5 * 3.0 / 5.0));
  CHECK(specific == doctest::Approx(2.5 * 3.0 / 5.0 * 4.0 / 5.0));
}

TEST_CASE("split rates sum to the aggregated rate") {
  const auto m = testing::global_model(12);
  const auto pm = product_population(m, synchronize(m.agent, *dta(m, "patched_first"), Rational(50)));
  const auto base = m.to_process();
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> u(0, 3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(pm.dim());
    std::vector<double> agg(3, 0.0);
    for (std::size_t v = 0; v < x.size(); ++v) {
      x[v] = u(rng);
      agg[static_cast<std::size_t>(pm.agent.agent_state(static_cast<int>(v)))] += x[v];
    }
    std::vector<double> sums(base.transitions.size(), 0.0);
    for (std::size_t k = 0; k < pm.regions[0].transitions.size(); ++k) {
      sums[static_cast<std::size_t>(pm.regions[0].transitions[k].split->base)] += pm.regions[0].rate(k, x);
    }
    for (std::size_t k = 0; k < sums.size(); ++k) CHECK(sums[k] == doctest::Approx(base.rate(k, agg)).epsilon(1e-12));
  }
}

TEST_CASE("final counter increments") {
  const auto m = testing::global_model(10);
  const auto pm = augment_final_counter(product_population(m, synchronize(m.agent, *dta(m, "patched_first"), Rational(50))));
  const auto& p = pm.agent;
  const auto fi = static_cast<std::size_t>(pm.final_index());
  const int i0 = state(p, "I.q0"), r2 = state(p, "R.q2"), s2 = state(p, "S.q2");
  bool seen_entry = false, seen_inside = false;
  for (const auto& t : pm.regions[0].transitions) {
    if (t.update[static_cast<std::size_t>(i0)] == -1 && t.update[static_cast<std::size_t>(r2)] == 1) {
      CHECK(t.update[fi] == 1);
      seen_entry = true;
    }
    if (t.name.rfind("loss[", 0) == 0 && t.update[static_cast<std::size_t>(r2)] == -1 && t.update[static_cast<std::size_t>(s2)] == 1) {
      CHECK(t.update[fi] == 0);
      seen_inside = true;
    }
  }
  CHECK(seen_entry);
  CHECK(seen_inside);

  const auto pair = parse_model(kPair);
  const auto pf = parse_property("dta both { init q0; final qf; edge q0 -> qf on pair when phi_I; }", pair.agent);
  const auto pp = augment_final_counter(product_population(pair, synchronize(pair.agent, *pf.find_dta("both"), Rational(5))));
  const int pi0 = state(pp.agent, "I.q0");
  bool two = false;
  for (const auto& t : pp.regions[0].transitions) {
    if (t.update[static_cast<std::size_t>(pi0)] == -2) {
      CHECK(t.update[static_cast<std::size_t>(pp.final_index())] == 2);
      two = true;
    }
  }
  CHECK(two);
}

TEST_CASE("tagged agent generator") {
  const auto m = testing::local_model(100);
  const auto p = synchronize(m.agent, *dta(m, "late_infection"), Rational(30));
  const std::vector<double> x = {70, 20, 10};
  const Eigen::MatrixXd Q = individual_generator(p, m, x, 0);
  CHECK(Q(state(p, "S.q0"), state(p, "I.qb")) == doctest::Approx(1.0 / 100 * 20));
  for (Eigen::Index i = 0; i < Q.rows(); ++i) CHECK(std::abs(Q.row(i).sum()) < 1e-15);

  const auto pair = parse_model(kPair);
  const std::vector<double> y = {4, 6, 0};
  const auto g = individual_local_rates(pair, y);
  const double f = 0.3 * 6 * 5 / 10.0;
  CHECK(g[0] == doctest::Approx(2.0 * f / 6.0));
}

TEST_CASE("product model serializes to json") {
  const auto m = testing::global_model(10);
  const auto pm = product_population(m, synchronize(m.agent, *dta(m, "patched_first"), Rational(50)));
  const std::string js = product_to_json(pm);
  CHECK(js.find("I.q0") != std::string::npos);
}
