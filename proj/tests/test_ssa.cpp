#include <cmath>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "popmc/collective.hpp"
#include "popmc/io.hpp"
#include "popmc/ssa.hpp"
#include "popmc/uniformization.hpp"

using namespace popmc;

namespace {

PopulationModel death(int N, double c) {
  auto m = parse_model("param N = 10;\nparam c = 1;\nstate A, D;\ntrans die : A->D @ c * X_A;\ninit A = N;\n");
  m.set_param("c", c);
  m.set_population(N);
  return m;
}

}  // namespace

TEST_CASE("seeds") {
  std::uint64_t s = 1;
  const auto a = splitmix64(s), b = splitmix64(s);
  CHECK(a != b);
  CHECK(replication_seed(5, 0) != replication_seed(5, 1));
  CHECK(replication_seed(5, 7) == replication_seed(5, 7));
}

TEST_CASE("no jumps without rates") {
  const auto tr = gillespie_run(death(10, 0.0), 100.0, 1);
  CHECK(tr.times.empty());
  CHECK(tr.at(50.0) == std::vector<int>{10, 0});
}

TEST_CASE("pure death process mean") {
  const int N = 50;
  const double c = 0.2, t = 3.0;
  const auto m = death(N, c);
  const std::size_t runs = 10000;
  double s = 0.0, s2 = 0.0;
  for (std::size_t r = 0; r < runs; ++r) {
    const double x = gillespie_run(m, t, replication_seed(2, r)).at(t)[0];
    s += x;
    s2 += x * x;
  }
  const double mean = s / runs;
  const double se = std::sqrt((s2 / runs - mean * mean) / runs);
  CHECK(std::abs(mean - N * std::exp(-c * t)) <= 3.0 * se);
}

TEST_CASE("population is conserved along trajectories") {
  const auto m = testing::local_model(40);
  const auto tr = gillespie_run(m, 50.0, 4);
  CHECK(!tr.states.empty());
  for (const auto& x : tr.states) CHECK(x[0] + x[1] + x[2] == 40);
}

TEST_CASE("identical seeds give identical exported trajectories") {
  const auto m = testing::local_model(30);
  std::ostringstream a, b, c;
  write_trajectory_csv(a, gillespie_run(m, 20.0, 77));
  write_trajectory_csv(b, gillespie_run(m, 20.0, 77));
  write_trajectory_csv(c, gillespie_run(m, 20.0, 78));
  CHECK(a.str() == b.str());
  CHECK(a.str() != c.str());
}

TEST_CASE("wilson intervals") {
  const auto e = wilson_interval(50, 100);
  CHECK(e.estimate == 0.5);
  CHECK(e.lo == doctest::Approx(0.4038).epsilon(1e-3));
  CHECK(e.hi == doctest::Approx(0.5962).epsilon(1e-3));
  const auto z = wilson_interval(0, 1000);
  CHECK(z.lo == 0.0);
  CHECK(z.hi > 0.0);
  CHECK(z.hi < 0.005);
  CHECK(count_bounds(0.5, 1.0, 20, false) == std::pair<int, int>{10, 20});
  CHECK(count_bounds(0.31, 0.34, 20, false).first > count_bounds(0.31, 0.34, 20, false).second);
}

TEST_CASE("tagged acceptance for trivial automata") {
  const auto m = testing::local_model(20);
  const auto pf = parse_property("dta never { init q0; state q1; final q2; edge q0 -> q1 on ext; }\n"
                                 "dta done { init q0; final q0; }\n",
                                 m.agent);
  const auto grid = std::vector<double>{10.0, 50.0};
  const auto nv = acceptance_curve(tagged_acceptance_times(m, *pf.find_dta("never"), 0, 50.0, 500, 1), grid);
  CHECK(nv[1].estimate == 0.0);
  CHECK(nv[1].lo == 0.0);
  const auto dn = acceptance_curve(tagged_acceptance_times(m, *pf.find_dta("done"), 0, 50.0, 100, 1), grid);
  CHECK(dn[0].estimate == 1.0);
}

TEST_CASE("uniformization: initial distribution and two-state flip-flop") {
  auto m = parse_model("param N = 1;\nparam l = 0.7;\nstate A, B;\ntrans ab : A->B @ l * X_A;\n"
                       "trans ba : B->A @ l * X_B;\ninit A = N;\n");
  const auto p = m.to_process();
  const auto d0 = exact_transient(p, 0.0);
  CHECK(d0.marginal({0}).at(1) == doctest::Approx(1.0));
  for (double t : {0.1, 1.0, 4.0}) {
    const auto d = exact_transient(p, t);
    CHECK(std::abs(d.marginal({0}).at(1) - 0.5 * (1.0 + std::exp(-2.0 * 0.7 * t))) <= 1e-8);
  }
}

TEST_CASE("simulation estimates cover the uniformization value") {
  const auto m = testing::global_model(10);
  const auto d = testing::epidemic_props(m).find_dta("patched_first");
  const auto pm = final_counter_model(m, *d, Rational(100));
  const double T = 50.0;
  std::vector<const PopulationProcess*> procs;
  for (const auto& r : pm.regions) procs.push_back(&r);
  const auto exact = exact_transient_chain(procs, {0.0, T});
  std::vector<int> fvars;
  for (std::size_t v = 0; v < pm.agent.size(); ++v) {
    if (pm.agent.sliced.final[v % pm.agent.m]) fvars.push_back(static_cast<int>(v));
  }
  double want = 0.0;
  for (const auto& [k, pr] : exact.marginal(fvars)) {
    if (k >= 5) want += pr;
  }
  const auto [lo, hi] = count_bounds(0.5, 1.0, 10, false);
  int covered = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto counts = global_final_counts(pm, {T}, 400, 1000 + static_cast<std::uint64_t>(rep));
    const auto e = global_estimate_curve(counts, lo, hi)[0];
    covered += (e.lo <= want && want <= e.hi) ? 1 : 0;
  }
  CHECK(covered >= 93);
}
