#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "popmc/individual.hpp"

using namespace popmc;

namespace {

std::shared_ptr<const OneGDTA> dta(const PopulationModel& m, const char* name) {
  return testing::epidemic_props(m).find_dta(name);
}

PropertyFile props(const PopulationModel& m, const std::string& text) { return parse_property(text, m.agent); }

}  // namespace

TEST_CASE("frozen population gives a constant schedule") {
  auto m = testing::local_model(100);
  for (const auto& n : m.param_names) {
    if (n != "N") m.set_param(n, 0.0);
  }
  const auto r = RateSchedule::fluid(m, 50.0);
  const auto a = r(0.0), b = r(37.0);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("fluid and first-order moment schedules coincide for linear generator entries") {
  const auto m = testing::local_model(100);
  const auto f = RateSchedule::fluid(m, 30.0);
  const auto mm = RateSchedule::moments(m, 1, 30.0);
  for (double t : {0.0, 2.0, 5.0, 17.0, 30.0}) {
    const auto a = f(t), b = mm(t);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-5));
  }
}

TEST_CASE("transition probabilities") {
  const auto m = testing::local_model(100);
  const auto p = synchronize(m.agent, *dta(m, "late_infection"), Rational(20));
  const auto r = RateSchedule::fluid(m, 60.0);
  CHECK(forward_prob(p, r, 3.0, 0.0).isIdentity());
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 20.0);
  for (int i = 0; i < 20; ++i) {
    const Eigen::MatrixXd P = forward_prob(p, r, u(rng), u(rng));
    CHECK((P.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-6);
    CHECK(P.minCoeff() >= -1e-9);
  }
}

TEST_CASE("path probability at a fixed initial time") {
  const auto m = testing::local_model(100);
  const auto r = RateSchedule::fluid(m, 60.0);
  const auto pf = props(m, "dta done { init q0; final q0; }\ndta never { init q0; state q1; final q2; "
                           "edge q0 -> q1 on ext; }\n");
  const auto done = synchronize(m.agent, *pf.find_dta("done"), Rational(10));
  const auto never = synchronize(m.agent, *pf.find_dta("never"), Rational(10));
  for (int s = 0; s < 3; ++s) {
    CHECK(path_prob_fixed(done, r, s, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(path_prob_fixed(never, r, s, 2.0) == doctest::Approx(0.0));
  }
  const auto p = synchronize(m.agent, *dta(m, "late_infection"), Rational(30));
  const Eigen::MatrixXd P = forward_prob(p, r, 0.0, 30.0);
  double want = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p.sliced.final[static_cast<std::size_t>(p.q_state(static_cast<int>(j)))]) {
      want += P(p.index(0, p.sliced.initial), static_cast<Eigen::Index>(j));
    }
  }
  CHECK(path_prob_fixed(p, r, 0, 0.0) == doctest::Approx(want).epsilon(1e-12));
  const auto by_h = acceptance_by_horizon(p, r, 0, 0.0, {5.0, 15.0, 30.0});
  CHECK(by_h[0] == 0.0);
  CHECK(by_h[2] == doctest::Approx(want).epsilon(1e-6));
  CHECK(by_h[1] <= by_h[2]);
}

TEST_CASE("curve over initial times") {
  const auto m = testing::local_model(100);
  const auto p = synchronize(m.agent, *dta(m, "late_infection"), Rational(300));
  const auto r = RateSchedule::fluid(m, 360.0);
  LocalConfig cfg;
  cfg.grid = 121;
  cfg.ode.rtol = 1e-9;
  cfg.ode.atol = 1e-12;
  const auto curve = path_prob_curve(p, r, 60.0, cfg);
  const double fixed = path_prob_fixed(p, r, 0, 0.0, cfg.ode);
  CHECK(curve.values[0][0] == doctest::Approx(fixed).epsilon(1e-9));
  // Dips while the epidemic peaks, then recovers toward a plateau.
  CHECK(curve.at(0, 5.0) < curve.at(0, 0.0));
  CHECK(curve.at(0, 60.0) > curve.at(0, 5.0));

  LocalConfig per = cfg;
  per.kolmogorov_t0 = false;
  const auto direct = path_prob_curve(p, r, 60.0, per);
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t k = 0; k < curve.t0.size(); ++k) {
      CHECK(std::abs(curve.values[s][k] - direct.values[s][k]) < 1e-6);
    }
  }
}

TEST_CASE("time-homogeneous rates give a flat curve") {
  const auto m = testing::local_model(100);
  const auto p = synchronize(m.agent, *dta(m, "patched_first"), Rational(20));
  const auto r = RateSchedule::constant(individual_local_rates(m, std::vector<double>{50, 30, 20}), 60.0);
  LocalConfig cfg;
  cfg.grid = 41;
  const auto c = path_prob_curve(p, r, 40.0, cfg);
  for (std::size_t s = 0; s < 3; ++s) {
    for (double v : c.values[s]) CHECK(v == doctest::Approx(c.values[s][0]).epsilon(1e-6));
  }
}

TEST_CASE("threshold crossings") {
  const auto grid = uniform_grid(0.0, 10.0, 101);
  auto lin = [](double t) { return t / 10.0; };
  std::vector<double> f;
  for (double t : grid) f.push_back(lin(t));
  const auto one = threshold_track(grid, f, lin, Cmp::Ge, 0.37);
  CHECK_FALSE(one.track.initial);
  REQUIRE(one.track.switches.size() == 1);
  CHECK(one.track.switches[0] == doctest::Approx(3.7).epsilon(1e-7));
  CHECK(one.warnings.empty());

  const auto all = threshold_track(grid, f, lin, Cmp::Ge, 0.0);
  CHECK(all.track.initial);
  CHECK(all.track.switches.empty());

  auto bump = [](double t) { return 0.5 - (t - 5.05) * (t - 5.05) / 100.0; };
  std::vector<double> g;
  for (double t : grid) g.push_back(bump(t));
  const auto graze = threshold_track(grid, g, bump, Cmp::Ge, 0.5 + 1e-6);
  CHECK(graze.track.switches.empty());
  CHECK_FALSE(graze.warnings.empty());
}

TEST_CASE("formula checking") {
  const auto m = testing::local_model(100);
  const auto pf = props(m, R"(
dta never { init q0; state q1; final q2; edge q0 -> q1 on ext; }
formula inf_atom = phi_I;
formula impossible = P[<=10] >= 0.1 (never);
)");
  const auto atom = check_csl_ta(*pf.find_formula("inf_atom"), m, 20.0);
  CHECK(atom.constant_in_time());
  CHECK(atom.at(0.0) == std::vector<bool>{false, true, false});
  LocalConfig cfg;
  cfg.grid = 51;
  const auto none = check_csl_ta(*pf.find_formula("impossible"), m, 20.0, cfg);
  for (double t : {0.0, 10.0, 20.0}) CHECK(none.at(t) == std::vector<bool>{false, false, false});
}

TEST_CASE("nested argument switching at t=5 is resolved per initial time") {
  const auto m = testing::local_model(100);
  const auto pf = props(m, "dta arg(p) { init q0; final q1; edge q0 -> q1 on ext when p; }\n"
                           "dta off { init q0; final q1; }\n");
  const auto r = RateSchedule::fluid(m, 40.0);
  BooleanSignal sig = BooleanSignal::constant(3, 40.0, false);
  sig.tracks[0] = SignalTrack{true, {5.0}};
  LocalConfig cfg;
  cfg.grid = 21;
  const auto c = nested_path_prob_curve(m.agent, *pf.find_dta("arg"), {sig}, Rational(10), r, 20.0, cfg);
  // From t0 >= 5 the argument is false everywhere, so acceptance is impossible.
  CHECK(c.at(0, 6.0) == doctest::Approx(0.0));
  CHECK(c.at(0, 0.0) > 0.0);
  // At t0 = 0 only the first five time units count.
  const OneGDTA bound = structural_resolution(*pf.find_dta("arg"), {sig});
  const auto direct = synchronize(m.agent, bound, Rational(10));
  CHECK(c.values[0][0] == doctest::Approx(path_prob_fixed(direct, r, 0, 0.0)).epsilon(1e-6));
}

TEST_CASE("required horizon adds nested bounds") {
  const auto m = testing::local_model(100);
  const auto pf = props(m, R"(
dta a(p) { init q0; final q1; edge q0 -> q1 on ext when p; }
formula inner = P[<=10] >= 0.1 (a[phi_S]);
formula outer = P[<=20] >= 0.2 (a[inner]);
)");
  CHECK(required_horizon(*pf.find_formula("outer"), 5.0) == doctest::Approx(35.0));
}
