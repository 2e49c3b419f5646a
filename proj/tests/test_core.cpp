#include <cmath>
#include <random>
#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "popmc/clock.hpp"
#include "popmc/error.hpp"
#include "popmc/model.hpp"
#include "popmc/polynomial.hpp"
#include "popmc/rational.hpp"
#include "popmc/signal.hpp"

using namespace popmc;

namespace {

const GlobalTransition& find(const PopulationModel& m, const std::string& name) {
  for (const auto& t : m.transitions) {
    if (t.name == name) return t;
  }
  FAIL("no transition " << name);
  return m.transitions.front();
}

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> x(n);
  double s = 0.0;
  for (auto& v : x) s += (v = e(rng));
  for (auto& v : x) v /= s;
  return x;
}

}  // namespace

TEST_CASE("epidemic model parses with five transitions") {
  const auto m = testing::local_model(100);
  CHECK(m.agent.states == std::vector<std::string>{"S", "I", "R"});
  CHECK(m.transitions.size() == 5);
  CHECK(m.initial == std::vector<int>{100, 0, 0});
  const auto& inf = find(m, "inf");
  CHECK(inf.sync.size() == 2);
  const std::vector<double> x = {60, 30, 10};
  CHECK(m.raw_rate(inf, x) == doctest::Approx(1.0 * 60 * 30 / 100));
}

TEST_CASE("model without transitions is valid") {
  const auto m = parse_model("param N = 3;\nstate A, B;\ninit A = N;\n");
  CHECK(m.transitions.empty());
  CHECK(m.to_process().drift(std::vector<double>{1.0, 0.0}).isZero());
}

TEST_CASE("undeclared variable in a rate is a parse error naming it") {
  try {
    parse_model("state S, I;\ntrans a : S->I @ 2 * X_Q;\ninit S = 1;\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("X_Q") != std::string::npos);
  }
}

TEST_CASE("update vectors") {
  const auto m = testing::local_model();
  CHECK(update_vector(find(m, "ext"), m.agent) == UpdateVector{-1, 1, 0});
  CHECK(update_vector(find(m, "inf"), m.agent) == UpdateVector{-1, 1, 0});
  CHECK(update_vector(find(m, "loss"), m.agent) == UpdateVector{1, 0, -1});
}

TEST_CASE("drift at the all-susceptible state") {
  const auto m = testing::local_model();
  const Eigen::VectorXd F = drift(m, std::vector<double>{1.0, 0.0, 0.0});
  CHECK(F[0] == doctest::Approx(-0.101));
  CHECK(F[1] == doctest::Approx(0.100));
  CHECK(F[2] == doctest::Approx(0.001));
}

TEST_CASE("drift conserves mass and vanishes without rates") {
  const auto m = testing::global_model();
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const auto x = random_simplex(rng, 3);
    CHECK(std::abs(drift(m, x).sum()) < 1e-14);
  }
  auto z = m;
  for (const auto& n : z.param_names) {
    if (n != "N") z.set_param(n, 0.0);
  }
  CHECK(drift(z, std::vector<double>{0.3, 0.3, 0.4}).isZero());
  CHECK(diffusion(z, std::vector<double>{0.3, 0.3, 0.4}).isZero());
}

TEST_CASE("diffusion equals the direct sum of rank-one terms and is symmetric") {
  const auto m = testing::local_model();
  const std::vector<double> x0 = {1.0, 0.0, 0.0};
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(3, 3);
  for (const auto& t : m.transitions) {
    const auto u = update_vector(t, m.agent);
    Eigen::Vector3d v(u[0], u[1], u[2]);
    D += m.density_rate(t, x0) * v * v.transpose();
  }
  CHECK((diffusion(m, x0) - D).cwiseAbs().maxCoeff() < 1e-15);
  std::mt19937_64 rng(6);
  for (int i = 0; i < 100; ++i) {
    const Eigen::MatrixXd G = diffusion(m, random_simplex(rng, 3));
    CHECK((G - G.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("guarded rates") {
  const auto m = testing::local_model(100);
  const std::vector<double> x = {100, 0, 0};
  CHECK(m.rate(find(m, "inf"), x) == 0.0);
  CHECK(m.rate(find(m, "ext"), x) == doctest::Approx(0.1 * 100));
  const auto pair = parse_model("param N = 2;\nstate A, B;\ntrans p : A->B, A->B @ 3 * X_A;\ninit A = N;\n");
  CHECK(pair.rate(pair.transitions[0], std::vector<double>{1, 0}) == 0.0);
  CHECK(pair.rate(pair.transitions[0], std::vector<double>{2, 0}) == doctest::Approx(6.0));
}

TEST_CASE("density dependence is accepted for the epidemic and rejected otherwise") {
  CHECK_NOTHROW(check_density_dependence(testing::local_model()));
  const auto bad = parse_model("param N = 10;\nstate A, B;\ntrans t : A->B @ X_A * X_A;\ninit A = N;\n");
  CHECK_THROWS_AS(check_density_dependence(bad), ModelError);
}

TEST_CASE("polynomial arithmetic and exact division") {
  const auto x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
  const Polynomial p = (x - Polynomial::constant(2, 2.0)) * y * 3.0;
  const std::vector<double> pt = {5.0, 7.0};
  CHECK(p.evaluate(pt) == doctest::Approx(63.0));
  const auto q = p.divide_linear(0, 2.0);
  REQUIRE(q.has_value());
  CHECK(q->evaluate(pt) == doctest::Approx(21.0));
  CHECK_FALSE((x * y + Polynomial::constant(2, 1.0)).divide_linear(0, 0.0).has_value());
  CHECK(p.derivative(1).evaluate(pt) == doctest::Approx(9.0));
  CHECK(x.pow(3).degree() == 3);
}

TEST_CASE("rationals and clock constraints") {
  CHECK(parse_rational("2.5") == Rational(5, 2));
  CHECK(parse_rational("1/3") == Rational(1, 3));
  CHECK_THROWS(parse_rational("abc"));
  const auto c = ClockConstraint::atom(Cmp::Lt, Rational(10));
  CHECK(c.holds(9.999));
  CHECK_FALSE(c.holds(10.0));
  CHECK((!c).holds(10.0));
  const auto both = c && ClockConstraint::atom(Cmp::Ge, Rational(3));
  CHECK(both.holds(3.0));
  CHECK_FALSE(both.holds(2.0));
  CHECK(both.constants().size() == 2);
}

TEST_CASE("signal combination") {
  const auto a = BooleanSignal{10.0, {SignalTrack{true, {2.0}}}, {}};
  const auto b = BooleanSignal{10.0, {SignalTrack{false, {3.0}}}, {}};
  const auto nn = signal_combine(SignalOp::Not, signal_combine(SignalOp::Not, a));
  CHECK(nn.tracks[0].initial == a.tracks[0].initial);
  CHECK(nn.tracks[0].switches == a.tracks[0].switches);
  const auto same = signal_combine(SignalOp::And, a, BooleanSignal::constant(1, 10.0, true));
  CHECK(same.tracks[0].switches == a.tracks[0].switches);
  const auto both = signal_combine(SignalOp::Or, a, b);
  for (double s : both.switch_times()) CHECK((s == 2.0 || s == 3.0));
  for (double t : {0.0, 1.0, 2.0, 2.5, 3.0, 9.0}) CHECK(both.value(0, t) == (a.value(0, t) || b.value(0, t)));
  CHECK(a.shifted(1.5).value(0, 0.0));
  CHECK_FALSE(a.shifted(1.5).value(0, 0.5));
}
