#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "popmc/error.hpp"
#include "popmc/property.hpp"

using namespace popmc;

namespace {

const char* kTau = R"(
dta late {
  init q0;
  state qb;
  final qf;
  edge q0 -> qb on inf when phi_S if x < 10;
  edge q0 -> qf on inf when phi_S if x >= 10;
}
)";

PropertyFile parse(const std::string& text) { return parse_property(text, testing::local_model().agent); }

TimedPath infected_at(double t) { return TimedPath{0, {{t, "inf", 1}}}; }

}  // namespace

TEST_CASE("late-infection automaton is a valid deterministic automaton") {
  const auto pf = parse(kTau);
  const auto d = pf.find_dta("late");
  REQUIRE(d);
  CHECK(d->states.size() == 3);
  CHECK_FALSE(find_determinism_clash(*d, testing::local_model().agent).has_value());
}

TEST_CASE("overlapping constraints are reported with a witness") {
  const std::string text = R"(
dta bad { init q0; state q1, q2;
  edge q0 -> q1 on inf when phi_S if x < 5;
  edge q0 -> q2 on inf when phi_S if x < 3; }
)";
  try {
    parse(text);
    FAIL("expected a determinism error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("determin") != std::string::npos);
  }
  OneGDTA d;
  d.states = {"q0", "q1", "q2"};
  d.final = {false, false, false};
  d.edges = {{0, "inf", StateFormula(), ClockConstraint::atom(Cmp::Lt, Rational(5)), 1},
             {0, "inf", StateFormula(), ClockConstraint::atom(Cmp::Lt, Rational(3)), 2}};
  const auto clash = find_determinism_clash(d, testing::local_model().agent);
  REQUIRE(clash.has_value());
  CHECK(clash->witness < Rational(3));
}

TEST_CASE("automaton without edges never accepts unless initially final") {
  const auto a = testing::local_model().agent;
  const auto pf = parse("dta idle { init q0; }\ndta done { final q0; init q0; }\n");
  CHECK_FALSE(dta_accepts(*pf.find_dta("idle"), a, infected_at(3.0), 100.0));
  CHECK(dta_accepts(*pf.find_dta("done"), a, TimedPath{0, {}}, 100.0));
}

TEST_CASE("runs of the late-infection automaton") {
  const auto a = testing::local_model().agent;
  const auto d = parse(kTau).find_dta("late");
  CHECK(dta_accepts(*d, a, infected_at(12.0)));
  CHECK_FALSE(dta_accepts(*d, a, infected_at(5.0)));
  CHECK_FALSE(dta_accepts(*d, a, TimedPath{0, {}}));
  CHECK_FALSE(dta_accepts(*d, a, infected_at(12.0), 11.0));
  CHECK(run_dta(*d, a, infected_at(12.0)).accept_time == doctest::Approx(12.0));
}

TEST_CASE("structural resolution splits an edge at a signal switch") {
  const auto a = testing::local_model().agent;
  const auto pf = parse(R"(
dta nested(p) { init q0; final q1;
  edge q0 -> q1 on ext when p; }
)");
  const auto d = pf.find_dta("nested");
  BooleanSignal sig = BooleanSignal::constant(3, 20.0, false);
  sig.tracks[0] = SignalTrack{true, {5.0}};
  const OneGDTA r = structural_resolution(*d, {sig});
  CHECK(r.params.empty());
  // Agent in S taking ext before 5 accepts, after 5 does not.
  CHECK(dta_accepts(r, a, TimedPath{0, {{4.0, "ext", 1}}}));
  CHECK_FALSE(dta_accepts(r, a, TimedPath{0, {{6.0, "ext", 1}}}));
  const OneGDTA same = structural_resolution(*d, {BooleanSignal::constant(3, 20.0, true)});
  CHECK(dta_accepts(same, a, TimedPath{0, {{6.0, "ext", 1}}}));
}

TEST_CASE("refinement over two switching parameters stays within the interval cover") {
  const auto pf = parse(R"(
dta two(p, r) { init q0; final q1;
  edge q0 -> q1 on ext when p && r; }
)");
  BooleanSignal p = BooleanSignal::constant(3, 20.0, false), r = p;
  p.tracks[0] = SignalTrack{true, {2.0, 4.0}};
  r.tracks[0] = SignalTrack{false, {1.0, 3.0, 5.0}};
  const OneGDTA res = structural_resolution(*pf.find_dta("two"), {p, r});
  CHECK(res.edges.size() <= 6);
  const auto a = testing::local_model().agent;
  for (double t : {0.5, 1.5, 2.5, 3.5, 4.5, 5.5}) {
    const bool want = p.value(0, t) && r.value(0, t);
    CHECK(dta_accepts(res, a, TimedPath{0, {{t, "ext", 1}}}) == want);
  }
}

TEST_CASE("property file with formulas and global properties") {
  const auto m = testing::local_model();
  const auto pf = testing::epidemic_props(m);
  CHECK(pf.find_formula("late"));
  const auto g = pf.find_global("G1");
  REQUIRE(g);
  CHECK(g->kind == GlobalProperty::Kind::Threshold);
  CHECK(g->a == doctest::Approx(0.5));
  CHECK(to_double(g->horizon) == doctest::Approx(100.0));
  CHECK_THROWS_AS(parse("dta x { init q0; edge q0 -> q0 on nope; }"), ParseError);
}
