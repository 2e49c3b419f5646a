#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "popmc/collective.hpp"
#include "popmc/diagnostics.hpp"
#include "popmc/ssa.hpp"

using namespace popmc;

TEST_CASE("finite-size correction of threshold intervals") {
  auto iv = finite_size_correct(0.5, 1.0, 20, false, true);
  CHECK(iv.lo == 9.5);
  CHECK(std::isinf(iv.hi));
  iv = finite_size_correct(0.0, 0.5, 20, false, true);
  CHECK(std::isinf(iv.lo));
  CHECK(iv.lo < 0);
  CHECK(iv.hi == 10.5);
  iv = finite_size_correct(0.35, 0.35, 20, false, true);
  CHECK(iv.lo == 6.5);
  CHECK(iv.hi == 7.5);
  iv = finite_size_correct(0.5, 1.0, 20, false, false);
  CHECK(iv.lo == 10.0);
  CHECK(iv.hi == 20.0);
  iv = finite_size_correct(3, 7, 20, true, true);
  CHECK(iv.lo == 2.5);
  CHECK(iv.hi == 7.5);
  take_warnings();
  iv = finite_size_correct(0.31, 0.34, 20, false, true);
  CHECK(iv.empty);
  CHECK(!take_warnings().empty());
}

TEST_CASE("gaussian interval probabilities") {
  const GaussianEstimate g{10.0, 4.0};
  CHECK(gaussian_interval_prob(g, -INFINITY, INFINITY) == 1.0);
  CHECK(std::abs(gaussian_interval_prob(g, 8.0, 12.0) - std::erf(1.0 / std::sqrt(2.0))) <= 1e-6);
  CHECK(gaussian_interval_prob(g, 10.0, INFINITY) == doctest::Approx(0.5));
  CHECK(gaussian_interval_prob({5.0, 0.0}, 4.0, 6.0) == 1.0);
  CHECK(gaussian_interval_prob({5.0, 0.0}, 6.0, 7.0) == 0.0);
}

TEST_CASE("moment interval probability of a point-free count") {
  // Moments of a binomial(20, 0.5) count.
  const double mu = 10.0, var = 5.0;
  const std::vector<double> raw = {mu, var + mu * mu};
  const double p = moment_interval_prob(raw, 20, 9.5, INFINITY);
  CHECK(p == doctest::Approx(0.5 * std::erfc(-0.5 / std::sqrt(2.0 * var))).epsilon(1e-3));
}

TEST_CASE("vanishing variance with the fluid value inside the interval") {
  const auto m = testing::global_model(100000);
  const auto d = testing::epidemic_props(m).find_dta("patched_first");
  CHECK(check_path_global(m, *d, Rational(100), 0.5, 1.0, false) > 0.999);
  CHECK(check_path_global(m, *d, Rational(20), 0.5, 1.0, false) < 1e-3);
}

TEST_CASE("collective curve against simulation at N=100") {
  const auto m = testing::global_model(100);
  const auto d = testing::epidemic_props(m).find_dta("patched_first");
  const std::vector<double> T = {40.0, 60.0, 70.0, 80.0, 100.0};
  const auto c = check_path_global_curve(m, *d, Rational(100), 0.5, 1.0, false, T);
  const auto pm = final_counter_model(m, *d, Rational(100));
  const auto counts = global_final_counts(pm, T, 2000, 3);
  const auto [lo, hi] = count_bounds(0.5, 1.0, 100, false);
  const auto ssa = global_estimate_curve(counts, lo, hi);
  for (std::size_t i = 0; i < T.size(); ++i) {
    CHECK(std::abs(c.estimate[i] - ssa[i].estimate) < 0.08);
    // Mean of the final counter matches the simulated mean count.
    double mean = 0.0;
    for (const auto& row : counts) mean += row[i];
    mean /= static_cast<double>(counts.size());
    CHECK(std::abs(c.mean[i] - mean) < 1.5);
  }

  GlobalConfig mc;
  mc.method = GlobalMethod::MaxEnt;
  const auto me = check_path_global_curve(m, *d, Rational(100), 0.5, 1.0, false, T, mc);
  for (std::size_t i = 0; i < T.size(); ++i) CHECK(std::abs(me.estimate[i] - c.estimate[i]) < 0.1);
}

TEST_CASE("moment-closure method on a small automaton") {
  const auto m = testing::global_model(50);
  const auto pf = parse_property("dta ever { init q0; final q1; edge q0 -> q1 on ext; }", m.agent);
  GlobalConfig cfg;
  cfg.method = GlobalMethod::Moments;
  cfg.order = 2;
  const std::vector<double> T = {5.0, 10.0, 20.0};
  const auto mom = check_path_global_curve(m, *pf.find_dta("ever"), Rational(20), 0.3, 1.0, false, T, cfg);
  const auto cla = check_path_global_curve(m, *pf.find_dta("ever"), Rational(20), 0.3, 1.0, false, T);
  for (std::size_t i = 0; i < T.size(); ++i) {
    CHECK(mom.mean[i] == doctest::Approx(cla.mean[i]).epsilon(0.05));
    CHECK(std::abs(mom.estimate[i] - cla.estimate[i]) < 0.1);
  }
}

TEST_CASE("state properties") {
  const auto m = testing::global_model(100);
  const auto pf = parse_property("formula all = true;\nformula inf = phi_I;\nformula si = phi_S | phi_I;\n", m.agent);
  CHECK(check_state_global(m, *pf.find_formula("all"), 1.0, 1.0, false, 10.0) == doctest::Approx(1.0));
  CHECK(check_state_global(m, *pf.find_formula("all"), 0.0, 0.9, false, 10.0) == doctest::Approx(0.0));

  const double t0 = 30.0;
  const auto cla = cla_solve(m, t0);
  GlobalConfig raw;
  raw.correct = false;
  const double mu_i = cla.pop_mean(t0)[1];
  const double p = check_state_global(m, *pf.find_formula("inf"), mu_i / 100.0, 1.0, false, t0, raw);
  CHECK(p == doctest::Approx(0.5).epsilon(1e-6));

  // X_S + X_I has variance C_SS + 2 C_SI + C_II.
  const Eigen::MatrixXd C = cla.pop_cov(t0);
  const double mu = cla.pop_mean(t0)[0] + mu_i;
  const double var = C(0, 0) + 2.0 * C(0, 1) + C(1, 1);
  const double hi = mu + std::sqrt(var);
  const double q = check_state_global(m, *pf.find_formula("si"), 0.0, hi / 100.0, false, t0, raw);
  CHECK(q == doctest::Approx(0.5 * std::erfc(-1.0 / std::sqrt(2.0))).epsilon(1e-6));
}

TEST_CASE("global formulas") {
  const auto m = testing::global_model(100);
  const auto pf = parse_property(R"(
dta patched_first { init q0; state q1; final q2;
  edge q0 -> q1 on inf when phi_I;
  edge q0 -> q2 on patch1 when phi_I; }
global t = true;
global g = Pr >= 0.8 (frac(patched_first, 100) in [0.5, 1]);
global nn = !!g;
global hard = Pr >= 0.999999 (frac(patched_first, 60) in [0.5, 1]);
global both = g && !hard;
)", m.agent);
  CHECK(check_global_formula(*pf.find_global("t"), m).value);
  const auto g = check_global_formula(*pf.find_global("g"), m);
  CHECK(g.value);
  CHECK(g.estimate > 0.8);
  CHECK(check_global_formula(*pf.find_global("nn"), m).value == g.value);
  CHECK_FALSE(check_global_formula(*pf.find_global("hard"), m).value);
  CHECK(check_global_formula(*pf.find_global("both"), m).value);
}
