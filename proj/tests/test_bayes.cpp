#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "perdec/bayes.hpp"
#include "perdec/lp.hpp"
#include "perdec/numeric.hpp"

using namespace perdec;
using namespace perdec::testing;

namespace {

const ResponseRule kStrict = ResponseRule::strict();

Dataset two_context_data(int n1, int ones1, int n2, int ones2) {
  std::vector<Sample> s;
  for (int i = 0; i < n1; ++i) s.push_back({"x1", {}, {i < ones1 ? 1.0 : 0.0}});
  for (int i = 0; i < n2; ++i) s.push_back({"x2", {}, {i < ones2 ? 1.0 : 0.0}});
  return Dataset(s);
}

}  // namespace

TEST_CASE("simplex solves small programs") {
  LinearProgram lp;
  lp.objective = {1.0, 1.0};
  lp.le_rows = {{1.0, 2.0}, {3.0, 1.0}};
  lp.le_rhs = {4.0, 6.0};
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.value == doctest::Approx(2.8));
  CHECK(sol.x[0] == doctest::Approx(1.6));

  LinearProgram infeasible;
  infeasible.objective = {1.0};
  infeasible.ge_rows = {{1.0}};
  infeasible.ge_rhs = {2.0};
  infeasible.le_rows = {{1.0}};
  infeasible.le_rhs = {1.0};
  CHECK(solve_lp(infeasible).status == LpStatus::kInfeasible);

  LinearProgram unbounded;
  unbounded.objective = {1.0, 0.0};
  unbounded.le_rows = {{1.0, -1.0}};
  unbounded.le_rhs = {1.0};
  CHECK(solve_lp(unbounded).status == LpStatus::kUnbounded);

  // Beale's example cycles under the textbook largest-coefficient rule.
  LinearProgram beale;
  beale.objective = {0.75, -20.0, 0.5, -6.0};
  beale.le_rows = {{0.25, -8.0, -1.0, 9.0}, {0.5, -12.0, -0.5, 3.0}, {0.0, 0.0, 1.0, 0.0}};
  beale.le_rhs = {0.0, 0.0, 1.0};
  sol = solve_lp(beale);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.value == doctest::Approx(1.25));

  LinearProgram eq;
  eq.objective = {-1.0, -1.0};
  eq.eq_rows = {{1.0, 1.0}, {2.0, 2.0}};
  eq.eq_rhs = {1.0, 2.0};
  sol = solve_lp(eq);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.value == doctest::Approx(-1.0));
}

TEST_CASE("posterior states") {
  auto b = posterior_states(fix_b(), fix_b_data());
  REQUIRE(b.states.size() == 2);
  CHECK(b.states[0][0] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(b.states[1][0] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(b.prior == Vec{0.5, 0.5});
  auto a = posterior_states(fix_a(), fix_a_data());
  CHECK(a.states == std::vector<Vec>{{0.5}});
  CHECK(a.prior == Vec{1.0});
  auto merged = posterior_states(fix_b(), two_context_data(10, 4, 5, 2));
  REQUIRE(merged.states.size() == 1);
  CHECK(merged.prior[0] == doctest::Approx(1.0));
  const Instance affine(1, {threshold_receiver()}, prefer_a0_sender(), {Hypothesis("lin", AffineMap{{{1.0}}, {0.0}})});
  CHECK_THROWS_AS(posterior_states(affine, Dataset({{"", {0.5}, {1.0}}})), Error);
}

TEST_CASE("signaling view") {
  const auto star = signaling_view(fix_b(), fix_b_data(), RandomizedPredictor::point_mass(0, 2));
  REQUIRE(star.support.size() == 2);
  CHECK(star.mass == Vec{0.5, 0.5});
  for (const auto& r : star.residuals) CHECK(std::abs(r[0]) <= 1e-12);
  const auto pooled = signaling_view(fix_b(), fix_b_data(), RandomizedPredictor::point_mass(1, 2));
  CHECK(pooled.support.size() == 1);
  CHECK(std::abs(pooled.residuals[0][0]) <= 1e-12);
  const auto minus = signaling_view(fix_a(), fix_a_data(), RandomizedPredictor::point_mass(0, 2));
  CHECK(minus.support == std::vector<Vec>{{0.45}});
  CHECK(minus.residuals[0][0] == doctest::Approx(0.05));
}

TEST_CASE("post-processing to full calibration") {
  const Instance inst = fix_b();
  const Dataset data = fix_b_data();
  const auto star = post_process_to_calibrated(inst, data, RandomizedPredictor::point_mass(0, 2));
  CHECK(star.representatives[0] == Vec{0.2});
  CHECK(star.representatives[1] == Vec{0.8});
  const auto pooled = post_process_to_calibrated(inst, data, RandomizedPredictor::point_mass(1, 2));
  CHECK(pooled.representatives[0] == Vec{0.5});
  CHECK_FALSE(pooled.representatives[1].has_value());

  const RandomizedPredictor mix({0.5, 0.5});
  const auto out = post_process_to_calibrated(inst, data, mix);
  const auto levels = level_sets(data, out.table);
  REQUIRE(levels.size() == 2);
  CHECK(levels[0].value[0] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(levels[0].mass == doctest::Approx(0.75));
  CHECK(std::abs(levels[0].residual[0]) <= 1e-12);
  CHECK(levels[1].value == Vec{0.8});
  CHECK(full_calibration_error(data, out.table) <= 1e-8);
  CHECK(expected_sender_utility(inst, data, mix, kStrict) == doctest::Approx(0.75));
  CHECK(table_stats(inst, data, out.table, kStrict).utility == doctest::Approx(0.75).epsilon(1e-12));

  CHECK_THROWS_AS(post_process_to_calibrated(fix_a(), fix_a_data(), RandomizedPredictor::point_mass(0, 2)),
                  Error);
  const RepresentativeOutsideRegion err(1, {0.5}, 0);
  CHECK(err.action() == 1);
  CHECK(err.response() == 0);
  CHECK(std::string(err.what()).find("bayesian_bridge") == 0);
}

TEST_CASE("discretization of the threshold receiver") {
  const Instance inst = fix_a();
  const Dataset data = fix_a_data();
  const auto iv = response_intervals(inst);
  REQUIRE(iv.size() == 2);
  CHECK(iv[0].action == 0);
  CHECK(iv[0].hi == 0.5);
  CHECK(iv[0].hi_closed);
  CHECK_FALSE(iv[1].lo_closed);

  const auto s = build_discretization(inst, data, 0.1);
  REQUIRE(s.points.size() == 11);
  CHECK(s.thresholds == Vec{0.5});
  CHECK(s.states == Vec{0.5});
  for (std::size_t k = 0; k <= 10; ++k) CHECK(s.points[k] == doctest::Approx(0.1 * k));

  const auto coarse = build_discretization(inst, data, 0.3);
  REQUIRE(coarse.points.size() == 5);
  CHECK(coarse.points[2] == 0.5);
  CHECK(coarse.points[4] == doctest::Approx(0.9));
  CHECK_THROWS_AS(build_discretization(inst, data, 0.6), Error);
  CHECK_THROWS_AS(build_discretization(inst, Dataset({{"x0", {}, {0.5}}}), 0.1), Error);
}

TEST_CASE("rounding to the discretization") {
  const Instance inst = fix_a();
  const Dataset data = fix_a_data();
  const auto s = build_discretization(inst, data, 0.1);
  CHECK(round_prediction(inst, s, 0.45) == doctest::Approx(0.4));
  CHECK(round_prediction(inst, s, 0.7) == doctest::Approx(0.7));
  CHECK(round_prediction(inst, s, 0.52) == doctest::Approx(0.6));
  const auto r = round_to_discretization(inst, data, RandomizedPredictor::point_mass(0, 2), s);
  CHECK(r.utility_before == 1.0);
  CHECK(r.utility_after == 1.0);
  CHECK(r.decce_before == doctest::Approx(0.05));
  CHECK(r.decce_after == doctest::Approx(0.10));
}

TEST_CASE("obedient signaling LP") {
  CHECK(obedient_signaling_upper_bound(fix_b(), fix_b_data()).value == doctest::Approx(1.0).epsilon(1e-9));
  const auto skew = obedient_signaling_upper_bound(fix_b(), two_context_data(10, 2, 30, 24));
  CHECK(std::abs(skew.value - 0.5) <= 1e-9);
  CHECK(skew.scheme[1][0] == doctest::Approx(1.0 / 3.0));

  // Aligned interests: full revelation is optimal.
  const SenderUtility aligned({1.0, 0.0}, {{-1.0}, {1.0}}, kUnitBox);
  const Instance same(1, {threshold_receiver()}, aligned, fix_b().hypotheses());
  CHECK(obedient_signaling_upper_bound(same, fix_b_data()).value == doctest::Approx(0.8).epsilon(1e-12));
}
