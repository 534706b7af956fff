#include <algorithm>
#include <chrono>
#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "perdec/audit.hpp"
#include "perdec/error.hpp"
#include "perdec/numeric.hpp"
#include "perdec/solver.hpp"

using namespace perdec;
using namespace perdec::testing;

namespace {

const ResponseRule kStrict = ResponseRule::strict();

ConstraintIndex at(Sign s, std::size_t action) { return {s, 0, 0, action}; }

}  // namespace

TEST_CASE("lagrangian value") {
  const Instance inst = fix_a();
  const Dataset data = fix_a_data();
  const auto minus = RandomizedPredictor::point_mass(0, 2);
  const auto slack = DualVector::slack_only(1, 1, 2, 40.0);
  CHECK(lagrangian_value(inst, data, minus, slack, 0.0, kStrict) == -1.0);
  const auto pinned = DualVector::point(1, 1, 2, 40.0, at(Sign::kPlus, 0));
  CHECK(lagrangian_value(inst, data, minus, pinned, 0.0, kStrict) == doctest::Approx(-3.0).epsilon(1e-12));
  const auto uni = DualVector::uniform(1, 1, 2, 40.0);
  const auto plus = RandomizedPredictor::point_mass(1, 2);
  const double mixed = lagrangian_value(inst, data, RandomizedPredictor({0.5, 0.5}), uni, 0.02, kStrict);
  const double halves = 0.5 * lagrangian_value(inst, data, minus, uni, 0.02, kStrict) +
                        0.5 * lagrangian_value(inst, data, plus, uni, 0.02, kStrict);
  CHECK(std::abs(mixed - halves) <= 1e-12);
  CHECK_THROWS_AS(lagrangian_value(inst, data, minus, DualVector::uniform(1, 2, 2, 1.0), 0.0, kStrict),
                  Error);
}

TEST_CASE("ERM oracle") {
  const Instance inst = fix_a();
  const Dataset data = fix_a_data();
  for (double gamma : {0.0, 0.05, 1.0})
    CHECK(erm_oracle(inst, data, DualVector::slack_only(1, 1, 2, 40.0), gamma, kStrict) == 0);
  CHECK(erm_oracle(inst, data, DualVector::point(1, 1, 2, 40.0, at(Sign::kMinus, 0)), 0.0, kStrict) == 1);
  const Instance dup = inst.with_hypotheses({constant("a", {"x0"}, {0.55}), constant("b", {"x0"}, {0.55})});
  CHECK(erm_oracle(dup, data, DualVector::uniform(1, 1, 2, 3.0), 0.0, kStrict) == 0);
}

TEST_CASE("hedge update") {
  const auto uni = DualVector::uniform(1, 1, 1, 3.0);
  const Vec zero(3, 0.0);
  CHECK(hedge_update(uni, zero, 0.7).entries() == uni.entries());
  const Vec g{1.0, 0.0, 0.0};
  const auto next = hedge_update(uni, g, std::log(2.0));
  CHECK(next[0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(next[1] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(next[2] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(std::abs(compensated_sum(next.entries()) - 3.0) <= 1e-12);
  const Vec bad{std::nan(""), 0.0, 0.0};
  CHECK_THROWS_AS(hedge_update(uni, bad, 0.1), Error);
  CHECK_THROWS_AS(hedge_update(uni, g, 0.0), Error);

  Rng rng(3);
  auto lam = DualVector::uniform(1, 2, 3, 17.0);
  for (int t = 0; t < 500; ++t) {
    Vec gains(lam.size());
    for (std::size_t k = 0; k + 1 < gains.size(); ++k) gains[k] = rng.uniform(-30.0, 30.0);
    gains.back() = 0.0;
    lam = hedge_update(lam, gains, 0.9);
    CHECK(std::abs(compensated_sum(lam.entries()) - 17.0) <= 1e-12);
  }
}

TEST_CASE("hedge external regret stays within the Hoeffding bound") {
  Rng rng(2024);
  for (int seq = 0; seq < 50; ++seq) {
    const std::size_t m = 1 + rng.index(12);
    const double C = 1.0 + 19.0 * rng.uniform(), gamma = rng.uniform(0.0, 0.1), G = 2.0 + gamma;
    const std::size_t T = 1000;
    auto lam = DualVector::uniform(1, 1, m, C);
    const std::size_t K = lam.size();
    const double rate = std::sqrt(8.0 * std::log(static_cast<double>(K)) / T) / G;
    Vec total(K, 0.0);
    double earned = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      Vec g(K, 0.0);
      // Adversarial-ish: a drifting favorite plus noise, all within width G.
      const std::size_t fav = (t / 97 + seq) % (K - 1);
      for (std::size_t k = 0; k + 1 < K; ++k)
        g[k] = std::clamp((k == fav ? 0.6 : -0.2) * G + rng.uniform(-0.3, 0.3) * G, -G / 2, G / 2);
      for (std::size_t k = 0; k < K; ++k) {
        earned += lam[k] * g[k];
        total[k] += g[k];
      }
      lam = hedge_update(lam, g, rate);
    }
    const double best = C * *std::max_element(total.begin(), total.end());
    CHECK(best - earned <= C * G * std::sqrt(T * std::log(static_cast<double>(K)) / 2.0));
  }
}

TEST_CASE("equilibrium gap") {
  const Instance inst = fix_a();
  const Dataset data = fix_a_data();
  const auto minus = RandomizedPredictor::point_mass(0, 2);
  CHECK(std::abs(equilibrium_gap(inst, data, minus, DualVector::slack_only(1, 1, 2, 20.0), 0.05, kStrict)) <=
        1e-12);

  // Single hypothesis: f is forced, so the gap is the max player's gain.
  const Instance single = inst.with_hypotheses({constant("h-", {"x0"}, {0.45})});
  const auto forced = RandomizedPredictor::point_mass(0, 1);
  const double C = 20.0;
  const double gap_slack = equilibrium_gap(single, data, forced, DualVector::slack_only(1, 1, 2, C), 0.0, kStrict);
  CHECK(gap_slack == doctest::Approx(C * 0.05).epsilon(1e-12));
  // With lambda at its own best response the two sides meet.
  const auto br = DualVector::point(1, 1, 2, C, at(Sign::kMinus, 0));
  CHECK(std::abs(equilibrium_gap(single, data, forced, br, 0.0, kStrict)) <= 1e-12);

  Rng rng(5);
  const GameTable table(inst, data, kStrict, 0.01);
  for (int i = 0; i < 100; ++i) {
    Vec e(5);
    for (auto& x : e) x = rng.uniform();
    const double s = compensated_sum(e);
    for (auto& x : e) x *= 7.0 / s;
    const double w = rng.uniform();
    CHECK(equilibrium_gap(table, RandomizedPredictor({w, 1.0 - w}), DualVector(1, 1, 2, 7.0, e)) >= -1e-9);
  }
}

TEST_CASE("brute force optimum on the threshold fixture") {
  const Instance inst = fix_a();
  const Dataset data = fix_a_data();
  CHECK(brute_force_opt(inst, data, 0.05, kStrict).value == doctest::Approx(1.0).epsilon(1e-9));
  const auto r = brute_force_opt(inst, data, 0.04, kStrict);
  CHECK(std::abs(r.value - 0.8) <= 1e-9);
  CHECK(std::abs(r.weights[0] - 0.8) <= 1e-9);
  CHECK_FALSE(brute_force_opt(inst, data, 0.0, kStrict).feasible());
  CHECK(std::isinf(brute_force_opt(inst, data, 0.0, kStrict).value));
  CHECK_THROWS_AS(brute_force_opt(inst, data, 0.05, kStrict, 0.03), Error);
  std::vector<Hypothesis> six;
  for (int k = 0; k < 6; ++k) six.push_back(constant("h" + std::to_string(k), {"x0"}, {0.1 * k}));
  CHECK_THROWS_AS(brute_force_opt(inst.with_hypotheses(six), data, 0.05, kStrict), Error);
}

TEST_CASE("solver on the threshold fixture") {
  const Instance inst = fix_a();
  const Dataset data = fix_a_data();
  GameConfig cfg;
  cfg.gamma = 0.05;
  cfg.epsilon = 0.1;
  const auto start = std::chrono::steady_clock::now();
  const auto res = solve_persuasive(inst, data, cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  MESSAGE("rounds " << res.rounds << " gap " << res.gap << " in " << secs << " s");
  CHECK(res.converged);
  CHECK(res.gap <= cfg.target());
  CHECK(expected_sender_utility(inst, data, res.predictor, kStrict) >= 0.9);
  CHECK(decision_calibration_error(inst, data, res.predictor, kStrict).max_abs() <= 0.15);
  CHECK(std::abs(equilibrium_gap(inst, data, res.predictor, res.dual, cfg.gamma, kStrict) - res.gap) <= 1e-9);
  CHECK(std::abs(compensated_sum(res.dual.entries()) - cfg.mass()) <= 1e-9);

  cfg.gamma = 2.0;
  const auto vac = solve_persuasive(inst, data, cfg);
  CHECK(std::abs(expected_sender_utility(inst, data, vac.predictor, kStrict) - 1.0) <= 1e-9);

  cfg.t_max = 0;
  CHECK_THROWS_AS(solve_persuasive(inst, data, cfg), Error);
}

TEST_CASE("solver prefers the calibrated pooling hypothesis") {
  GameConfig cfg;
  cfg.gamma = 0.0;
  cfg.epsilon = 0.1;
  const auto res = solve_persuasive(fix_b(), fix_b_data(), cfg);
  CHECK(res.predictor.weight(1) >= 0.9);
  CHECK(expected_sender_utility(fix_b(), fix_b_data(), res.predictor, kStrict) >= 0.9);
}

TEST_CASE("solver certificate and determinism") {
  const Instance inst = fix_a();
  const Dataset data = fix_a_data();
  for (double gamma : {0.03, 0.04, 0.05}) {
    GameConfig cfg;
    cfg.gamma = gamma;
    cfg.epsilon = 0.2;
    cfg.trace_stride = 1000;
    const auto a = solve_persuasive(inst, data, cfg);
    const auto b = solve_persuasive(inst, data, cfg);
    CHECK(a.predictor.weights() == b.predictor.weights());
    CHECK(a.dual.entries() == b.dual.entries());
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
      CHECK(a.trace[i].hypothesis == b.trace[i].hypothesis);
      CHECK(a.trace[i].lagrangian == b.trace[i].lagrangian);
    }
    const double C = cfg.mass();
    const double dec = decision_calibration_error(inst, data, a.predictor, kStrict).max_abs();
    CHECK(dec <= gamma + (1.0 + 2.0 * a.gap) / C + 1e-9);
    const auto bf = brute_force_opt(inst, data, gamma, kStrict);
    CHECK(expected_sender_utility(inst, data, a.predictor, kStrict) >= bf.value - 2.0 * a.gap - bf.grid_slack);
    // Averaged predictor weights are selection counts over rounds.
    for (double w : a.predictor.weights())
      CHECK(std::abs(w * static_cast<double>(a.rounds) - std::round(w * static_cast<double>(a.rounds))) <= 1e-6);
  }
}
