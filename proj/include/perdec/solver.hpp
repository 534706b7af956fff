#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "perdec/audit.hpp"
#include "perdec/instance.hpp"

namespace perdec {

// Multipliers over (sign, receiver, coord, action) followed by one slack
// coordinate; entries are nonnegative with L1 mass C.
class DualVector {
 public:
  DualVector(std::size_t receivers, std::size_t dim, std::size_t actions, double mass, Vec entries);
  // C / K on every coordinate, slack included.
  static DualVector uniform(std::size_t receivers, std::size_t dim, std::size_t actions, double mass);
  // All mass on the slack coordinate.
  static DualVector slack_only(std::size_t receivers, std::size_t dim, std::size_t actions,
                               double mass);
  // All mass on one constraint.
  static DualVector point(std::size_t receivers, std::size_t dim, std::size_t actions, double mass,
                          const ConstraintIndex& at);

  static std::size_t num_coordinates(std::size_t receivers, std::size_t dim, std::size_t actions) {
    return 2 * receivers * dim * actions + 1;
  }

  std::size_t size() const { return entries_.size(); }
  std::size_t slack_index() const { return entries_.size() - 1; }
  std::size_t index(const ConstraintIndex& c) const;
  ConstraintIndex constraint(std::size_t k) const;
  double mass() const { return mass_; }
  const Vec& entries() const { return entries_; }
  double operator[](std::size_t k) const { return entries_[k]; }
  std::size_t receivers() const { return receivers_; }
  std::size_t dim() const { return dim_; }
  std::size_t actions() const { return actions_; }

 private:
  std::size_t receivers_, dim_, actions_;
  double mass_;
  Vec entries_;
};

struct GameConfig {
  double gamma = 0.0;
  double epsilon = 0.1;
  std::optional<double> dual_mass;        // C, default 2 / epsilon
  std::optional<std::uint64_t> t_max;     // default from the Hedge bound
  std::optional<double> gap_target;       // default epsilon / 2
  ResponseRule rule;
  std::uint64_t seed = 0;
  // Record every k-th round in the trace; 0 keeps none.
  std::size_t trace_stride = 0;

  double mass() const;
  double target() const;
  // Gain bound G = 2 + gamma.
  double gain_bound() const { return 2.0 + gamma; }
  std::uint64_t horizon(std::size_t coordinates) const;
  void validate() const;
};

// Per-coordinate dual payoffs s * E[(h - y) b] - gamma of a predictor with the
// given statistics; slack payoff 0.
Vec constraint_gains(const ComponentStats& stats, std::size_t receivers, std::size_t dim,
                     std::size_t actions, double gamma);

// Statistics of every hypothesis, computed once per (dataset, rule).
class GameTable {
 public:
  GameTable(const Instance& instance, const Dataset& data, const ResponseRule& rule, double gamma);

  std::size_t num_hypotheses() const { return utility_.size(); }
  std::size_t num_coordinates() const { return coordinates_; }
  double utility(std::size_t k) const { return utility_[k]; }
  const Vec& gains(std::size_t k) const { return gains_[k]; }
  double gamma() const { return gamma_; }
  std::size_t receivers() const { return receivers_; }
  std::size_t dim() const { return dim_; }
  std::size_t actions() const { return actions_; }

  // L(h_k, lambda).
  double loss(std::size_t k, std::span<const double> lambda) const;
  // Lowest-index argmin of loss.
  std::size_t best_response(std::span<const double> lambda) const;
  double min_loss(std::span<const double> lambda) const;
  // Gains of a mixture.
  Vec mixture_gains(const RandomizedPredictor& f) const;
  double mixture_utility(const RandomizedPredictor& f) const;

 private:
  std::size_t receivers_, dim_, actions_, coordinates_;
  double gamma_;
  Vec utility_;
  std::vector<Vec> gains_;
};

double lagrangian_value(const Instance& instance, const Dataset& data, const RandomizedPredictor& f,
                        const DualVector& lambda, double gamma, const ResponseRule& rule);

std::size_t erm_oracle(const Instance& instance, const Dataset& data, const DualVector& lambda,
                       double gamma, const ResponseRule& rule);

DualVector hedge_update(const DualVector& current, std::span<const double> gains, double rate);

double equilibrium_gap(const Instance& instance, const Dataset& data, const RandomizedPredictor& f,
                       const DualVector& lambda, double gamma, const ResponseRule& rule);
// Same, from precomputed statistics.
double equilibrium_gap(const GameTable& table, const RandomizedPredictor& f, const DualVector& lambda);

struct TraceRecord {
  std::uint64_t round = 0;
  std::size_t hypothesis = 0;
  Vec gains;
  double lagrangian = 0.0;
};

struct SolveResult {
  RandomizedPredictor predictor;
  DualVector dual;  // average of the played duals
  std::vector<TraceRecord> trace;
  double gap = 0.0;
  std::uint64_t rounds = 0;
  bool converged = false;  // gap reached the target before t_max
  double rate = 0.0;
  std::uint64_t horizon = 0;
};

SolveResult solve_persuasive(const Instance& instance, const Dataset& data, const GameConfig& config);

struct BruteForceResult {
  // -infinity when no grid point is feasible.
  double value = -std::numeric_limits<double>::infinity();
  Vec weights;
  double step = 0.01;
  double grid_slack = 0.0;
  bool feasible() const { return value > -std::numeric_limits<double>::infinity(); }
};

inline constexpr std::size_t kBruteForceMaxHypotheses = 5;

BruteForceResult brute_force_opt(const Instance& instance, const Dataset& data, double gamma,
                                 const ResponseRule& rule, double grid_step = 0.01);

}  // namespace perdec
