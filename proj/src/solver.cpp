#include "perdec/solver.hpp"

#include <algorithm>
#include <cmath>

#include "perdec/error.hpp"
#include "perdec/numeric.hpp"

namespace perdec {

namespace {

[[noreturn]] void fail(const std::string& message) { throw Error("game_solver", message); }

constexpr double kMassTolerance = 1e-9;

void check_shape(const DualVector& lambda, std::size_t receivers, std::size_t dim,
                 std::size_t actions) {
  if (lambda.receivers() != receivers || lambda.dim() != dim || lambda.actions() != actions)
    fail("dual vector shape does not match the instance");
}

}  // namespace

// ---------------------------------------------------------------------------
// DualVector

DualVector::DualVector(std::size_t receivers, std::size_t dim, std::size_t actions, double mass,
                       Vec entries)
    : receivers_(receivers), dim_(dim), actions_(actions), mass_(mass), entries_(std::move(entries)) {
  if (!(mass_ > 0.0) || !std::isfinite(mass_)) fail("dual mass must be positive and finite");
  if (entries_.size() != num_coordinates(receivers_, dim_, actions_))
    fail("dual vector has " + std::to_string(entries_.size()) + " entries, expected " +
         std::to_string(num_coordinates(receivers_, dim_, actions_)));
  for (double v : entries_)
    if (!(v >= 0.0) || !std::isfinite(v)) fail("dual entries must be finite and nonnegative");
  const double total = compensated_sum(entries_);
  if (std::abs(total - mass_) > kMassTolerance * std::max(1.0, mass_))
    fail("dual entries sum to " + std::to_string(total) + ", expected " + std::to_string(mass_));
}

DualVector DualVector::uniform(std::size_t receivers, std::size_t dim, std::size_t actions,
                               double mass) {
  const std::size_t k = num_coordinates(receivers, dim, actions);
  return DualVector(receivers, dim, actions, mass, Vec(k, mass / static_cast<double>(k)));
}

DualVector DualVector::slack_only(std::size_t receivers, std::size_t dim, std::size_t actions,
                                  double mass) {
  Vec e(num_coordinates(receivers, dim, actions), 0.0);
  e.back() = mass;
  return DualVector(receivers, dim, actions, mass, std::move(e));
}

DualVector DualVector::point(std::size_t receivers, std::size_t dim, std::size_t actions,
                             double mass, const ConstraintIndex& at) {
  DualVector out = slack_only(receivers, dim, actions, mass);
  out.entries_.back() = 0.0;
  out.entries_[out.index(at)] = mass;
  return out;
}

std::size_t DualVector::index(const ConstraintIndex& c) const {
  if (c.receiver >= receivers_ || c.coord >= dim_ || c.action >= actions_)
    fail("constraint index out of range");
  const std::size_t s = c.sign == Sign::kPlus ? 0 : 1;
  return ((s * receivers_ + c.receiver) * dim_ + c.coord) * actions_ + c.action;
}

ConstraintIndex DualVector::constraint(std::size_t k) const {
  if (k >= slack_index()) fail("coordinate is not a constraint");
  ConstraintIndex c;
  c.action = k % actions_;
  k /= actions_;
  c.coord = k % dim_;
  k /= dim_;
  c.receiver = k % receivers_;
  c.sign = k / receivers_ == 0 ? Sign::kPlus : Sign::kMinus;
  return c;
}

// ---------------------------------------------------------------------------
// GameConfig

double GameConfig::mass() const { return dual_mass.value_or(2.0 / epsilon); }

double GameConfig::target() const { return gap_target.value_or(epsilon / 2.0); }

std::uint64_t GameConfig::horizon(std::size_t coordinates) const {
  if (t_max) return *t_max;
  const double g = gain_bound();
  const double t = std::ceil(128.0 * g * g * std::log(static_cast<double>(coordinates)) /
                             std::pow(epsilon, 4));
  return static_cast<std::uint64_t>(std::max(1.0, t));
}

void GameConfig::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) fail("gamma must be finite and nonnegative");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) fail("epsilon must be positive");
  if (!(mass() > 0.0) || !std::isfinite(mass())) fail("dual mass C must be positive");
  if (t_max && *t_max < 1) fail("t_max must be at least 1");
  if (!(target() > 0.0)) fail("gap target must be positive");
}

// ---------------------------------------------------------------------------
// Game statistics

Vec constraint_gains(const ComponentStats& stats, std::size_t receivers, std::size_t dim,
                     std::size_t actions, double gamma) {
  const std::size_t half = receivers * dim * actions;
  if (stats.residual.size() != half) fail("statistics do not match the constraint layout");
  Vec g(2 * half + 1, 0.0);
  // residual stores E[(y - h) b], the negation of the plus-sign moment.
  for (std::size_t c = 0; c < half; ++c) {
    g[c] = -stats.residual[c] - gamma;
    g[half + c] = stats.residual[c] - gamma;
  }
  return g;
}

GameTable::GameTable(const Instance& instance, const Dataset& data, const ResponseRule& rule,
                     double gamma)
    : receivers_(instance.num_receivers()), dim_(instance.dim()), actions_(instance.num_actions()),
      coordinates_(DualVector::num_coordinates(receivers_, dim_, actions_)), gamma_(gamma) {
  instance.check_dataset(data);
  if (instance.num_hypotheses() == 0) fail("hypothesis class is empty");
  for (std::size_t k = 0; k < instance.num_hypotheses(); ++k) {
    const auto stats = component_stats(instance, data, evaluate_hypothesis(instance, data, k), rule);
    utility_.push_back(stats.utility);
    gains_.push_back(constraint_gains(stats, receivers_, dim_, actions_, gamma));
  }
}

double GameTable::loss(std::size_t k, std::span<const double> lambda) const {
  if (lambda.size() != coordinates_) fail("dual vector has the wrong length");
  const Vec& g = gains_.at(k);
  CompensatedSum s;
  s.add(-utility_[k]);
  for (std::size_t c = 0; c + 1 < coordinates_; ++c)
    if (lambda[c] != 0.0) s.add(lambda[c] * g[c]);
  return s.value();
}

std::size_t GameTable::best_response(std::span<const double> lambda) const {
  std::size_t best = 0;
  double best_loss = loss(0, lambda);
  for (std::size_t k = 1; k < utility_.size(); ++k) {
    const double l = loss(k, lambda);
    if (l < best_loss) {
      best_loss = l;
      best = k;
    }
  }
  return best;
}

double GameTable::min_loss(std::span<const double> lambda) const {
  return loss(best_response(lambda), lambda);
}

Vec GameTable::mixture_gains(const RandomizedPredictor& f) const {
  if (f.size() != utility_.size()) fail("predictor does not match the hypothesis class");
  std::vector<CompensatedSum> acc(coordinates_);
  for (std::size_t k = 0; k < f.size(); ++k)
    if (f.weight(k) != 0.0)
      for (std::size_t c = 0; c < coordinates_; ++c) acc[c].add(f.weight(k) * gains_[k][c]);
  Vec out(coordinates_);
  for (std::size_t c = 0; c < coordinates_; ++c) out[c] = acc[c].value();
  return out;
}

double GameTable::mixture_utility(const RandomizedPredictor& f) const {
  if (f.size() != utility_.size()) fail("predictor does not match the hypothesis class");
  CompensatedSum s;
  for (std::size_t k = 0; k < f.size(); ++k) s.add(f.weight(k) * utility_[k]);
  return s.value();
}

// ---------------------------------------------------------------------------
// Game operations

double lagrangian_value(const Instance& instance, const Dataset& data, const RandomizedPredictor& f,
                        const DualVector& lambda, double gamma, const ResponseRule& rule) {
  check_shape(lambda, instance.num_receivers(), instance.dim(), instance.num_actions());
  const auto stats = table_stats(instance, data, tabulate(instance, data, f), rule);
  const Vec g = constraint_gains(stats, instance.num_receivers(), instance.dim(),
                                 instance.num_actions(), gamma);
  CompensatedSum s;
  s.add(-stats.utility);
  for (std::size_t c = 0; c + 1 < g.size(); ++c) s.add(lambda[c] * g[c]);
  return s.value();
}

std::size_t erm_oracle(const Instance& instance, const Dataset& data, const DualVector& lambda,
                       double gamma, const ResponseRule& rule) {
  check_shape(lambda, instance.num_receivers(), instance.dim(), instance.num_actions());
  return GameTable(instance, data, rule, gamma).best_response(lambda.entries());
}

DualVector hedge_update(const DualVector& current, std::span<const double> gains, double rate) {
  if (gains.size() != current.size()) fail("gain vector has the wrong length");
  if (!(rate > 0.0) || !std::isfinite(rate)) fail("learning rate must be positive and finite");
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < gains.size(); ++k) {
    if (!std::isfinite(gains[k])) fail("gains must be finite");
    if (current[k] > 0.0) top = std::max(top, gains[k]);
  }
  Vec w(current.size(), 0.0);
  for (std::size_t k = 0; k < w.size(); ++k)
    if (current[k] > 0.0) w[k] = current[k] * std::exp(rate * (gains[k] - top));
  const double total = compensated_sum(w);
  for (double& v : w) v *= current.mass() / total;
  return DualVector(current.receivers(), current.dim(), current.actions(), current.mass(), std::move(w));
}

double equilibrium_gap(const GameTable& table, const RandomizedPredictor& f, const DualVector& lambda) {
  check_shape(lambda, table.receivers(), table.dim(), table.actions());
  const Vec g = table.mixture_gains(f);
  const double worst = std::max(0.0, *std::max_element(g.begin(), g.end()));
  return -table.mixture_utility(f) + lambda.mass() * worst - table.min_loss(lambda.entries());
}

double equilibrium_gap(const Instance& instance, const Dataset& data, const RandomizedPredictor& f,
                       const DualVector& lambda, double gamma, const ResponseRule& rule) {
  return equilibrium_gap(GameTable(instance, data, rule, gamma), f, lambda);
}

SolveResult solve_persuasive(const Instance& instance, const Dataset& data, const GameConfig& config) {
  config.validate();
  const GameTable table(instance, data, config.rule, config.gamma);
  const std::size_t H = table.num_hypotheses(), K = table.num_coordinates();
  const double C = config.mass();
  const std::uint64_t horizon = config.horizon(K);
  const double rate =
      std::sqrt(8.0 * std::log(static_cast<double>(K)) / static_cast<double>(horizon)) /
      config.gain_bound();

  // lambda_t = C * softmax(rate * cumulative gains), the closed form of
  // repeated hedge updates from the uniform start.
  Vec cumulative(K, 0.0), lambda(K, C / static_cast<double>(K));
  std::vector<CompensatedSum> lambda_sum(K), gain_sum(K);
  CompensatedSum utility_sum;
  std::vector<std::uint64_t> counts(H, 0);
  Vec lambda_bar(K), exps(K);

  SolveResult out{RandomizedPredictor::point_mass(0, H),
                  DualVector::uniform(table.receivers(), table.dim(), table.actions(), C),
                  {}, 0.0, 0, false, rate, horizon};

  std::uint64_t t = 0;
  double gap = std::numeric_limits<double>::infinity();
  while (t < horizon) {
    ++t;
    const std::size_t h = table.best_response(lambda);
    const Vec& g = table.gains(h);
    ++counts[h];
    utility_sum.add(table.utility(h));
    for (std::size_t c = 0; c < K; ++c) {
      lambda_sum[c].add(lambda[c]);
      gain_sum[c].add(g[c]);
    }
    if (config.trace_stride != 0 && (t - 1) % config.trace_stride == 0)
      out.trace.push_back({t, h, g, table.loss(h, lambda)});

    // Certified gap of (f_bar_t, lambda_bar_t).
    const double inv_t = 1.0 / static_cast<double>(t);
    double worst = 0.0;
    for (std::size_t c = 0; c < K; ++c) {
      lambda_bar[c] = lambda_sum[c].value() * inv_t;
      worst = std::max(worst, gain_sum[c].value() * inv_t);
    }
    gap = -utility_sum.value() * inv_t + C * worst - table.min_loss(lambda_bar);
    if (gap <= config.target()) {
      out.converged = true;
      break;
    }

    for (std::size_t c = 0; c < K; ++c) cumulative[c] += rate * g[c];
    const double top = *std::max_element(cumulative.begin(), cumulative.end());
    for (std::size_t c = 0; c < K; ++c) exps[c] = std::exp(cumulative[c] - top);
    const double total = compensated_sum(exps);
    for (std::size_t c = 0; c < K; ++c) lambda[c] = C * exps[c] / total;
  }

  Vec weights(H, 0.0);
  for (std::size_t k = 0; k < H; ++k)
    weights[k] = static_cast<double>(counts[k]) / static_cast<double>(t);
  out.predictor = RandomizedPredictor(std::move(weights));
  // Renormalize against rounding so the averaged dual carries mass C exactly.
  const double total = compensated_sum(lambda_bar);
  for (double& v : lambda_bar) v *= C / total;
  out.dual = DualVector(table.receivers(), table.dim(), table.actions(), C, lambda_bar);
  out.gap = gap;
  out.rounds = t;
  return out;
}

// ---------------------------------------------------------------------------
// Brute force

BruteForceResult brute_force_opt(const Instance& instance, const Dataset& data, double gamma,
                                 const ResponseRule& rule, double grid_step) {
  const std::size_t H = instance.num_hypotheses();
  if (H == 0) fail("hypothesis class is empty");
  if (H > kBruteForceMaxHypotheses)
    fail("brute force supports at most " + std::to_string(kBruteForceMaxHypotheses) +
         " hypotheses, got " + std::to_string(H));
  if (!(grid_step > 0.0) || grid_step > 1.0) fail("grid step must lie in (0, 1]");
  const double ratio = 1.0 / grid_step;
  const auto steps = static_cast<std::size_t>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(steps)) > 1e-9 * ratio)
    fail("grid step must divide 1 evenly");

  instance.check_dataset(data);
  std::vector<ComponentStats> stats;
  for (std::size_t k = 0; k < H; ++k)
    stats.push_back(component_stats(instance, data, evaluate_hypothesis(instance, data, k), rule));
  const std::size_t R = stats.front().residual.size();

  BruteForceResult out;
  out.step = grid_step;
  double lo = stats.front().utility, hi = lo;
  for (const auto& s : stats) {
    lo = std::min(lo, s.utility);
    hi = std::max(hi, s.utility);
  }
  out.grid_slack = grid_step * static_cast<double>(H - 1) * (hi - lo);

  std::vector<std::size_t> counts(H, 0);
  Vec w(H);
  auto evaluate = [&] {
    for (std::size_t k = 0; k < H; ++k)
      w[k] = static_cast<double>(counts[k]) / static_cast<double>(steps);
    for (std::size_t r = 0; r < R; ++r) {
      CompensatedSum v;
      for (std::size_t k = 0; k < H; ++k)
        if (counts[k] != 0) v.add(w[k] * stats[k].residual[r]);
      if (std::abs(v.value()) > gamma + 1e-12) return;
    }
    CompensatedSum u;
    for (std::size_t k = 0; k < H; ++k)
      if (counts[k] != 0) u.add(w[k] * stats[k].utility);
    if (u.value() > out.value) {
      out.value = u.value();
      out.weights = w;
    }
  };
  // Enumerate compositions of `steps` into H parts.
  auto recurse = [&](auto&& self, std::size_t k, std::size_t left) -> void {
    if (k + 1 == H) {
      counts[k] = left;
      evaluate();
      return;
    }
    for (std::size_t c = 0; c <= left; ++c) {
      counts[k] = c;
      self(self, k + 1, left - c);
    }
  };
  recurse(recurse, 0, steps);
  return out;
}

}  // namespace perdec
