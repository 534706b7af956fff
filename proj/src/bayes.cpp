#include "perdec/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "perdec/lp.hpp"
#include "perdec/numeric.hpp"

namespace perdec {

namespace {

constexpr double kMergeTolerance = 1e-12;

[[noreturn]] void fail(const std::string& message) { throw Error("bayesian_bridge", message); }

bool close(std::span<const double> a, std::span<const double> b, double tol) {
  for (std::size_t j = 0; j < a.size(); ++j)
    if (std::abs(a[j] - b[j]) > tol) return false;
  return true;
}

void require_single_receiver(const Instance& instance) {
  if (instance.num_receivers() != 1) fail("operation is defined for a single receiver only");
}

void require_binary_line(const Instance& instance, const Dataset& data) {
  require_single_receiver(instance);
  if (instance.dim() != 1) fail("discretization needs one-dimensional outcomes");
  instance.check_dataset(data);
  for (const auto& s : data.samples())
    if (s.outcome[0] != 0.0 && s.outcome[0] != 1.0) fail("discretization needs binary outcomes in {0,1}");
}

std::size_t played_action(const Instance& instance, std::span<const double> prediction,
                          const ResponseRule& rule) {
  const auto b = marginal_responses(instance, prediction, rule);
  return static_cast<std::size_t>(std::max_element(b[0].begin(), b[0].end()) - b[0].begin());
}

const ResponseRule kSenderFavoring = ResponseRule::strict(TieBreak::kSenderFavoring);

}  // namespace

PosteriorStateSet posterior_states(const Instance& instance, const Dataset& data) {
  if (!instance.all_tabular()) fail("posterior states need finite-context (tabular) hypotheses");
  instance.check_dataset(data);
  const std::size_t d = data.dim();
  std::map<std::string, std::pair<std::size_t, std::vector<CompensatedSum>>> groups;
  for (const auto& s : data.samples()) {
    auto& g = groups[s.context];
    if (g.second.empty()) g.second.resize(d);
    ++g.first;
    for (std::size_t j = 0; j < d; ++j) g.second[j].add(s.outcome[j]);
  }
  std::vector<std::pair<Vec, double>> raw;
  for (const auto& [ctx, g] : groups) {
    Vec mean(d);
    for (std::size_t j = 0; j < d; ++j) mean[j] = g.second[j].value() / static_cast<double>(g.first);
    raw.emplace_back(mean, static_cast<double>(g.first) / static_cast<double>(data.size()));
  }
  std::sort(raw.begin(), raw.end());
  PosteriorStateSet out;
  for (const auto& [mean, mass] : raw) {
    if (!out.states.empty() && close(out.states.back(), mean, kMergeTolerance)) {
      out.prior.back() += mass;
      continue;
    }
    out.states.push_back(mean);
    out.prior.push_back(mass);
  }
  return out;
}

PredictionDistribution signaling_view(const Instance& instance, const Dataset& data,
                                      const RandomizedPredictor& f) {
  PredictionDistribution out;
  for (auto& level : level_sets(data, tabulate(instance, data, f))) {
    out.support.push_back(std::move(level.value));
    out.mass.push_back(level.mass);
    out.residuals.push_back(std::move(level.residual));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Post-processing to full calibration

namespace {

std::string describe_outside(std::size_t action, const Vec& rep, std::size_t response) {
  std::ostringstream os;
  os << "conditional mean of the region of action " << action << " is (";
  for (std::size_t j = 0; j < rep.size(); ++j) os << (j ? ", " : "") << rep[j];
  os << "), where the receiver plays action " << response;
  return os.str();
}

}  // namespace

RepresentativeOutsideRegion::RepresentativeOutsideRegion(std::size_t action, Vec representative,
                                                         std::size_t response)
    : Error("bayesian_bridge", describe_outside(action, representative, response)),
      action_(action),
      representative_(std::move(representative)),
      response_(response) {}

PostProcessed post_process_to_calibrated(const Instance& instance, const Dataset& data,
                                         const RandomizedPredictor& f, TieBreak tie) {
  require_single_receiver(instance);
  const ResponseRule rule = ResponseRule::strict(tie);
  const PredictionTable table = tabulate(instance, data, f);
  const double dec = decision_calibration_error(instance, data, table, rule).max_abs();
  if (dec > kPerfectDecisionCalibration)
    fail("predictor must be perfectly decision calibrated (DecCE " + std::to_string(dec) + ")");

  const std::size_t n = data.size(), d = instance.dim(), m = instance.num_actions();
  std::vector<std::vector<std::size_t>> action(table.num_components(), std::vector<std::size_t>(n));
  std::vector<CompensatedSum> mass(m);
  std::vector<std::vector<CompensatedSum>> sums(m, std::vector<CompensatedSum>(d));
  // A region with a single prediction value keeps it bit-for-bit.
  std::vector<std::optional<Vec>> uniform_value(m);
  std::vector<bool> is_uniform(m, true);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < table.num_components(); ++k)
    for (std::size_t s = 0; s < n; ++s) {
      const auto p = table.prediction(k, s);
      const std::size_t a = played_action(instance, p, rule);
      action[k][s] = a;
      const double w = table.weight(k) * inv_n;
      mass[a].add(w);
      for (std::size_t j = 0; j < d; ++j) sums[a][j].add(w * p[j]);
      if (!uniform_value[a]) uniform_value[a] = Vec(p.begin(), p.end());
      else if (is_uniform[a] && !std::equal(p.begin(), p.end(), uniform_value[a]->begin())) is_uniform[a] = false;
    }

  PostProcessed out{PredictionTable(n, d), std::vector<std::optional<Vec>>(m), Vec(m, 0.0)};
  for (std::size_t a = 0; a < m; ++a) {
    out.action_mass[a] = mass[a].value();
    if (out.action_mass[a] <= 0.0) continue;
    Vec rep(d);
    for (std::size_t j = 0; j < d; ++j) rep[j] = sums[a][j].value() / out.action_mass[a];
    if (is_uniform[a]) rep = *uniform_value[a];
    const std::size_t response = played_action(instance, rep, rule);
    if (response != a) throw RepresentativeOutsideRegion(a, rep, response);
    out.representatives[a] = std::move(rep);
  }
  for (std::size_t k = 0; k < table.num_components(); ++k) {
    Vec values(n * d);
    for (std::size_t s = 0; s < n; ++s) {
      const Vec& rep = *out.representatives[action[k][s]];
      std::copy(rep.begin(), rep.end(), values.begin() + static_cast<std::ptrdiff_t>(s * d));
    }
    out.table.add_component(table.weight(k), std::move(values));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Discretization

std::vector<ResponseInterval> response_intervals(const Instance& instance) {
  require_single_receiver(instance);
  if (instance.dim() != 1) fail("response intervals need one-dimensional outcomes");
  const Receiver& r = instance.receiver(0);
  const std::size_t m = r.num_actions();
  Vec cuts{0.0, 1.0};
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b) {
      const double dw = r.weights(a)[0] - r.weights(b)[0];
      if (dw == 0.0) continue;
      const double p = (r.offset(b) - r.offset(a)) / dw;
      if (p > 0.0 && p < 1.0) cuts.push_back(p);
    }
  std::sort(cuts.begin(), cuts.end());
  Vec points;
  for (double c : cuts)
    if (points.empty() || c - points.back() > kMergeTolerance) points.push_back(c);

  // Alternate breakpoints and open segments, then merge runs of one action.
  struct Piece {
    double lo, hi;
    bool is_point;
    std::size_t action;
  };
  std::vector<Piece> pieces;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const Vec at{points[k]};
    pieces.push_back({points[k], points[k], true, played_action(instance, at, kSenderFavoring)});
    if (k + 1 < points.size()) {
      const Vec mid{0.5 * (points[k] + points[k + 1])};
      pieces.push_back({points[k], points[k + 1], false, played_action(instance, mid, kSenderFavoring)});
    }
  }
  std::vector<ResponseInterval> out;
  for (std::size_t k = 0; k < pieces.size();) {
    std::size_t e = k;
    while (e + 1 < pieces.size() && pieces[e + 1].action == pieces[k].action) ++e;
    out.push_back({pieces[k].lo, pieces[e].hi, pieces[k].is_point, pieces[e].is_point, pieces[k].action});
    k = e + 1;
  }
  return out;
}

DiscretizationSet build_discretization(const Instance& instance, const Dataset& data, double epsilon) {
  require_binary_line(instance, data);
  if (!(epsilon > 0.0)) fail("epsilon must be positive");
  DiscretizationSet out;
  out.epsilon = epsilon;
  out.intervals = response_intervals(instance);
  double shortest = 1.0;
  for (const auto& iv : out.intervals) shortest = std::min(shortest, iv.length());
  if (!(epsilon < shortest))
    fail("epsilon " + std::to_string(epsilon) + " must be below the shortest best-response interval (" +
         std::to_string(shortest) + ")");

  for (std::size_t k = 0;; ++k) {
    const double g = static_cast<double>(k) * epsilon;
    if (g > 1.0 + kMergeTolerance) break;
    out.grid.push_back(std::min(g, 1.0));
  }
  for (const auto& iv : out.intervals) {
    if (iv.lo > 0.0) out.thresholds.push_back(iv.lo);
    if (iv.hi < 1.0) out.thresholds.push_back(iv.hi);
  }
  std::sort(out.thresholds.begin(), out.thresholds.end());
  out.thresholds.erase(std::unique(out.thresholds.begin(), out.thresholds.end()), out.thresholds.end());
  for (const auto& s : posterior_states(instance, data).states) out.states.push_back(s[0]);

  Vec all = out.grid;
  all.insert(all.end(), out.thresholds.begin(), out.thresholds.end());
  all.insert(all.end(), out.states.begin(), out.states.end());
  std::sort(all.begin(), all.end());
  for (double p : all)
    if (out.points.empty() || p - out.points.back() > kMergeTolerance) out.points.push_back(p);
  return out;
}

double round_prediction(const Instance& instance, const DiscretizationSet& set, double value) {
  if (!(value >= 0.0 && value <= 1.0)) fail("rounded predictions must lie in [0,1]");
  const Vec v{value};
  const std::size_t a = played_action(instance, v, kSenderFavoring);
  std::optional<double> best;
  double best_dist = 0.0;
  for (double p : set.points) {
    const Vec q{p};
    if (played_action(instance, q, kSenderFavoring) != a) continue;
    const double dist = std::abs(p - value);
    // Points are ascending, so keeping the first within tolerance favors the smaller value.
    if (!best || dist < best_dist - kMergeTolerance) {
      best = p;
      best_dist = dist;
    }
  }
  if (!best) fail("no discretization point shares the best response of " + std::to_string(value));
  return *best;
}

RoundedPredictor round_to_discretization(const Instance& instance, const Dataset& data,
                                         const RandomizedPredictor& f, const DiscretizationSet& set) {
  require_binary_line(instance, data);
  const PredictionTable table = tabulate(instance, data, f);
  RoundedPredictor out{PredictionTable(data.size(), 1)};
  out.table.exact_levels = table.exact_levels;
  std::map<double, double> cache;
  for (std::size_t k = 0; k < table.num_components(); ++k) {
    Vec values(data.size());
    for (std::size_t s = 0; s < data.size(); ++s) {
      const double v = table.prediction(k, s)[0];
      auto it = cache.find(v);
      if (it == cache.end()) it = cache.emplace(v, round_prediction(instance, set, v)).first;
      values[s] = it->second;
      out.moved += values[s] != v;
    }
    out.table.add_component(table.weight(k), std::move(values));
  }
  out.utility_before = table_stats(instance, data, table, kSenderFavoring).utility;
  out.utility_after = table_stats(instance, data, out.table, kSenderFavoring).utility;
  out.decce_before = decision_calibration_error(instance, data, table, kSenderFavoring).max_abs();
  out.decce_after = decision_calibration_error(instance, data, out.table, kSenderFavoring).max_abs();
  return out;
}

// ---------------------------------------------------------------------------
// Persuasion LP

SignalingBound obedient_signaling_upper_bound(const Instance& instance, const Dataset& data) {
  require_single_receiver(instance);
  SignalingBound out;
  out.states = posterior_states(instance, data);
  const std::size_t S = out.states.states.size(), m = instance.num_actions();
  if (S * m > kMaxLpVariables)
    fail("LP has " + std::to_string(S * m) + " variables, cap is " + std::to_string(kMaxLpVariables));
  const Receiver& r = instance.receiver(0);
  const auto& mu = out.states.prior;
  auto var = [m](std::size_t t, std::size_t a) { return t * m + a; };

  LinearProgram lp;
  lp.objective.assign(S * m, 0.0);
  for (std::size_t t = 0; t < S; ++t) {
    const Vec& theta = out.states.states[t];
    for (std::size_t a = 0; a < m; ++a)
      lp.objective[var(t, a)] = mu[t] * instance.sender().value(a, theta);
    Vec row(S * m, 0.0);
    for (std::size_t a = 0; a < m; ++a) row[var(t, a)] = 1.0;
    lp.eq_rows.push_back(row);
    lp.eq_rhs.push_back(1.0);
  }
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      if (a == b) continue;
      Vec row(S * m, 0.0);
      for (std::size_t t = 0; t < S; ++t) {
        const Vec& theta = out.states.states[t];
        row[var(t, a)] = mu[t] * (r.value(a, theta) - r.value(b, theta));
      }
      lp.ge_rows.push_back(row);
      lp.ge_rhs.push_back(0.0);
    }
  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal) fail("obedience LP did not reach an optimum");
  out.value = sol.value;
  out.pivots = sol.pivots;
  out.scheme.assign(S, Vec(m));
  for (std::size_t t = 0; t < S; ++t)
    for (std::size_t a = 0; a < m; ++a) out.scheme[t][a] = sol.x[var(t, a)];
  return out;
}

}  // namespace perdec
