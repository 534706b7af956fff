#include "perdec/audit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "perdec/error.hpp"
#include "perdec/numeric.hpp"

namespace perdec {

namespace {

[[noreturn]] void fail(const std::string& message) { throw Error("calibration_audit", message); }

constexpr double kLevelTolerance = 1e-9;

void check_predictor(const Instance& instance, const RandomizedPredictor& f) {
  if (f.size() != instance.num_hypotheses())
    fail("predictor has " + std::to_string(f.size()) + " weights for " +
         std::to_string(instance.num_hypotheses()) + " hypotheses");
}

void check_table(const Dataset& data, const PredictionTable& table) {
  if (table.num_samples() != data.size()) fail("prediction table does not match the dataset size");
  if (table.dim() != data.dim()) fail("prediction table dimension does not match the dataset");
}

}  // namespace

void PredictionTable::add_component(double weight, std::vector<double> predictions) {
  if (predictions.size() != num_samples_ * dim_) fail("component has the wrong number of predictions");
  if (!(weight >= 0.0)) fail("component weight must be nonnegative");
  weights_.push_back(weight);
  values_.push_back(std::move(predictions));
}

std::vector<double> evaluate_hypothesis(const Instance& instance, const Dataset& data, std::size_t k) {
  const auto& h = instance.hypothesis(k);
  const std::size_t d = instance.dim();
  std::vector<double> out;
  out.reserve(data.size() * d);
  for (const auto& s : data.samples()) {
    const Vec p = h.predict(s);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

PredictionTable tabulate(const Instance& instance, const Dataset& data, const RandomizedPredictor& f) {
  instance.check_dataset(data);
  check_predictor(instance, f);
  PredictionTable table(data.size(), instance.dim());
  table.exact_levels = instance.all_tabular();
  for (std::size_t k = 0; k < f.size(); ++k)
    if (f.weight(k) > 0.0) table.add_component(f.weight(k), evaluate_hypothesis(instance, data, k));
  return table;
}

ComponentStats component_stats(const Instance& instance, const Dataset& data,
                               std::span<const double> predictions, const ResponseRule& rule) {
  const std::size_t n = data.size(), d = instance.dim(), m = instance.num_actions(),
                    receivers = instance.num_receivers();
  if (data.dim() != d) fail("dataset dimension does not match the instance");
  if (predictions.size() != n * d) fail("prediction vector has the wrong length");
  CompensatedSum utility;
  std::vector<CompensatedSum> residual(receivers * d * m);
  for (std::size_t s = 0; s < n; ++s) {
    const auto pred = predictions.subspan(s * d, d);
    const auto& y = data[s].outcome;
    const auto marginals = marginal_responses(instance, pred, rule);
    utility.add(sender_payoff_from_marginals(instance, marginals, y));
    for (std::size_t i = 0; i < receivers; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const double gap = y[j] - pred[j];
        for (std::size_t a = 0; a < m; ++a)
          if (marginals[i][a] != 0.0) residual[(i * d + j) * m + a].add(gap * marginals[i][a]);
      }
  }
  ComponentStats out;
  const double inv_n = 1.0 / static_cast<double>(n);
  out.utility = utility.value() * inv_n;
  out.residual.resize(residual.size());
  for (std::size_t k = 0; k < residual.size(); ++k) out.residual[k] = residual[k].value() * inv_n;
  return out;
}

ComponentStats table_stats(const Instance& instance, const Dataset& data,
                           const PredictionTable& table, const ResponseRule& rule) {
  check_table(data, table);
  const std::size_t size = instance.num_receivers() * instance.dim() * instance.num_actions();
  CompensatedSum utility;
  std::vector<CompensatedSum> residual(size);
  for (std::size_t k = 0; k < table.num_components(); ++k) {
    const auto stats = component_stats(instance, data, table.component(k), rule);
    const double w = table.weight(k);
    utility.add(w * stats.utility);
    for (std::size_t c = 0; c < size; ++c) residual[c].add(w * stats.residual[c]);
  }
  ComponentStats out;
  out.utility = utility.value();
  out.residual.resize(size);
  for (std::size_t c = 0; c < size; ++c) out.residual[c] = residual[c].value();
  return out;
}

// ---------------------------------------------------------------------------
// Decision calibration

CalibrationReport::CalibrationReport(std::size_t receivers, std::size_t dim, std::size_t actions,
                                     Vec residual, bool smoothed)
    : receivers_(receivers), dim_(dim), actions_(actions), residual_(std::move(residual)),
      smoothed_(smoothed) {
  if (residual_.size() != receivers_ * dim_ * actions_) fail("residual table has the wrong shape");
  // Both signs are scanned, so the largest signed violation is the largest
  // absolute one; scan order keeps the witness lexicographic.
  bool first = true;
  for (Sign sign : {Sign::kPlus, Sign::kMinus})
    for (std::size_t i = 0; i < receivers_; ++i)
      for (std::size_t j = 0; j < dim_; ++j)
        for (std::size_t a = 0; a < actions_; ++a) {
          const double v = violation(sign, i, j, a);
          if (first || v > max_abs_) {
            max_abs_ = v;
            argmax_ = {sign, i, j, a};
            first = false;
          }
        }
}

double CalibrationReport::violation(Sign sign, std::size_t receiver, std::size_t coord,
                                    std::size_t action) const {
  const double r = residual_.at((receiver * dim_ + coord) * actions_ + action);
  return sign == Sign::kPlus ? r : -r;
}

CalibrationReport decision_calibration_error(const Instance& instance, const Dataset& data,
                                             const RandomizedPredictor& f, const ResponseRule& rule) {
  return decision_calibration_error(instance, data, tabulate(instance, data, f), rule);
}

CalibrationReport decision_calibration_error(const Instance& instance, const Dataset& data,
                                             const PredictionTable& table, const ResponseRule& rule) {
  auto stats = table_stats(instance, data, table, rule);
  return CalibrationReport(instance.num_receivers(), instance.dim(), instance.num_actions(),
                           std::move(stats.residual), rule.is_quantal());
}

// ---------------------------------------------------------------------------
// Full calibration

std::vector<LevelSet> level_sets(const Dataset& data, const PredictionTable& table) {
  check_table(data, table);
  const std::size_t d = table.dim(), n = table.num_samples();
  std::vector<std::pair<std::size_t, std::size_t>> entries;
  entries.reserve(table.num_components() * n);
  for (std::size_t k = 0; k < table.num_components(); ++k)
    if (table.weight(k) > 0.0)
      for (std::size_t s = 0; s < n; ++s) entries.emplace_back(k, s);
  std::stable_sort(entries.begin(), entries.end(), [&](const auto& lhs, const auto& rhs) {
    const auto a = table.prediction(lhs.first, lhs.second);
    const auto b = table.prediction(rhs.first, rhs.second);
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  });

  const double tol = table.exact_levels ? 0.0 : kLevelTolerance;
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<LevelSet> out;
  std::vector<CompensatedSum> acc;
  CompensatedSum mass;
  auto flush = [&] {
    if (out.empty()) return;
    auto& level = out.back();
    level.mass = mass.value();
    level.residual.resize(d);
    for (std::size_t j = 0; j < d; ++j) level.residual[j] = acc[j].value() / level.mass;
  };
  for (const auto& [k, s] : entries) {
    const auto p = table.prediction(k, s);
    bool same = !out.empty();
    if (same)
      for (std::size_t j = 0; j < d && same; ++j) same = std::abs(p[j] - out.back().value[j]) <= tol;
    if (!same) {
      flush();
      out.push_back({Vec(p.begin(), p.end()), 0.0, {}});
      acc.assign(d, CompensatedSum{});
      mass = CompensatedSum{};
    }
    const double w = table.weight(k) * inv_n;
    mass.add(w);
    for (std::size_t j = 0; j < d; ++j) acc[j].add(w * (data[s].outcome[j] - p[j]));
  }
  flush();
  return out;
}

double full_calibration_error(const Instance& instance, const Dataset& data,
                              const RandomizedPredictor& f) {
  return full_calibration_error(data, tabulate(instance, data, f));
}

double full_calibration_error(const Dataset& data, const PredictionTable& table) {
  double worst = 0.0;
  for (const auto& level : level_sets(data, table))
    for (double r : level.residual) worst = std::max(worst, std::abs(r));
  return worst;
}

// ---------------------------------------------------------------------------
// Regret

const char* to_string(RegretKind kind) {
  switch (kind) {
    case RegretKind::kSwap: return "swap";
    case RegretKind::kType: return "type";
    case RegretKind::kSwapType: return "swap-type";
  }
  return "?";
}

RegretKind parse_regret_kind(const std::string& name) {
  if (name == "swap") return RegretKind::kSwap;
  if (name == "type") return RegretKind::kType;
  if (name == "swap-type" || name == "swap_type") return RegretKind::kSwapType;
  fail("invalid regret kind '" + name + "'");
}

namespace {

// payoff[((i * R + r) * m + a) * m + b] = E[v_i(b, y) * resp_r(h, a)] where i
// ranges over instance receivers and r over instance receivers followed by
// the alternatives.
struct RegretTensor {
  std::size_t receivers = 0, responders = 0, actions = 0;
  Vec payoff;

  double at(std::size_t i, std::size_t r, std::size_t a, std::size_t b) const {
    return payoff[((i * responders + r) * actions + a) * actions + b];
  }
  double baseline(std::size_t i) const {
    CompensatedSum s;
    for (std::size_t a = 0; a < actions; ++a) s.add(at(i, i, a, a));
    return s.value();
  }
};

RegretTensor regret_tensor(const Instance& instance, const Dataset& data, const PredictionTable& table,
                           const ResponseRule& rule, std::span<const Receiver> alternatives) {
  check_table(data, table);
  const std::size_t n = data.size(), d = instance.dim(), m = instance.num_actions(),
                    receivers = instance.num_receivers();
  for (const auto& alt : alternatives)
    if (alt.num_actions() != m || alt.dim() != d)
      fail("alternative receivers must match the instance's action count and dimension");
  RegretTensor t{receivers, receivers + alternatives.size(), m, {}};
  std::vector<CompensatedSum> acc(receivers * t.responders * m * m);
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<Vec> values(receivers, Vec(m));
  // Alternatives are outside the sender's joint tie-breaking.
  const ResponseRule alt_rule = rule.is_quantal() ? rule : ResponseRule::strict();
  for (std::size_t k = 0; k < table.num_components(); ++k) {
    const double w = table.weight(k) * inv_n;
    if (w == 0.0) continue;
    for (std::size_t s = 0; s < n; ++s) {
      const auto pred = table.prediction(k, s);
      const auto& y = data[s].outcome;
      auto resp = marginal_responses(instance, pred, rule);
      for (const auto& alt : alternatives) resp.push_back(receiver_response(alt, pred, alt_rule));
      for (std::size_t i = 0; i < receivers; ++i)
        for (std::size_t b = 0; b < m; ++b) values[i][b] = instance.receiver(i).value(b, y);
      for (std::size_t i = 0; i < receivers; ++i)
        for (std::size_t r = 0; r < t.responders; ++r)
          for (std::size_t a = 0; a < m; ++a) {
            const double p = resp[r][a];
            if (p == 0.0) continue;
            for (std::size_t b = 0; b < m; ++b)
              acc[((i * t.responders + r) * m + a) * m + b].add(w * p * values[i][b]);
          }
    }
  }
  t.payoff.resize(acc.size());
  for (std::size_t c = 0; c < acc.size(); ++c) t.payoff[c] = acc[c].value();
  return t;
}

}  // namespace

RegretReport regret_audit(const Instance& instance, const Dataset& data, const RandomizedPredictor& f,
                          const ResponseRule& rule, RegretKind kind,
                          std::span<const Receiver> alternatives) {
  return regret_audit(instance, data, tabulate(instance, data, f), rule, kind, alternatives);
}

RegretReport regret_audit(const Instance& instance, const Dataset& data, const PredictionTable& table,
                          const ResponseRule& rule, RegretKind kind,
                          std::span<const Receiver> alternatives) {
  if (kind != RegretKind::kSwap && instance.num_receivers() < 2 && alternatives.empty())
    fail(std::string(to_string(kind)) + " regret needs two receivers or an alternative receiver");
  const auto t = regret_tensor(instance, data, table, rule, alternatives);
  const std::size_t m = t.actions;

  RegretReport report;
  report.kind = kind;
  report.per_receiver.assign(t.receivers, 0.0);
  bool first = true;
  for (std::size_t i = 0; i < t.receivers; ++i) {
    const double baseline = t.baseline(i);
    bool first_i = true;
    // Swap regret only compares a receiver with itself.
    const std::size_t r_begin = kind == RegretKind::kSwap ? i : 0;
    const std::size_t r_end = kind == RegretKind::kSwap ? i + 1 : t.responders;
    for (std::size_t r = r_begin; r < r_end; ++r) {
      // The best remap decomposes per played action; ties keep the action.
      std::vector<std::size_t> remap(m);
      CompensatedSum total;
      for (std::size_t a = 0; a < m; ++a) {
        std::size_t best = a;
        if (kind != RegretKind::kType)
          for (std::size_t b = 0; b < m; ++b)
            if (t.at(i, r, a, b) > t.at(i, r, a, best)) best = b;
        remap[a] = best;
        total.add(t.at(i, r, a, best));
      }
      const double value = total.value() - baseline;
      if (first_i || value > report.per_receiver[i]) {
        report.per_receiver[i] = value;
        first_i = false;
      }
      if (first || value > report.value) {
        report.value = value;
        report.receiver = i;
        report.impersonated = r;
        report.remap = remap;
        first = false;
      }
    }
  }
  return report;
}

double deviation_gain(const Instance& instance, const Dataset& data, const PredictionTable& table,
                      const ResponseRule& rule, std::size_t receiver, std::size_t impersonated,
                      std::span<const std::size_t> remap, std::span<const Receiver> alternatives) {
  const auto t = regret_tensor(instance, data, table, rule, alternatives);
  if (receiver >= t.receivers || impersonated >= t.responders) fail("deviation index out of range");
  if (remap.size() != t.actions) fail("remap must list one target per action");
  CompensatedSum total;
  for (std::size_t a = 0; a < t.actions; ++a) {
    if (remap[a] >= t.actions) fail("remap target out of range");
    total.add(t.at(receiver, impersonated, a, remap[a]));
  }
  return total.value() - t.baseline(receiver);
}

}  // namespace perdec
