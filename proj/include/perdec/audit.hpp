#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "perdec/instance.hpp"

namespace perdec {

// A weighted family of deterministic prediction maps evaluated on a dataset.
// Randomized predictors over the hypothesis class and post-processed
// predictors both reduce to this form, and every audit works on it.
class PredictionTable {
 public:
  PredictionTable(std::size_t num_samples, std::size_t dim) : num_samples_(num_samples), dim_(dim) {}

  // `predictions` is sample-major, length num_samples * dim.
  void add_component(double weight, std::vector<double> predictions);

  std::size_t num_components() const { return weights_.size(); }
  std::size_t num_samples() const { return num_samples_; }
  std::size_t dim() const { return dim_; }
  double weight(std::size_t k) const { return weights_[k]; }
  std::span<const double> prediction(std::size_t k, std::size_t s) const {
    return {values_[k].data() + s * dim_, dim_};
  }
  std::span<const double> component(std::size_t k) const { return values_[k]; }

  // Level sets are grouped exactly when true, within 1e-9 otherwise.
  bool exact_levels = true;

 private:
  std::size_t num_samples_;
  std::size_t dim_;
  std::vector<double> weights_;
  std::vector<std::vector<double>> values_;
};

// Evaluates hypothesis k on every sample (sample-major).
std::vector<double> evaluate_hypothesis(const Instance& instance, const Dataset& data, std::size_t k);

// Components with positive weight only.
PredictionTable tabulate(const Instance& instance, const Dataset& data, const RandomizedPredictor& f);

// Everything the Lagrangian game needs from one deterministic predictor:
// sender utility and residual moments E[(y_j - h_j) b_i(h, a)], laid out as
// residual[(i * d + j) * m + a].
struct ComponentStats {
  double utility = 0.0;
  Vec residual;
};

ComponentStats component_stats(const Instance& instance, const Dataset& data,
                               std::span<const double> predictions, const ResponseRule& rule);

// Weighted combination of the component statistics.
ComponentStats table_stats(const Instance& instance, const Dataset& data,
                           const PredictionTable& table, const ResponseRule& rule);

enum class Sign { kPlus, kMinus };

struct ConstraintIndex {
  Sign sign = Sign::kPlus;
  std::size_t receiver = 0;
  std::size_t coord = 0;
  std::size_t action = 0;
};

// Signed decision-calibration violations. violation(+, i, j, a) is
// E[(y_j - h_j) b_i(h, a)]; the minus sign is its negation.
class CalibrationReport {
 public:
  CalibrationReport() = default;
  CalibrationReport(std::size_t receivers, std::size_t dim, std::size_t actions, Vec residual,
                    bool smoothed);

  double violation(Sign sign, std::size_t receiver, std::size_t coord, std::size_t action) const;
  // DecCE, or SmDecCE when smoothed.
  double max_abs() const { return max_abs_; }
  // Lexicographically first signed constraint attaining max_abs.
  ConstraintIndex argmax() const { return argmax_; }
  const Vec& residuals() const { return residual_; }
  bool smoothed() const { return smoothed_; }
  std::size_t receivers() const { return receivers_; }
  std::size_t dim() const { return dim_; }
  std::size_t actions() const { return actions_; }

 private:
  std::size_t receivers_ = 0, dim_ = 0, actions_ = 0;
  Vec residual_;
  bool smoothed_ = false;
  double max_abs_ = 0.0;
  ConstraintIndex argmax_;
};

CalibrationReport decision_calibration_error(const Instance& instance, const Dataset& data,
                                             const RandomizedPredictor& f, const ResponseRule& rule);
CalibrationReport decision_calibration_error(const Instance& instance, const Dataset& data,
                                             const PredictionTable& table, const ResponseRule& rule);

// Level set of the prediction distribution with its residual E[y - v | v].
struct LevelSet {
  Vec value;
  double mass = 0.0;
  Vec residual;
};

// Groups (component, sample) pairs by prediction value, sorted
// lexicographically by value.
std::vector<LevelSet> level_sets(const Dataset& data, const PredictionTable& table);

double full_calibration_error(const Instance& instance, const Dataset& data,
                              const RandomizedPredictor& f);
double full_calibration_error(const Dataset& data, const PredictionTable& table);

enum class RegretKind { kSwap, kType, kSwapType };

const char* to_string(RegretKind kind);
RegretKind parse_regret_kind(const std::string& name);

struct RegretReport {
  RegretKind kind = RegretKind::kSwap;
  double value = 0.0;
  // Witness: audited receiver, impersonated receiver (index into instance
  // receivers followed by the alternatives), and the action remap (identity
  // for type regret).
  std::size_t receiver = 0;
  std::size_t impersonated = 0;
  std::vector<std::size_t> remap;
  // Best value per audited receiver.
  Vec per_receiver;
};

RegretReport regret_audit(const Instance& instance, const Dataset& data, const RandomizedPredictor& f,
                          const ResponseRule& rule, RegretKind kind,
                          std::span<const Receiver> alternatives = {});
RegretReport regret_audit(const Instance& instance, const Dataset& data, const PredictionTable& table,
                          const ResponseRule& rule, RegretKind kind,
                          std::span<const Receiver> alternatives = {});

// Gain of a specific deviation: receiver `receiver` responds as
// `impersonated` and then remaps its action through `remap`.
double deviation_gain(const Instance& instance, const Dataset& data, const PredictionTable& table,
                      const ResponseRule& rule, std::size_t receiver, std::size_t impersonated,
                      std::span<const std::size_t> remap, std::span<const Receiver> alternatives = {});

}  // namespace perdec
