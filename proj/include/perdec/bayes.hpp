#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "perdec/audit.hpp"
#include "perdec/error.hpp"
#include "perdec/instance.hpp"

namespace perdec {

// Distinct empirical context means and their masses.
struct PosteriorStateSet {
  std::vector<Vec> states;
  Vec prior;
};

// Requires tabular hypotheses; means equal within 1e-12 are merged.
PosteriorStateSet posterior_states(const Instance& instance, const Dataset& data);

// Distribution of prediction values with residuals E[y - v | v].
struct PredictionDistribution {
  std::vector<Vec> support;
  Vec mass;
  std::vector<Vec> residuals;
};

PredictionDistribution signaling_view(const Instance& instance, const Dataset& data,
                                      const RandomizedPredictor& f);

// Raised when the conditional mean of an action's region is not itself
// answered by that action.
class RepresentativeOutsideRegion : public Error {
 public:
  RepresentativeOutsideRegion(std::size_t action, Vec representative, std::size_t response);
  std::size_t action() const { return action_; }
  const Vec& representative() const { return representative_; }
  std::size_t response() const { return response_; }

 private:
  std::size_t action_;
  Vec representative_;
  std::size_t response_;
};

struct PostProcessed {
  PredictionTable table;
  // Conditional mean per action; empty for actions never played.
  std::vector<std::optional<Vec>> representatives;
  Vec action_mass;
};

inline constexpr double kPerfectDecisionCalibration = 1e-10;

// Replaces each prediction by the mean prediction over its best-response
// region. Single receiver, strict response, DecCE(f) <= 1e-10.
PostProcessed post_process_to_calibrated(const Instance& instance, const Dataset& data,
                                         const RandomizedPredictor& f,
                                         TieBreak tie = TieBreak::kLowestIndex);

struct ResponseInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_closed = true;
  bool hi_closed = true;
  std::size_t action = 0;
  double length() const { return hi - lo; }
  bool contains(double p) const {
    return (p > lo || (lo_closed && p == lo)) && (p < hi || (hi_closed && p == hi));
  }
};

struct DiscretizationSet {
  Vec points;  // sorted, deduplicated within 1e-12
  Vec grid;
  Vec thresholds;
  Vec states;
  std::vector<ResponseInterval> intervals;
  double epsilon = 0.0;
};

// Best-response intervals over p in [0, 1] for a single one-dimensional
// receiver, with sender-favoring ties.
std::vector<ResponseInterval> response_intervals(const Instance& instance);

DiscretizationSet build_discretization(const Instance& instance, const Dataset& data, double epsilon);

struct RoundedPredictor {
  PredictionTable table;
  double utility_before = 0.0;
  double utility_after = 0.0;
  double decce_before = 0.0;
  double decce_after = 0.0;
  std::size_t moved = 0;  // (component, sample) pairs whose prediction changed
};

// Nearest point of S with the same best response; equidistant candidates go
// to the smaller value. Audits use sender-favoring strict responses.
double round_prediction(const Instance& instance, const DiscretizationSet& set, double value);

RoundedPredictor round_to_discretization(const Instance& instance, const Dataset& data,
                                         const RandomizedPredictor& f, const DiscretizationSet& set);

struct SignalingBound {
  double value = 0.0;
  PosteriorStateSet states;
  std::vector<Vec> scheme;  // scheme[t][a] = pi(a | state t)
  std::size_t pivots = 0;
};

inline constexpr std::size_t kMaxLpVariables = 200;

// Optimal obedient direct signaling over the empirical posterior states.
SignalingBound obedient_signaling_upper_bound(const Instance& instance, const Dataset& data);

}  // namespace perdec
