#include "perdec/instance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "perdec/error.hpp"
#include "perdec/numeric.hpp"

namespace perdec {

namespace {

constexpr double kRangeTolerance = 1e-12;

[[noreturn]] void fail(const std::string& message) { throw Error("instance_model", message); }

double l1_norm(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

double dot(const Vec& w, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * y[j];
  return s;
}

// The extremes of c + w.y over a box sit at the corners picked coordinatewise
// by sign(w_j), so corner enumeration reduces to one pass over w.
void check_affine_range(const Vec& w, double c, const OutcomeBox& box, const std::string& what) {
  double lo = c, hi = c;
  for (double x : w) {
    lo += std::min(x * box.lo, x * box.hi);
    hi += std::max(x * box.lo, x * box.hi);
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) fail(what + " has non-finite coefficients");
  if (lo < -kRangeTolerance || hi > 1.0 + kRangeTolerance) {
    std::ostringstream os;
    os << what << " leaves [0,1] over the outcome box [" << box.lo << ", " << box.hi
       << "]^d (range [" << lo << ", " << hi << "])";
    fail(os.str());
  }
}

void check_box(const OutcomeBox& box) {
  if (!(box.lo >= -1.0 && box.hi <= 1.0 && box.lo < box.hi))
    fail("outcome box must satisfy -1 <= lo < hi <= 1");
}

void check_in_box(std::span<const double> v, const std::string& what) {
  for (double x : v)
    if (!(x >= -1.0 && x <= 1.0)) fail(what + " has an entry outside [-1,1]");
}

}  // namespace

// ---------------------------------------------------------------------------
// Receiver / SenderUtility

Receiver::Receiver(std::vector<Vec> action_weights, Vec action_offsets, OutcomeBox box)
    : weights_(std::move(action_weights)), offsets_(std::move(action_offsets)), box_(box) {
  check_box(box_);
  if (weights_.empty()) fail("receiver needs at least one action");
  if (weights_.size() != offsets_.size()) fail("receiver weight/offset count mismatch");
  const std::size_t d = weights_.front().size();
  if (d == 0) fail("receiver weights must have positive dimension");
  for (std::size_t a = 0; a < weights_.size(); ++a) {
    if (weights_[a].size() != d) fail("receiver action weights have inconsistent dimension");
    check_affine_range(weights_[a], offsets_[a], box_, "receiver action " + std::to_string(a));
    lipschitz_ = std::max(lipschitz_, l1_norm(weights_[a]));
  }
}

double Receiver::utility(std::size_t action, std::span<const double> outcome) const {
  if (action >= num_actions()) fail("action index out of range");
  if (outcome.size() != dim()) fail("outcome dimension mismatch");
  return value(action, outcome);
}

double Receiver::value(std::size_t action, std::span<const double> outcome) const {
  return dot(weights_[action], outcome) + offsets_[action];
}

SenderUtility::SenderUtility(Vec alpha, std::vector<Vec> beta, OutcomeBox box)
    : alpha_(std::move(alpha)), beta_(std::move(beta)), box_(box) {
  check_box(box_);
  if (alpha_.empty()) fail("sender utility needs at least one joint action");
  if (alpha_.size() != beta_.size()) fail("sender alpha/beta count mismatch");
  const std::size_t d = beta_.front().size();
  for (std::size_t k = 0; k < alpha_.size(); ++k) {
    if (beta_[k].size() != d) fail("sender beta vectors have inconsistent dimension");
    check_affine_range(beta_[k], alpha_[k], box_, "sender joint action " + std::to_string(k));
  }
}

double SenderUtility::value(std::size_t joint, std::span<const double> outcome) const {
  return alpha_[joint] + dot(beta_[joint], outcome);
}

// ---------------------------------------------------------------------------
// Dataset / Hypothesis

Dataset::Dataset(std::vector<Sample> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) fail("dataset must contain at least one sample");
  const std::size_t d = samples_.front().outcome.size();
  if (d == 0) fail("outcomes must have positive dimension");
  for (const auto& s : samples_) {
    if (s.outcome.size() != d) fail("dataset outcomes have inconsistent dimension");
    check_in_box(s.outcome, "outcome");
  }
}

Vec Dataset::mean_outcome() const {
  const std::size_t d = dim();
  std::vector<CompensatedSum> acc(d);
  for (const auto& s : samples_)
    for (std::size_t j = 0; j < d; ++j) acc[j].add(s.outcome[j]);
  Vec mean(d);
  for (std::size_t j = 0; j < d; ++j) mean[j] = acc[j].value() / static_cast<double>(size());
  return mean;
}

Hypothesis::Hypothesis(std::string id, TabularMap map) : id_(std::move(id)), map_(std::move(map)) {
  const auto& preds = std::get<TabularMap>(map_).predictions;
  if (preds.empty()) fail("tabular hypothesis '" + id_ + "' has no contexts");
  dim_ = preds.begin()->second.size();
  for (const auto& [ctx, v] : preds) {
    if (v.size() != dim_ || dim_ == 0)
      fail("tabular hypothesis '" + id_ + "' has inconsistent prediction dimension");
    check_in_box(v, "prediction of '" + id_ + "' at '" + ctx + "'");
  }
}

Hypothesis::Hypothesis(std::string id, AffineMap map) : id_(std::move(id)), map_(std::move(map)) {
  const auto& m = std::get<AffineMap>(map_);
  dim_ = m.offset.size();
  if (dim_ == 0 || m.matrix.size() != dim_)
    fail("affine hypothesis '" + id_ + "' matrix rows must match offset length");
  const std::size_t p = m.matrix.front().size();
  for (const auto& row : m.matrix)
    if (row.size() != p) fail("affine hypothesis '" + id_ + "' has ragged matrix");
}

Vec Hypothesis::predict(const Sample& sample) const {
  if (const auto* tab = std::get_if<TabularMap>(&map_)) {
    auto it = tab->predictions.find(sample.context);
    if (it == tab->predictions.end())
      fail("hypothesis '" + id_ + "' has no prediction for context '" + sample.context + "'");
    return it->second;
  }
  const auto& m = std::get<AffineMap>(map_);
  const std::size_t p = m.matrix.front().size();
  if (sample.features.size() != p)
    fail("hypothesis '" + id_ + "' expects " + std::to_string(p) + " features");
  Vec out(dim_);
  for (std::size_t j = 0; j < dim_; ++j)
    out[j] = std::clamp(dot(m.matrix[j], sample.features) + m.offset[j], -1.0, 1.0);
  return out;
}

// ---------------------------------------------------------------------------
// Instance

Instance::Instance(std::size_t dim, std::vector<Receiver> receivers, SenderUtility sender,
                   std::vector<Hypothesis> hypotheses, std::size_t joint_action_cap,
                   std::optional<OutcomeModel> outcome_model)
    : dim_(dim),
      receivers_(std::move(receivers)),
      sender_(std::move(sender)),
      hypotheses_(std::move(hypotheses)),
      joint_action_cap_(joint_action_cap),
      outcome_model_(std::move(outcome_model)) {
  if (dim_ == 0) fail("outcome dimension must be positive");
  if (receivers_.empty()) fail("instance needs at least one receiver");
  if (hypotheses_.empty()) fail("hypothesis class must be non-empty");
  if (joint_action_cap_ == 0) fail("joint action cap must be positive");
  const std::size_t m = receivers_.front().num_actions();
  if (m < 2) fail("receivers need at least two actions");
  std::size_t joint = 1;
  for (const auto& r : receivers_) {
    if (r.num_actions() != m) fail("all receivers must share the same action count");
    if (r.dim() != dim_) fail("receiver dimension does not match instance dimension");
    if (!(r.box() == receivers_.front().box())) fail("receivers must share one outcome box");
    if (joint > joint_action_cap_ / m) fail("joint action count m^N exceeds the cap");
    joint *= m;
  }
  if (sender_.num_joint_actions() != joint)
    fail("sender utility must list exactly m^N = " + std::to_string(joint) + " joint actions");
  if (sender_.dim() != dim_) fail("sender dimension does not match instance dimension");
  if (!(sender_.box() == box())) fail("sender and receivers must share one outcome box");
  std::set<std::string> ids;
  for (const auto& h : hypotheses_) {
    if (h.dim() != dim_) fail("hypothesis '" + h.id() + "' has wrong output dimension");
    if (!ids.insert(h.id()).second) fail("duplicate hypothesis id '" + h.id() + "'");
  }
  if (outcome_model_) {
    for (const auto& c : outcome_model_->contexts) {
      if (c.mean.size() != dim_) fail("context law '" + c.id + "' has wrong mean dimension");
      if (!(c.weight > 0.0)) fail("context law '" + c.id + "' needs positive weight");
      const double lo = outcome_model_->support == OutcomeSupport::kBinary ? 0.0 : -1.0;
      for (double x : c.mean)
        if (!(x >= lo && x <= 1.0)) fail("context law '" + c.id + "' mean outside support");
      for (const auto& h : hypotheses_)
        if (h.is_tabular() && !h.tabular().predictions.contains(c.id))
          fail("hypothesis '" + h.id() + "' has no prediction for context '" + c.id + "'");
    }
  }
}

double Instance::lipschitz() const {
  double l = 0.0;
  for (const auto& r : receivers_) l = std::max(l, r.lipschitz());
  return l;
}

bool Instance::all_tabular() const {
  return std::all_of(hypotheses_.begin(), hypotheses_.end(),
                     [](const Hypothesis& h) { return h.is_tabular(); });
}

std::optional<std::size_t> Instance::find_hypothesis(const std::string& id) const {
  for (std::size_t k = 0; k < hypotheses_.size(); ++k)
    if (hypotheses_[k].id() == id) return k;
  return std::nullopt;
}

std::vector<std::size_t> Instance::decode_joint(std::size_t joint) const {
  const std::size_t n = num_receivers(), m = num_actions();
  std::vector<std::size_t> actions(n);
  for (std::size_t i = n; i-- > 0;) {
    actions[i] = joint % m;
    joint /= m;
  }
  return actions;
}

std::size_t Instance::encode_joint(std::span<const std::size_t> actions) const {
  const std::size_t m = num_actions();
  std::size_t joint = 0;
  for (std::size_t a : actions) joint = joint * m + a;
  return joint;
}

void Instance::check_dataset(const Dataset& data) const {
  if (data.dim() != dim_)
    fail("dataset outcome dimension " + std::to_string(data.dim()) +
         " does not match instance dimension " + std::to_string(dim_));
  const OutcomeBox& b = box();
  for (const auto& s : data.samples())
    for (double y : s.outcome)
      if (!b.contains(y)) fail("dataset outcome " + std::to_string(y) + " lies outside the outcome box");
  for (const auto& h : hypotheses_) {
    if (!h.is_tabular()) continue;
    const auto& preds = h.tabular().predictions;
    for (const auto& s : data.samples())
      if (!preds.contains(s.context))
        fail("hypothesis '" + h.id() + "' has no prediction for context '" + s.context + "'");
  }
}

Instance Instance::with_hypotheses(std::vector<Hypothesis> hypotheses) const {
  return Instance(dim_, receivers_, sender_, std::move(hypotheses), joint_action_cap_,
                  outcome_model_);
}

// ---------------------------------------------------------------------------
// RandomizedPredictor / ResponseRule

RandomizedPredictor::RandomizedPredictor(Vec weights) : weights_(std::move(weights)) {
  if (weights_.empty()) fail("randomized predictor needs at least one weight");
  for (double w : weights_)
    if (!(w >= 0.0) || !std::isfinite(w)) fail("predictor weights must be finite and nonnegative");
  const double total = compensated_sum(weights_);
  if (std::abs(total - 1.0) > 1e-12)
    fail("predictor weights sum to " + std::to_string(total) + ", expected 1");
}

RandomizedPredictor RandomizedPredictor::point_mass(std::size_t index, std::size_t size) {
  if (index >= size) fail("point mass index out of range");
  Vec w(size, 0.0);
  w[index] = 1.0;
  return RandomizedPredictor(std::move(w));
}

RandomizedPredictor RandomizedPredictor::mix(const RandomizedPredictor& a,
                                             const RandomizedPredictor& b, double lambda) {
  if (a.size() != b.size()) fail("cannot mix predictors over different classes");
  if (!(lambda >= 0.0 && lambda <= 1.0)) fail("mixing weight must lie in [0,1]");
  Vec w(a.size());
  for (std::size_t k = 0; k < w.size(); ++k)
    w[k] = lambda * a.weights_[k] + (1.0 - lambda) * b.weights_[k];
  return RandomizedPredictor(std::move(w));
}

ResponseRule ResponseRule::strict(TieBreak tie) {
  ResponseRule r;
  r.rule_ = StrictRule{tie};
  return r;
}

ResponseRule ResponseRule::quantal(double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta))
    fail("quantal response needs a finite positive inverse temperature");
  ResponseRule r;
  r.rule_ = QuantalRule{eta};
  return r;
}

std::string ResponseRule::describe() const {
  if (is_quantal()) {
    std::ostringstream os;
    os.precision(17);
    os << "quantal(eta=" << eta() << ")";
    return os.str();
  }
  return tie_break() == TieBreak::kLowestIndex ? "strict" : "strict(sender-favoring)";
}

// ---------------------------------------------------------------------------
// Responses

double receiver_utility_value(const Receiver& receiver, std::size_t action,
                              std::span<const double> outcome) {
  return receiver.utility(action, outcome);
}

double receiver_lipschitz(const Receiver& receiver) { return receiver.lipschitz(); }

std::size_t strict_best_response(const Receiver& receiver, std::span<const double> prediction) {
  if (prediction.size() != receiver.dim()) fail("prediction dimension mismatch");
  std::size_t best = 0;
  double best_value = receiver.value(0, prediction);
  for (std::size_t a = 1; a < receiver.num_actions(); ++a) {
    const double v = receiver.value(a, prediction);
    if (v > best_value + kTieTolerance) {
      best = a;
      best_value = v;
    }
  }
  return best;
}

Vec quantal_response(const Receiver& receiver, std::span<const double> prediction, double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta))
    fail("quantal response needs a finite positive inverse temperature");
  if (prediction.size() != receiver.dim()) fail("prediction dimension mismatch");
  const std::size_t m = receiver.num_actions();
  Vec p(m);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < m; ++a) {
    p[a] = eta * receiver.value(a, prediction);
    top = std::max(top, p[a]);
  }
  CompensatedSum total;
  for (double& x : p) {
    x = std::exp(x - top);
    total.add(x);
  }
  const double z = total.value();
  for (double& x : p) x /= z;
  return p;
}

Vec receiver_response(const Receiver& receiver, std::span<const double> prediction,
                      const ResponseRule& rule) {
  if (rule.is_quantal()) return quantal_response(receiver, prediction, rule.eta());
  if (rule.tie_break() == TieBreak::kSenderFavoring)
    fail("sender-favoring ties are only defined for the instance's own receivers");
  Vec p(receiver.num_actions(), 0.0);
  p[strict_best_response(receiver, prediction)] = 1.0;
  return p;
}

namespace {

// Joint strict response with ties resolved by the sender's utility at the
// prediction, then by lowest joint index.
std::vector<std::size_t> sender_favoring_joint(const Instance& instance,
                                               std::span<const double> prediction) {
  const std::size_t n = instance.num_receivers();
  std::vector<std::vector<std::size_t>> tied(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = instance.receiver(i);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < r.num_actions(); ++a) top = std::max(top, r.value(a, prediction));
    for (std::size_t a = 0; a < r.num_actions(); ++a)
      if (r.value(a, prediction) >= top - kTieTolerance) tied[i].push_back(a);
  }
  std::vector<std::size_t> cursor(n, 0), current(n), best;
  double best_u = -std::numeric_limits<double>::infinity();
  while (true) {
    for (std::size_t i = 0; i < n; ++i) current[i] = tied[i][cursor[i]];
    const double u = instance.sender().value(instance.encode_joint(current), prediction);
    if (best.empty() || u > best_u + kTieTolerance) {
      best = current;
      best_u = u;
    }
    std::size_t i = n;
    while (i > 0) {
      --i;
      if (++cursor[i] < tied[i].size()) break;
      cursor[i] = 0;
      if (i == 0) return best;
    }
  }
}

}  // namespace

std::vector<Vec> marginal_responses(const Instance& instance, std::span<const double> prediction,
                                    const ResponseRule& rule) {
  if (prediction.size() != instance.dim()) fail("prediction dimension mismatch");
  const std::size_t n = instance.num_receivers(), m = instance.num_actions();
  std::vector<Vec> out;
  out.reserve(n);
  if (rule.is_quantal()) {
    for (const auto& r : instance.receivers()) out.push_back(quantal_response(r, prediction, rule.eta()));
    return out;
  }
  std::vector<std::size_t> actions(n);
  if (rule.tie_break() == TieBreak::kSenderFavoring) {
    actions = sender_favoring_joint(instance, prediction);
  } else {
    for (std::size_t i = 0; i < n; ++i) actions[i] = strict_best_response(instance.receiver(i), prediction);
  }
  for (std::size_t i = 0; i < n; ++i) {
    Vec p(m, 0.0);
    p[actions[i]] = 1.0;
    out.push_back(std::move(p));
  }
  return out;
}

Vec joint_response_distribution(const Instance& instance, std::span<const double> prediction,
                                const ResponseRule& rule) {
  const std::size_t joint = instance.num_joint_actions();
  if (joint > instance.joint_action_cap()) fail("joint action count exceeds the cap");
  const auto marginals = marginal_responses(instance, prediction, rule);
  const std::size_t n = instance.num_receivers(), m = instance.num_actions();
  // Build the product distribution one receiver at a time.
  Vec dist{1.0};
  for (std::size_t i = 0; i < n; ++i) {
    Vec next(dist.size() * m);
    for (std::size_t k = 0; k < dist.size(); ++k)
      for (std::size_t a = 0; a < m; ++a) next[k * m + a] = dist[k] * marginals[i][a];
    dist = std::move(next);
  }
  return dist;
}

double sender_payoff_from_marginals(const Instance& instance, const std::vector<Vec>& marginals,
                                    std::span<const double> outcome) {
  const std::size_t n = marginals.size(), m = instance.num_actions();
  CompensatedSum acc;
  // Depth-first walk over joint actions with nonzero probability.
  std::vector<std::size_t> action(n, 0);
  std::vector<double> prob(n + 1, 1.0);
  std::vector<std::size_t> prefix(n + 1, 0);
  std::size_t depth = 0;
  while (true) {
    if (depth == n) {
      acc.add(prob[n] * instance.sender().value(prefix[n], outcome));
      if (n == 0) break;
      --depth;
      ++action[depth];
    }
    while (action[depth] < m && marginals[depth][action[depth]] == 0.0) ++action[depth];
    if (action[depth] == m) {
      action[depth] = 0;
      if (depth == 0) break;
      --depth;
      ++action[depth];
      continue;
    }
    prob[depth + 1] = prob[depth] * marginals[depth][action[depth]];
    prefix[depth + 1] = prefix[depth] * m + action[depth];
    ++depth;
  }
  return acc.value();
}

double sender_payoff(const Instance& instance, std::span<const double> prediction,
                     std::span<const double> outcome, const ResponseRule& rule) {
  if (outcome.size() != instance.dim()) fail("outcome dimension mismatch");
  return sender_payoff_from_marginals(instance, marginal_responses(instance, prediction, rule),
                                      outcome);
}

double expected_sender_utility(const Instance& instance, const Dataset& data,
                               const RandomizedPredictor& f, const ResponseRule& rule) {
  instance.check_dataset(data);
  if (f.size() != instance.num_hypotheses())
    fail("predictor has " + std::to_string(f.size()) + " weights for " +
         std::to_string(instance.num_hypotheses()) + " hypotheses");
  CompensatedSum acc;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (f.weight(k) == 0.0) continue;
    CompensatedSum per;
    for (const auto& s : data.samples())
      per.add(sender_payoff(instance, instance.hypothesis(k).predict(s), s.outcome, rule));
    acc.add(f.weight(k) * per.value());
  }
  return acc.value() / static_cast<double>(data.size());
}

}  // namespace perdec
