#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace perdec {

using Vec = std::vector<double>;

inline constexpr std::size_t kDefaultJointActionCap = 4096;
// Utility gaps at or below this are treated as ties by the strict response.
inline constexpr double kTieTolerance = 1e-12;

// Outcomes live in [lo, hi]^d. The default is the full box [-1, 1]^d; binary
// instances use [0, 1].
struct OutcomeBox {
  double lo = -1.0;
  double hi = 1.0;
  bool contains(double y) const { return y >= lo && y <= hi; }
  bool operator==(const OutcomeBox&) const = default;
};

// Receiver utility v(a, y) = w_a . y + c_a, validated into [0, 1] over the box.
class Receiver {
 public:
  Receiver(std::vector<Vec> action_weights, Vec action_offsets, OutcomeBox box = {});

  std::size_t num_actions() const { return offsets_.size(); }
  std::size_t dim() const { return weights_.front().size(); }
  const Vec& weights(std::size_t action) const { return weights_.at(action); }
  double offset(std::size_t action) const { return offsets_.at(action); }

  // Checked evaluation; throws on dimension or action mismatch.
  double utility(std::size_t action, std::span<const double> outcome) const;
  // Unchecked hot-path evaluation.
  double value(std::size_t action, std::span<const double> outcome) const;
  // max_a ||w_a||_1, the Lipschitz constant w.r.t. the sup norm.
  double lipschitz() const { return lipschitz_; }
  const OutcomeBox& box() const { return box_; }

 private:
  std::vector<Vec> weights_;
  Vec offsets_;
  OutcomeBox box_;
  double lipschitz_ = 0.0;
};

// Sender utility u(joint, y) = alpha_joint + beta_joint . y, stored per joint
// action with receiver 0 as the most significant digit.
class SenderUtility {
 public:
  SenderUtility(Vec alpha, std::vector<Vec> beta, OutcomeBox box = {});

  std::size_t num_joint_actions() const { return alpha_.size(); }
  std::size_t dim() const { return beta_.front().size(); }
  double alpha(std::size_t joint) const { return alpha_.at(joint); }
  const Vec& beta(std::size_t joint) const { return beta_.at(joint); }
  double value(std::size_t joint, std::span<const double> outcome) const;
  const OutcomeBox& box() const { return box_; }

 private:
  Vec alpha_;
  std::vector<Vec> beta_;
  OutcomeBox box_;
};

struct Sample {
  std::string context;  // empty in functional mode
  Vec features;         // empty in finite-context mode
  Vec outcome;
};

class Dataset {
 public:
  explicit Dataset(std::vector<Sample> samples);

  std::size_t size() const { return samples_.size(); }
  std::size_t dim() const { return samples_.front().outcome.size(); }
  const std::vector<Sample>& samples() const { return samples_; }
  const Sample& operator[](std::size_t k) const { return samples_[k]; }
  // Compensated mean of the outcomes.
  Vec mean_outcome() const;

 private:
  std::vector<Sample> samples_;
};

struct TabularMap {
  std::map<std::string, Vec> predictions;
};

// prediction = clip(A x + b, -1, 1) componentwise.
struct AffineMap {
  std::vector<Vec> matrix;  // d rows of length p
  Vec offset;               // length d
};

class Hypothesis {
 public:
  Hypothesis(std::string id, TabularMap map);
  Hypothesis(std::string id, AffineMap map);

  const std::string& id() const { return id_; }
  bool is_tabular() const { return std::holds_alternative<TabularMap>(map_); }
  const TabularMap& tabular() const { return std::get<TabularMap>(map_); }
  const AffineMap& affine() const { return std::get<AffineMap>(map_); }
  std::size_t dim() const { return dim_; }

  Vec predict(const Sample& sample) const;

 private:
  std::string id_;
  std::variant<TabularMap, AffineMap> map_;
  std::size_t dim_ = 0;
};

// Outcome law attached to generated instances so datasets can be sampled.
struct ContextLaw {
  std::string id;
  double weight = 1.0;
  Vec mean;
};

enum class OutcomeSupport { kBinary, kSign };

struct OutcomeModel {
  OutcomeSupport support = OutcomeSupport::kSign;
  std::vector<ContextLaw> contexts;
  // Exact-proportion datasets instead of i.i.d. draws (fixtures).
  bool exact = false;
};

class Instance {
 public:
  Instance(std::size_t dim, std::vector<Receiver> receivers, SenderUtility sender,
           std::vector<Hypothesis> hypotheses,
           std::size_t joint_action_cap = kDefaultJointActionCap,
           std::optional<OutcomeModel> outcome_model = std::nullopt);

  std::size_t dim() const { return dim_; }
  std::size_t num_receivers() const { return receivers_.size(); }
  std::size_t num_actions() const { return receivers_.front().num_actions(); }
  std::size_t num_joint_actions() const { return sender_.num_joint_actions(); }
  std::size_t num_hypotheses() const { return hypotheses_.size(); }
  std::size_t joint_action_cap() const { return joint_action_cap_; }
  const OutcomeBox& box() const { return receivers_.front().box(); }

  const std::vector<Receiver>& receivers() const { return receivers_; }
  const Receiver& receiver(std::size_t i) const { return receivers_.at(i); }
  const SenderUtility& sender() const { return sender_; }
  const std::vector<Hypothesis>& hypotheses() const { return hypotheses_; }
  const Hypothesis& hypothesis(std::size_t k) const { return hypotheses_.at(k); }
  const std::optional<OutcomeModel>& outcome_model() const { return outcome_model_; }
  // max_i L_i.
  double lipschitz() const;
  bool all_tabular() const;
  std::optional<std::size_t> find_hypothesis(const std::string& id) const;

  // Joint index <-> per-receiver actions, receiver 0 most significant.
  std::vector<std::size_t> decode_joint(std::size_t joint) const;
  std::size_t encode_joint(std::span<const std::size_t> actions) const;

  // Throws unless the dataset's outcome dimension matches and, for tabular
  // hypotheses, every context is covered.
  void check_dataset(const class Dataset& data) const;

  Instance with_hypotheses(std::vector<Hypothesis> hypotheses) const;

 private:
  std::size_t dim_;
  std::vector<Receiver> receivers_;
  SenderUtility sender_;
  std::vector<Hypothesis> hypotheses_;
  std::size_t joint_action_cap_;
  std::optional<OutcomeModel> outcome_model_;
};

// Distribution over the instance's hypotheses.
class RandomizedPredictor {
 public:
  explicit RandomizedPredictor(Vec weights);
  static RandomizedPredictor point_mass(std::size_t index, std::size_t size);

  const Vec& weights() const { return weights_; }
  double weight(std::size_t k) const { return weights_.at(k); }
  std::size_t size() const { return weights_.size(); }
  // Convex combination lambda * a + (1 - lambda) * b.
  static RandomizedPredictor mix(const RandomizedPredictor& a, const RandomizedPredictor& b,
                                 double lambda);

 private:
  Vec weights_;
};

enum class TieBreak { kLowestIndex, kSenderFavoring };

struct StrictRule {
  TieBreak tie = TieBreak::kLowestIndex;
};

struct QuantalRule {
  double eta;
};

class ResponseRule {
 public:
  ResponseRule() = default;
  static ResponseRule strict(TieBreak tie = TieBreak::kLowestIndex);
  static ResponseRule quantal(double eta);

  bool is_quantal() const { return std::holds_alternative<QuantalRule>(rule_); }
  double eta() const { return std::get<QuantalRule>(rule_).eta; }
  TieBreak tie_break() const { return std::get<StrictRule>(rule_).tie; }
  std::string describe() const;

 private:
  std::variant<StrictRule, QuantalRule> rule_ = StrictRule{};
};

double receiver_utility_value(const Receiver& receiver, std::size_t action,
                              std::span<const double> outcome);
double receiver_lipschitz(const Receiver& receiver);

// Lowest-index argmax of v(., prediction).
std::size_t strict_best_response(const Receiver& receiver, std::span<const double> prediction);

// Softmax of eta * v(., prediction), max-subtracted.
Vec quantal_response(const Receiver& receiver, std::span<const double> prediction, double eta);

// Response of a receiver considered on its own. Sender-favoring ties need the
// sender and are rejected here.
Vec receiver_response(const Receiver& receiver, std::span<const double> prediction,
                      const ResponseRule& rule);

// Per-receiver action distributions b_i(prediction, .) under the rule. For
// sender-favoring strict responses the tie is resolved jointly.
std::vector<Vec> marginal_responses(const Instance& instance, std::span<const double> prediction,
                                    const ResponseRule& rule);

// Product distribution over joint actions.
Vec joint_response_distribution(const Instance& instance, std::span<const double> prediction,
                                const ResponseRule& rule);

// (1/n) sum_samples sum_h f(h) sum_joint u(joint, y) b(h(x), joint).
double expected_sender_utility(const Instance& instance, const Dataset& data,
                               const RandomizedPredictor& f, const ResponseRule& rule);

// Sum over joint actions of u(joint, outcome) * prod_i b_i(a_i), skipping
// zero-probability branches.
double sender_payoff_from_marginals(const Instance& instance, const std::vector<Vec>& marginals,
                                    std::span<const double> outcome);

// Sum over joint actions of u(joint, outcome) * b(prediction, joint).
double sender_payoff(const Instance& instance, std::span<const double> prediction,
                     std::span<const double> outcome, const ResponseRule& rule);

}  // namespace perdec
