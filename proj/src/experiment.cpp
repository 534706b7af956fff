#include "perdec/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "perdec/error.hpp"
#include "perdec/numeric.hpp"

namespace perdec {

namespace {

[[noreturn]] void fail(const std::string& message) { throw Error("experiment_cli", message); }

OutcomeBox box_for(OutcomeSupport s) {
  return s == OutcomeSupport::kBinary ? OutcomeBox{0.0, 1.0} : OutcomeBox{-1.0, 1.0};
}

// Affine maps sampled coefficientwise, then shifted and scaled together so
// every map lands in [0, 1] over the box while their ordering is kept.
void rescale_into_unit(std::vector<Vec>& w, Vec& c, const OutcomeBox& box) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t a = 0; a < c.size(); ++a) {
    double l = c[a], h = c[a];
    for (double x : w[a]) {
      l += std::min(x * box.lo, x * box.hi);
      h += std::max(x * box.lo, x * box.hi);
    }
    lo = std::min(lo, l);
    hi = std::max(hi, h);
  }
  const double scale = hi > lo ? 1.0 / (hi - lo) : 1.0;
  for (std::size_t a = 0; a < c.size(); ++a) {
    for (double& x : w[a]) x *= scale;
    c[a] = (c[a] - lo) * scale;
  }
  // Guard the endpoints against rounding just outside [0, 1].
  for (std::size_t a = 0; a < c.size(); ++a) {
    double l = c[a], h = c[a];
    for (double x : w[a]) {
      l += std::min(x * box.lo, x * box.hi);
      h += std::max(x * box.lo, x * box.hi);
    }
    if (l < 0.0) c[a] -= l;
    if (h > 1.0) c[a] -= std::max(0.0, h - 1.0);
  }
}

std::size_t checked_power(std::size_t m, std::size_t n, std::size_t cap) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (out > cap / m) fail("joint action count m^N exceeds the cap of " + std::to_string(cap));
    out *= m;
  }
  return out;
}

Vec clip(Vec v, const OutcomeBox& box) {
  for (double& x : v) x = std::clamp(x, box.lo, box.hi);
  return v;
}

Json regret_to_json(const RegretReport& r) {
  return {{"kind", to_string(r.kind)},  {"value", r.value},   {"receiver", r.receiver},
          {"impersonated", r.impersonated}, {"remap", r.remap}, {"per_receiver", r.per_receiver}};
}

Json audit_to_json(const AuditSummary& a) {
  const auto& cal = a.calibration;
  Json table = Json::array();
  for (Sign sign : {Sign::kPlus, Sign::kMinus})
    for (std::size_t i = 0; i < cal.receivers(); ++i)
      for (std::size_t j = 0; j < cal.dim(); ++j)
        for (std::size_t act = 0; act < cal.actions(); ++act)
          table.push_back({{"sign", sign == Sign::kPlus ? "+" : "-"},
                           {"receiver", i},
                           {"coord", j},
                           {"action", act},
                           {"violation", cal.violation(sign, i, j, act)}});
  const auto w = cal.argmax();
  Json regrets = Json::array();
  for (const auto& r : a.regrets) regrets.push_back(regret_to_json(r));
  return {{"samples", a.samples},
          {"sender_utility", a.utility},
          {cal.smoothed() ? "smdecce" : "decce", cal.max_abs()},
          {"witness",
           {{"sign", w.sign == Sign::kPlus ? "+" : "-"}, {"receiver", w.receiver}, {"coord", w.coord}, {"action", w.action}}},
          {"violations", table},
          {"full_calibration_error", a.full_calibration},
          {"regret", regrets}};
}

}  // namespace

const char* version() { return PERDEC_VERSION; }

// ---------------------------------------------------------------------------
// Generation

Instance fixture_instance(const std::string& name) {
  const OutcomeBox unit{0.0, 1.0};
  const Receiver receiver({{-1.0}, {1.0}}, {1.0, 0.0}, unit);
  const SenderUtility sender({1.0, 0.0}, {{0.0}, {0.0}}, unit);
  auto constant = [](const std::string& id, const std::vector<std::string>& ctx, double v) {
    TabularMap map;
    for (const auto& c : ctx) map.predictions[c] = {v};
    return Hypothesis(id, map);
  };
  OutcomeModel model;
  model.support = OutcomeSupport::kBinary;
  model.exact = true;
  if (name == "A") {
    model.contexts = {{"x0", 1.0, {0.5}}};
    return Instance(1, {receiver}, sender, {constant("h-", {"x0"}, 0.45), constant("h+", {"x0"}, 0.55)},
                    kDefaultJointActionCap, model);
  }
  if (name == "B") {
    model.contexts = {{"x1", 1.0, {0.2}}, {"x2", 1.0, {0.8}}};
    TabularMap star;
    star.predictions = {{"x1", {0.2}}, {"x2", {0.8}}};
    return Instance(1, {receiver}, sender, {Hypothesis("h*", star), constant("h_mean", {"x1", "x2"}, 0.5)},
                    kDefaultJointActionCap, model);
  }
  fail("unknown fixture '" + name + "' (expected A or B)");
}

std::size_t fixture_sample_count(const std::string& name) {
  if (name == "A") return 100;
  if (name == "B") return 20;
  fail("unknown fixture '" + name + "' (expected A or B)");
}

Instance generate_instance(const GeneratorSpec& spec, std::uint64_t seed) {
  if (!spec.fixture.empty()) return fixture_instance(spec.fixture);
  if (spec.receivers < 1 || spec.actions < 2 || spec.dim < 1 || spec.hypotheses < 1 || spec.contexts < 1)
    fail("generator needs N >= 1, m >= 2, d >= 1, |H| >= 1 and at least one context");
  if (spec.hypotheses > kMaxGeneratedHypotheses)
    fail("generator caps |H| at " + std::to_string(kMaxGeneratedHypotheses));
  const std::size_t joint = checked_power(spec.actions, spec.receivers, kDefaultJointActionCap);
  const OutcomeBox box = box_for(spec.support);
  const std::size_t d = spec.dim;
  Rng rng(derive_seed(seed, "instance"));

  std::vector<Receiver> receivers;
  for (std::size_t i = 0; i < spec.receivers; ++i) {
    std::vector<Vec> w(spec.actions, Vec(d));
    Vec c(spec.actions);
    for (std::size_t a = 0; a < spec.actions; ++a) {
      for (double& x : w[a]) x = rng.uniform(-1.0, 1.0);
      c[a] = rng.uniform(-1.0, 1.0);
    }
    rescale_into_unit(w, c, box);
    receivers.emplace_back(w, c, box);
  }
  std::vector<Vec> beta(joint, Vec(d));
  Vec alpha(joint);
  for (std::size_t k = 0; k < joint; ++k) {
    for (double& x : beta[k]) x = rng.uniform(-1.0, 1.0);
    alpha[k] = rng.uniform(-1.0, 1.0);
  }
  rescale_into_unit(beta, alpha, box);

  OutcomeModel model;
  model.support = spec.support;
  std::vector<std::string> ids;
  for (std::size_t c = 0; c < spec.contexts; ++c) {
    ids.push_back("c" + std::to_string(c));
    Vec mean(d);
    for (double& x : mean) x = spec.support == OutcomeSupport::kBinary ? rng.uniform(0.05, 0.95) : rng.uniform(-0.9, 0.9);
    model.contexts.push_back({ids.back(), rng.uniform(0.5, 1.5), mean});
  }

  // Hypotheses cycle through noisy means, pooled means and uninformed guesses.
  std::vector<Hypothesis> hyps;
  const double width = box.hi - box.lo;
  for (std::size_t k = 0; k < spec.hypotheses; ++k) {
    TabularMap map;
    switch (k % 3) {
      case 0: {
        const double noise = rng.uniform(0.0, 0.25) * width;
        for (const auto& ctx : model.contexts) {
          Vec v = ctx.mean;
          for (double& x : v) x += rng.uniform(-noise, noise);
          map.predictions[ctx.id] = clip(v, box);
        }
        break;
      }
      case 1: {
        std::vector<std::size_t> group(spec.contexts);
        for (auto& g : group) g = rng.index(2);
        std::vector<Vec> sum(2, Vec(d, 0.0));
        Vec mass(2, 0.0);
        for (std::size_t c = 0; c < spec.contexts; ++c) {
          mass[group[c]] += model.contexts[c].weight;
          for (std::size_t j = 0; j < d; ++j) sum[group[c]][j] += model.contexts[c].weight * model.contexts[c].mean[j];
        }
        const double shift = rng.uniform(-0.1, 0.1) * width;
        for (std::size_t c = 0; c < spec.contexts; ++c) {
          Vec v(d);
          for (std::size_t j = 0; j < d; ++j) v[j] = sum[group[c]][j] / mass[group[c]] + shift;
          map.predictions[model.contexts[c].id] = clip(v, box);
        }
        break;
      }
      default:
        for (const auto& ctx : model.contexts) {
          Vec v(d);
          for (double& x : v) x = rng.uniform(box.lo, box.hi);
          map.predictions[ctx.id] = v;
        }
    }
    hyps.emplace_back("h" + std::to_string(k), std::move(map));
  }
  return Instance(d, std::move(receivers), SenderUtility(alpha, beta, box), std::move(hyps),
                  kDefaultJointActionCap, std::move(model));
}

Dataset sample_dataset(const Instance& instance, std::size_t n, std::uint64_t seed) {
  if (n < 1) fail("dataset size must be at least 1");
  const auto& model = instance.outcome_model();
  if (!model || model->contexts.empty()) fail("instance carries no outcome model to sample from");
  const std::size_t d = instance.dim(), K = model->contexts.size();
  const bool binary = model->support == OutcomeSupport::kBinary;
  auto hit_probability = [&](double mean) { return binary ? mean : (1.0 + mean) / 2.0; };
  auto outcome = [&](bool hit) { return hit ? 1.0 : (binary ? 0.0 : -1.0); };
  double total = 0.0;
  for (const auto& c : model->contexts) total += c.weight;

  std::vector<Sample> rows;
  rows.reserve(n);
  if (model->exact) {
    // Largest-remainder context counts, then evenly spread hits.
    std::vector<std::size_t> count(K);
    std::vector<std::pair<double, std::size_t>> rem;
    std::size_t used = 0;
    for (std::size_t c = 0; c < K; ++c) {
      const double quota = model->contexts[c].weight / total * static_cast<double>(n);
      count[c] = static_cast<std::size_t>(std::floor(quota));
      used += count[c];
      rem.emplace_back(-(quota - std::floor(quota)), c);
    }
    std::sort(rem.begin(), rem.end());
    for (std::size_t r = 0; used < n; ++r, ++used) ++count[rem[r % K].second];
    for (std::size_t c = 0; c < K; ++c) {
      const auto& law = model->contexts[c];
      std::vector<std::size_t> hits(d);
      for (std::size_t j = 0; j < d; ++j)
        hits[j] = static_cast<std::size_t>(std::llround(hit_probability(law.mean[j]) * static_cast<double>(count[c])));
      for (std::size_t i = 0; i < count[c]; ++i) {
        Vec y(d);
        for (std::size_t j = 0; j < d; ++j)
          y[j] = outcome((i + 1) * hits[j] / count[c] - i * hits[j] / count[c] == 1);
        rows.push_back({law.id, {}, y});
      }
    }
    return Dataset(std::move(rows));
  }
  Rng rng(derive_seed(seed, "dataset"));
  for (std::size_t s = 0; s < n; ++s) {
    double u = rng.uniform() * total;
    std::size_t c = 0;
    while (c + 1 < K && u >= model->contexts[c].weight) u -= model->contexts[c++].weight;
    const auto& law = model->contexts[c];
    Vec y(d);
    for (std::size_t j = 0; j < d; ++j) y[j] = outcome(rng.bernoulli(hit_probability(law.mean[j])));
    rows.push_back({law.id, {}, y});
  }
  return Dataset(std::move(rows));
}

Instance with_empirical_mean_hypothesis(const Instance& instance, const Dataset& data, const std::string& id) {
  instance.check_dataset(data);
  std::string name = id;
  for (int k = 2; instance.find_hypothesis(name); ++k) name = id + "_" + std::to_string(k);
  const Vec mean = data.mean_outcome();
  auto hyps = instance.hypotheses();
  const std::size_t p = data[0].features.size();
  if (!instance.all_tabular() && p > 0) {
    hyps.emplace_back(name, AffineMap{std::vector<Vec>(instance.dim(), Vec(p, 0.0)), mean});
  } else {
    std::set<std::string> contexts;
    for (const auto& s : data.samples()) contexts.insert(s.context);
    if (const auto& model = instance.outcome_model())
      for (const auto& c : model->contexts) contexts.insert(c.id);
    for (const auto& h : instance.hypotheses())
      if (h.is_tabular())
        for (const auto& [ctx, v] : h.tabular().predictions) contexts.insert(ctx);
    TabularMap map;
    for (const auto& c : contexts) map.predictions[c] = mean;
    hyps.emplace_back(name, std::move(map));
  }
  return instance.with_hypotheses(std::move(hyps));
}

GeneratorSpec suite_spec(std::uint64_t seed) {
  Rng rng(derive_seed(seed, "suite"));
  GeneratorSpec spec;
  spec.receivers = 1 + rng.index(2);
  spec.actions = 2 + rng.index(2);
  spec.dim = 1 + rng.index(2);
  spec.hypotheses = 3;
  spec.contexts = 3 + rng.index(4);
  spec.support = rng.bernoulli(0.5) ? OutcomeSupport::kBinary : OutcomeSupport::kSign;
  return spec;
}

SuiteCase make_suite_case(std::uint64_t seed, std::size_t n) {
  const Instance base = generate_instance(suite_spec(seed), seed);
  Dataset data = sample_dataset(base, n, seed);
  return {with_empirical_mean_hypothesis(base, data), std::move(data)};
}

// ---------------------------------------------------------------------------
// Runs

AuditSummary audit_predictor(const Instance& instance, const Dataset& data, const RandomizedPredictor& f,
                             const ResponseRule& rule, const AuditOptions& options) {
  const PredictionTable table = tabulate(instance, data, f);
  AuditSummary out;
  out.samples = data.size();
  out.utility = table_stats(instance, data, table, rule).utility;
  out.calibration = decision_calibration_error(instance, data, table, rule);
  out.full_calibration = full_calibration_error(data, table);
  for (auto kind : options.regrets) {
    if (kind != RegretKind::kSwap && instance.num_receivers() < 2) continue;
    out.regrets.push_back(regret_audit(instance, data, table, rule, kind));
  }
  return out;
}

RunReport run_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  Instance instance = config.instance_path ? load_instance(*config.instance_path)
                                           : generate_instance(config.generator, config.seed);
  const Dataset train = config.dataset_path ? load_dataset(*config.dataset_path)
                                            : sample_dataset(instance, config.samples, config.seed);
  std::optional<Dataset> holdout;
  if (config.holdout_path) holdout = load_dataset(*config.holdout_path);
  else if (config.holdout_samples > 0)
    holdout = sample_dataset(instance, config.holdout_samples, derive_seed(config.seed, "holdout"));
  if (config.anchor_mean) instance = with_empirical_mean_hypothesis(instance, train);
  instance.check_dataset(train);
  if (holdout) instance.check_dataset(*holdout);

  RunReport report;
  report.config = config_to_json(config);
  for (const auto& h : instance.hypotheses()) report.hypothesis_ids.push_back(h.id());
  const ResponseRule& rule = config.game.rule;
  if (config.predictor_path) {
    report.predictor = load_predictor(instance, *config.predictor_path);
  } else {
    const SolveResult res = solve_persuasive(instance, train, config.game);
    report.predictor = res.predictor;
    report.solve = SolveSummary{res.gap,  res.rounds,          res.converged,         res.rate,
                                res.horizon, config.game.mass(), config.game.target()};
    if (config.trace_out) {
      std::ofstream out(*config.trace_out);
      if (!out) fail("cannot write trace '" + config.trace_out->string() + "'");
      write_trace_jsonl(instance, res.trace, out);
    }
  }
  report.train = audit_predictor(instance, train, report.predictor, rule, config.audits);
  if (holdout) report.holdout = audit_predictor(instance, *holdout, report.predictor, rule, config.audits);
  if (config.audits.brute_force)
    report.brute_force = brute_force_opt(instance, train, config.game.gamma, rule, config.audits.grid_step);
  if (config.audits.lp_bound) report.lp_bound = obedient_signaling_upper_bound(instance, train);
  report.version = version();
  report.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (config.predictor_out) save_predictor(instance, report.predictor, *config.predictor_out);
  if (config.report_out) write_report(report, *config.report_out);
  return report;
}

// ---------------------------------------------------------------------------
// Serialization

Json config_to_json(const ExperimentConfig& c) {
  Json j;
  if (c.instance_path) j["instance"] = c.instance_path->string();
  else
    j["generator"] = {{"receivers", c.generator.receivers}, {"actions", c.generator.actions},
                      {"dim", c.generator.dim},             {"hypotheses", c.generator.hypotheses},
                      {"contexts", c.generator.contexts},
                      {"support", c.generator.support == OutcomeSupport::kBinary ? "binary" : "sign"},
                      {"fixture", c.generator.fixture}};
  if (c.dataset_path) j["dataset"] = c.dataset_path->string();
  else j["samples"] = c.samples;
  if (c.holdout_path) j["holdout"] = c.holdout_path->string();
  else if (c.holdout_samples > 0) j["holdout_samples"] = c.holdout_samples;
  j["anchor_mean"] = c.anchor_mean;
  j["seed"] = c.seed;
  j["gamma"] = c.game.gamma;
  j["epsilon"] = c.game.epsilon;
  j["dual_mass"] = c.game.mass();
  j["gap_target"] = c.game.target();
  if (c.game.t_max) j["tmax"] = *c.game.t_max;
  j["rule"] = c.game.rule.describe();
  if (c.game.rule.is_quantal()) j["eta"] = c.game.rule.eta();
  if (c.predictor_path) j["predictor"] = c.predictor_path->string();
  Json kinds = Json::array();
  for (auto k : c.audits.regrets) kinds.push_back(to_string(k));
  j["audits"] = {{"regret", kinds}, {"bruteforce", c.audits.brute_force}, {"grid_step", c.audits.grid_step},
                 {"lp_bound", c.audits.lp_bound}};
  return j;
}

Json report_to_json(const RunReport& r) {
  Json j;
  j["version"] = r.version;
  j["config"] = r.config;
  Json weights = Json::array();
  for (std::size_t k = 0; k < r.predictor.size(); ++k)
    if (r.predictor.weight(k) != 0.0) weights.push_back({{"hypothesis", r.hypothesis_ids[k]}, {"weight", r.predictor.weight(k)}});
  j["predictor"] = {{"weights", weights}};
  if (r.solve)
    j["solver"] = {{"gap", r.solve->gap},           {"rounds", r.solve->rounds},   {"converged", r.solve->converged},
                   {"learning_rate", r.solve->rate}, {"horizon", r.solve->horizon}, {"dual_mass", r.solve->mass},
                   {"gap_target", r.solve->gap_target}};
  j["train"] = audit_to_json(r.train);
  if (r.holdout) j["holdout"] = audit_to_json(*r.holdout);
  if (r.brute_force) {
    Json bf = {{"feasible", r.brute_force->feasible()}, {"step", r.brute_force->step},
               {"grid_slack", r.brute_force->grid_slack}};
    bf["value"] = r.brute_force->feasible() ? Json(r.brute_force->value) : Json(nullptr);
    if (r.brute_force->feasible()) bf["weights"] = r.brute_force->weights;
    j["brute_force"] = bf;
  }
  if (r.lp_bound)
    j["lp_bound"] = {{"value", r.lp_bound->value},
                     {"states", r.lp_bound->states.states},
                     {"prior", r.lp_bound->states.prior},
                     {"scheme", r.lp_bound->scheme}};
  j["wall_clock_seconds"] = r.wall_clock_seconds;
  return j;
}

void write_report(const RunReport& report, const std::filesystem::path& path) {
  write_json_file(report_to_json(report), path);
}

std::string render_report(const Json& r) {
  std::ostringstream os;
  os << std::setprecision(6);
  auto audit_line = [&](const char* name, const Json& a) {
    const bool smooth = a.contains("smdecce");
    os << name << ": n=" << a.value("samples", 0) << "  utility=" << a.value("sender_utility", 0.0) << "  "
       << (smooth ? "SmDecCE=" : "DecCE=") << a.value(smooth ? "smdecce" : "decce", 0.0)
       << "  full_calibration=" << a.value("full_calibration_error", 0.0) << '\n';
    for (const auto& g : a.value("regret", Json::array()))
      os << "  " << g.value("kind", "") << " regret=" << g.value("value", 0.0) << " (receiver " << g.value("receiver", 0)
         << ", as " << g.value("impersonated", 0) << ")\n";
  };
  os << "perdec report (version " << r.value("version", "?") << ")\n";
  if (r.contains("config")) {
    const auto& c = r["config"];
    os << "gamma=" << c.value("gamma", 0.0) << "  epsilon=" << c.value("epsilon", 0.0) << "  rule=" << c.value("rule", "")
       << "  seed=" << c.value("seed", 0) << '\n';
  }
  os << "predictor:";
  for (const auto& w : r["predictor"]["weights"]) os << ' ' << w.value("hypothesis", "") << '=' << w.value("weight", 0.0);
  os << '\n';
  if (r.contains("solver")) {
    const auto& s = r["solver"];
    os << "solver: rounds=" << s.value("rounds", 0) << "  gap=" << s.value("gap", 0.0) << "  target=" << s.value("gap_target", 0.0)
       << (s.value("converged", false) ? "  converged" : "  stopped at tmax") << '\n';
  }
  if (r.contains("train")) audit_line("train", r["train"]);
  if (r.contains("holdout")) audit_line("holdout", r["holdout"]);
  if (r.contains("brute_force")) {
    const auto& b = r["brute_force"];
    os << "brute force optimum: ";
    if (b.value("feasible", false)) os << b["value"].get<double>() << " (grid slack " << b.value("grid_slack", 0.0) << ")\n";
    else os << "infeasible on the grid\n";
  }
  if (r.contains("lp_bound")) os << "persuasion LP bound: " << r["lp_bound"].value("value", 0.0) << '\n';
  if (r.contains("wall_clock_seconds")) os << "wall clock: " << r.value("wall_clock_seconds", 0.0) << " s\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Bench

Json run_bench(const BenchConfig& config) {
  Json runs = Json::array();
  std::size_t passed = 0;
  for (std::size_t r = 0; r < config.count; ++r) {
    const std::uint64_t seed = config.seed + r;
    const auto t0 = std::chrono::steady_clock::now();
    const SuiteCase sc = make_suite_case(seed, config.samples);
    GameConfig game;
    game.gamma = config.gamma;
    game.epsilon = config.epsilon;
    game.t_max = config.t_max;
    if (config.eta) game.rule = ResponseRule::quantal(*config.eta);
    const SolveResult res = solve_persuasive(sc.instance, sc.data, game);
    const double solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto audit = audit_predictor(sc.instance, sc.data, res.predictor, game.rule, AuditOptions{{RegretKind::kSwap}});
    Json run = {{"seed", seed},
                {"receivers", sc.instance.num_receivers()},
                {"actions", sc.instance.num_actions()},
                {"dim", sc.instance.dim()},
                {"hypotheses", sc.instance.num_hypotheses()},
                {"rounds", res.rounds},
                {"gap", res.gap},
                {"converged", res.converged},
                {"seconds", solve_seconds},
                {"utility", audit.utility},
                {"decce", audit.calibration.max_abs()},
                {"swap_regret", audit.regrets.front().value}};
    bool ok = res.converged && audit.calibration.max_abs() <= config.gamma + config.epsilon;
    if (config.brute_force) {
      const auto bf = brute_force_opt(sc.instance, sc.data, config.gamma, game.rule);
      run["brute_force"] = bf.feasible() ? Json(bf.value) : Json(nullptr);
      ok = ok && audit.utility >= bf.value - config.epsilon - bf.grid_slack;
    }
    if (config.lp_bound && sc.instance.num_receivers() == 1)
      run["lp_bound"] = obedient_signaling_upper_bound(sc.instance, sc.data).value;
    run["ok"] = ok;
    passed += ok;
    runs.push_back(run);
  }
  return {{"version", version()},
          {"gamma", config.gamma},
          {"epsilon", config.epsilon},
          {"rule", config.eta ? "quantal(eta=" + format_double(*config.eta) + ")" : "strict"},
          {"runs", runs},
          {"passed", passed},
          {"count", config.count}};
}

}  // namespace perdec
