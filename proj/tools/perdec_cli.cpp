#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "perdec/error.hpp"
#include "perdec/experiment.hpp"
#include "perdec/numeric.hpp"

namespace {

using namespace perdec;

struct GameFlags {
  double gamma = 0.0;
  double epsilon = 0.1;
  std::optional<double> eta;
  std::optional<std::uint64_t> tmax;
  std::optional<double> mass;
  std::size_t trace_stride = 0;

  void attach(CLI::App* app) {
    app->add_option("--gamma", gamma, "calibration tolerance")->check(CLI::NonNegativeNumber);
    app->add_option("--epsilon", epsilon, "solver accuracy")->check(CLI::PositiveNumber);
    app->add_option("--eta", eta, "quantal inverse temperature (strict response when absent)")
        ->check(CLI::PositiveNumber);
    app->add_option("--tmax", tmax, "round limit");
    app->add_option("--dual-mass", mass, "dual ball radius C (default 2/epsilon)");
  }

  GameConfig config(std::uint64_t seed) const {
    GameConfig g;
    g.gamma = gamma;
    g.epsilon = epsilon;
    g.t_max = tmax;
    g.dual_mass = mass;
    g.trace_stride = trace_stride;
    g.seed = derive_seed(seed, "solver");
    if (eta) g.rule = ResponseRule::quantal(*eta);
    return g;
  }
};

void attach_generator(CLI::App* app, GeneratorSpec& spec, std::string& support) {
  app->add_option("--receivers", spec.receivers, "N");
  app->add_option("--actions", spec.actions, "m");
  app->add_option("--dim", spec.dim, "d");
  app->add_option("--hypotheses", spec.hypotheses, "|H|");
  app->add_option("--contexts", spec.contexts, "number of contexts");
  app->add_option("--support", support, "outcome support")->check(CLI::IsMember({"binary", "sign"}));
  app->add_option("--fixture", spec.fixture, "fixed instance A or B")->check(CLI::IsMember({"A", "B"}));
}

OutcomeSupport parse_support(const std::string& s) {
  return s == "sign" ? OutcomeSupport::kSign : OutcomeSupport::kBinary;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Persuasive calibrated prediction experiments"};
  app.set_version_flag("--version", std::string(perdec::version()));
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string out, instance_path, dataset_path, holdout_path, predictor_path, support = "binary";
  GeneratorSpec spec;
  GameFlags game;

  // gen
  auto* gen = app.add_subcommand("gen", "generate an instance");
  attach_generator(gen, spec, support);
  gen->add_option("--seed", seed, "instance seed");
  gen->add_option("--out", out, "instance JSON")->required();

  // sample
  std::size_t n = 2000;
  std::string anchor_out;
  auto* sample = app.add_subcommand("sample", "sample a dataset from an instance's outcome model");
  sample->add_option("--instance", instance_path, "instance JSON")->required()->check(CLI::ExistingFile);
  sample->add_option("-n,--samples", n, "rows");
  sample->add_option("--seed", seed, "dataset seed");
  sample->add_option("--out", out, "dataset CSV")->required();
  sample->add_option("--anchor", anchor_out, "also write the instance with an empirical-mean hypothesis");

  // solve
  std::size_t holdout_n = 0;
  bool anchor_mean = false, brute_force = false, lp_bound = false;
  std::string predictor_out, trace_out;
  auto* solve = app.add_subcommand("solve", "run the persuasive calibration solver and audit the result");
  solve->add_option("--instance", instance_path, "instance JSON (generated when absent)")->check(CLI::ExistingFile);
  attach_generator(solve, spec, support);
  solve->add_option("--dataset", dataset_path, "training CSV (sampled when absent)")->check(CLI::ExistingFile);
  solve->add_option("--samples", n, "rows to sample when no dataset is given");
  solve->add_option("--holdout", holdout_path, "holdout CSV")->check(CLI::ExistingFile);
  solve->add_option("--holdout-samples", holdout_n, "rows to sample for a holdout");
  solve->add_flag("--anchor-mean", anchor_mean, "add the empirical-mean hypothesis");
  game.attach(solve);
  solve->add_option("--seed", seed, "master seed");
  solve->add_flag("--bruteforce", brute_force, "grid-search the optimum (|H| <= 5)");
  solve->add_flag("--lp-bound", lp_bound, "persuasion LP upper bound (N = 1, tabular)");
  solve->add_option("--out", out, "report JSON");
  solve->add_option("--predictor-out", predictor_out, "predictor weights JSON");
  solve->add_option("--trace-out", trace_out, "JSONL trace");
  solve->add_option("--trace-stride", game.trace_stride, "record every k-th round");

  // audit
  auto* audit = app.add_subcommand("audit", "audit a saved predictor");
  audit->add_option("--instance", instance_path, "instance JSON")->required()->check(CLI::ExistingFile);
  audit->add_option("--dataset", dataset_path, "CSV")->required()->check(CLI::ExistingFile);
  audit->add_option("--predictor", predictor_path, "predictor weights JSON")->required()->check(CLI::ExistingFile);
  audit->add_option("--holdout", holdout_path, "holdout CSV")->check(CLI::ExistingFile);
  game.attach(audit);
  audit->add_option("--seed", seed, "seed echoed in the report");
  audit->add_flag("--bruteforce", brute_force, "grid-search the optimum (|H| <= 5)");
  audit->add_flag("--lp-bound", lp_bound, "persuasion LP upper bound (N = 1, tabular)");
  audit->add_option("--out", out, "report JSON");

  // bench
  BenchConfig bench_cfg;
  bool no_brute = false, no_lp = false;
  auto* bench = app.add_subcommand("bench", "solve a seeded family of random instances");
  bench->add_option("--count", bench_cfg.count, "instances");
  bench->add_option("--seed", bench_cfg.seed, "first seed");
  bench->add_option("--samples", bench_cfg.samples, "rows per instance");
  bench->add_option("--gamma", bench_cfg.gamma)->check(CLI::NonNegativeNumber);
  bench->add_option("--epsilon", bench_cfg.epsilon)->check(CLI::PositiveNumber);
  bench->add_option("--eta", bench_cfg.eta)->check(CLI::PositiveNumber);
  bench->add_option("--tmax", bench_cfg.t_max);
  bench->add_flag("--no-bruteforce", no_brute, "skip the grid optimum");
  bench->add_flag("--no-lp-bound", no_lp, "skip the LP bound");
  bench->add_option("--out", out, "bench JSON");

  // report
  std::string report_in;
  auto* report = app.add_subcommand("report", "print a saved report");
  report->add_option("report", report_in, "report JSON")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      spec.support = parse_support(support);
      save_instance(generate_instance(spec, seed), out);
    } else if (*sample) {
      const Instance inst = load_instance(instance_path);
      const Dataset data = sample_dataset(inst, n, seed);
      save_dataset(data, out);
      if (!anchor_out.empty()) save_instance(with_empirical_mean_hypothesis(inst, data), anchor_out);
    } else if (*solve || *audit) {
      ExperimentConfig cfg;
      spec.support = parse_support(support);
      cfg.generator = spec;
      if (!instance_path.empty()) cfg.instance_path = instance_path;
      if (!dataset_path.empty()) cfg.dataset_path = dataset_path;
      cfg.samples = n;
      if (!spec.fixture.empty() && solve->count("--samples") == 0) cfg.samples = fixture_sample_count(spec.fixture);
      if (!holdout_path.empty()) cfg.holdout_path = holdout_path;
      cfg.holdout_samples = holdout_n;
      cfg.anchor_mean = anchor_mean;
      cfg.seed = seed;
      cfg.game = game.config(seed);
      if (!predictor_path.empty()) cfg.predictor_path = predictor_path;
      cfg.audits.brute_force = brute_force;
      cfg.audits.lp_bound = lp_bound;
      if (!out.empty()) cfg.report_out = out;
      if (!predictor_out.empty()) cfg.predictor_out = predictor_out;
      if (!trace_out.empty()) cfg.trace_out = trace_out;
      const RunReport r = run_experiment(cfg);
      std::cout << render_report(report_to_json(r));
    } else if (*bench) {
      bench_cfg.brute_force = !no_brute;
      bench_cfg.lp_bound = !no_lp;
      const Json result = run_bench(bench_cfg);
      if (!out.empty()) write_json_file(result, out);
      for (const auto& r : result["runs"])
        std::cout << "seed " << r["seed"] << ": rounds=" << r["rounds"] << " gap=" << r["gap"].get<double>()
                  << " decce=" << r["decce"].get<double>() << " utility=" << r["utility"].get<double>()
                  << (r["ok"].get<bool>() ? "" : "  FAILED") << '\n';
      std::cout << result["passed"] << "/" << result["count"] << " within bounds\n";
      return result["passed"] == result["count"] ? 0 : 2;
    } else if (*report) {
      std::cout << render_report(read_json_file(report_in));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
