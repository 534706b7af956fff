#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "perdec/error.hpp"
#include "perdec/experiment.hpp"

using namespace perdec;
using namespace perdec::testing;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "perdec_test_experiment";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::map<std::string, double> context_means(const Dataset& d) {
  std::map<std::string, std::pair<double, double>> acc;
  for (const auto& s : d.samples()) {
    acc[s.context].first += s.outcome[0];
    acc[s.context].second += 1.0;
  }
  std::map<std::string, double> out;
  for (const auto& [c, v] : acc) out[c] = v.first / v.second;
  return out;
}

Json strip_clock(Json j) {
  j.erase("wall_clock_seconds");
  return j;
}

}  // namespace

TEST_CASE("generator is deterministic and within caps") {
  GeneratorSpec spec;
  spec.receivers = 2;
  spec.actions = 3;
  spec.dim = 2;
  spec.support = OutcomeSupport::kSign;
  CHECK(instance_to_json(generate_instance(spec, 7)).dump() == instance_to_json(generate_instance(spec, 7)).dump());
  CHECK(instance_to_json(generate_instance(spec, 7)) != instance_to_json(generate_instance(spec, 8)));

  GeneratorSpec big;
  big.receivers = 13;  // 2^13 > 4096
  CHECK_THROWS_AS(generate_instance(big, 1), Error);
  GeneratorSpec many;
  many.hypotheses = kMaxGeneratedHypotheses + 1;
  CHECK_THROWS_AS(generate_instance(many, 1), Error);
}

TEST_CASE("generated utilities are normalized into the unit interval") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const GeneratorSpec spec = suite_spec(seed);
    const Instance inst = generate_instance(spec, seed);  // the constructor validates the range
    double lo = 1.0, hi = 0.0;
    const auto& box = inst.box();
    for (const auto& r : inst.receivers())
      for (std::size_t a = 0; a < r.num_actions(); ++a)
        for (double y : {box.lo, box.hi}) {
          const Vec corner(inst.dim(), y);
          lo = std::min(lo, r.utility(a, corner));
          hi = std::max(hi, r.utility(a, corner));
        }
    CHECK(lo >= -1e-12);
    CHECK(hi <= 1.0 + 1e-12);
  }
}

TEST_CASE("fixture path reproduces the hand-built fixtures") {
  Json a = instance_to_json(fixture_instance("A"));
  a.erase("outcome_model");
  CHECK(a == instance_to_json(fix_a()));
  GeneratorSpec spec;
  spec.fixture = "B";
  Json b = instance_to_json(generate_instance(spec, 99));
  b.erase("outcome_model");
  CHECK(b == instance_to_json(fix_b()));
  CHECK_THROWS_AS(fixture_instance("C"), Error);

  const Dataset da = sample_dataset(fixture_instance("A"), fixture_sample_count("A"), 5);
  CHECK(da.size() == 100);
  CHECK(da.mean_outcome()[0] == 0.5);
  const Dataset db = sample_dataset(fixture_instance("B"), fixture_sample_count("B"), 5);
  const auto means = context_means(db);
  CHECK(db.size() == 20);
  CHECK(means.at("x1") == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(means.at("x2") == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(context_means(fix_b_data()) == means);
}

TEST_CASE("sampling") {
  const Instance inst = generate_instance(GeneratorSpec{}, 3);
  const Dataset a = sample_dataset(inst, 100, 1), b = sample_dataset(inst, 100, 1), c = sample_dataset(inst, 100, 2);
  CHECK(a.size() == 100);
  std::ostringstream sa, sb, sc;
  write_dataset_csv(a, sa);
  write_dataset_csv(b, sb);
  write_dataset_csv(c, sc);
  CHECK(sa.str() == sb.str());
  CHECK(sa.str() != sc.str());
  CHECK(sa.str().substr(0, sa.str().find('\n')) == sc.str().substr(0, sc.str().find('\n')));
  CHECK_THROWS_AS(sample_dataset(inst, 0, 1), Error);
  CHECK_THROWS_AS(sample_dataset(fix_a(), 10, 1), Error);
}

TEST_CASE("empirical-mean anchor is exactly calibrated") {
  const SuiteCase sc = make_suite_case(4, 500);
  const std::size_t k = sc.instance.num_hypotheses() - 1;
  CHECK(sc.instance.hypothesis(k).id() == "empirical_mean");
  const auto f = RandomizedPredictor::point_mass(k, sc.instance.num_hypotheses());
  const auto table = tabulate(sc.instance, sc.data, f);
  CHECK(decision_calibration_error(sc.instance, sc.data, table, ResponseRule::strict()).max_abs() <= 1e-12);
}

TEST_CASE("run on fixture A writes a recomputable report") {
  ExperimentConfig cfg;
  cfg.generator.fixture = "A";
  cfg.samples = fixture_sample_count("A");
  cfg.game.gamma = 0.05;
  cfg.game.epsilon = 0.1;
  cfg.audits.brute_force = true;
  cfg.audits.lp_bound = true;
  cfg.report_out = scratch("report.json");
  cfg.predictor_out = scratch("predictor.json");
  const RunReport r = run_experiment(cfg);
  REQUIRE(r.solve);
  CHECK(r.solve->converged);
  CHECK(r.train.utility >= 0.9);
  CHECK(r.train.calibration.max_abs() <= 0.15 + 1e-12);
  REQUIRE(r.brute_force);
  CHECK(r.brute_force->value == doctest::Approx(1.0).epsilon(1e-9));
  REQUIRE(r.lp_bound);

  const Json saved = read_json_file(*cfg.report_out);
  CHECK(saved.contains("solver"));
  CHECK(saved["train"]["violations"].size() == 4);

  // Recompute from the serialized artifacts.
  const Instance inst = fixture_instance("A");
  const Dataset data = sample_dataset(inst, 100, 0);
  const auto f = load_predictor(inst, *cfg.predictor_out);
  const auto table = tabulate(inst, data, f);
  CHECK(std::abs(table_stats(inst, data, table, ResponseRule::strict()).utility -
                 saved["train"]["sender_utility"].get<double>()) <= 1e-12);
  CHECK(std::abs(decision_calibration_error(inst, data, table, ResponseRule::strict()).max_abs() -
                 saved["train"]["decce"].get<double>()) <= 1e-12);

  // Same config, same report.
  const RunReport again = run_experiment(cfg);
  CHECK(strip_clock(report_to_json(again)) == strip_clock(report_to_json(r)));

  // Audit-only mode on the saved predictor has no solver section.
  ExperimentConfig audit = cfg;
  audit.predictor_path = cfg.predictor_out;
  audit.predictor_out.reset();
  audit.report_out.reset();
  const RunReport ar = run_experiment(audit);
  CHECK_FALSE(ar.solve);
  CHECK_FALSE(report_to_json(ar).contains("solver"));
  CHECK(ar.train.utility == r.train.utility);
  CHECK(render_report(report_to_json(ar)).find("solver") == std::string::npos);
}

TEST_CASE("run with holdout and trace") {
  ExperimentConfig cfg;
  cfg.generator = suite_spec(2);
  cfg.seed = 2;
  cfg.samples = 400;
  cfg.holdout_samples = 300;
  cfg.anchor_mean = true;
  cfg.game.gamma = 0.05;
  cfg.game.epsilon = 0.2;
  cfg.game.trace_stride = 1000;
  cfg.trace_out = scratch("trace.jsonl");
  const RunReport r = run_experiment(cfg);
  REQUIRE(r.holdout);
  CHECK(r.holdout->samples == 300);
  CHECK(r.hypothesis_ids.back() == "empirical_mean");
  std::ifstream in(*cfg.trace_out);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    const Json j = Json::parse(line);
    CHECK(j.contains("gains"));
    ++lines;
  }
  CHECK(lines == (r.solve->rounds + 999) / 1000);
}

TEST_CASE("bench summary") {
  BenchConfig b;
  b.count = 2;
  b.samples = 300;
  b.epsilon = 0.2;
  const Json out = run_bench(b);
  CHECK(out["runs"].size() == 2);
  CHECK(out["passed"].get<std::size_t>() <= 2);
}
