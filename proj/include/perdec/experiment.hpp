#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "perdec/audit.hpp"
#include "perdec/bayes.hpp"
#include "perdec/instance.hpp"
#include "perdec/io.hpp"
#include "perdec/solver.hpp"

namespace perdec {

struct GeneratorSpec {
  std::size_t receivers = 1;
  std::size_t actions = 2;
  std::size_t dim = 1;
  std::size_t hypotheses = 3;
  std::size_t contexts = 4;
  OutcomeSupport support = OutcomeSupport::kBinary;
  // "A" or "B" selects a fixed fixture instead of random draws.
  std::string fixture;
};

inline constexpr std::size_t kMaxGeneratedHypotheses = 10000;

Instance generate_instance(const GeneratorSpec& spec, std::uint64_t seed);
Instance fixture_instance(const std::string& name);
// Row count that reproduces the fixture's exact proportions.
std::size_t fixture_sample_count(const std::string& name);

Dataset sample_dataset(const Instance& instance, std::size_t n, std::uint64_t seed);

// Appends a constant hypothesis at the dataset's mean outcome, which is
// exactly decision calibrated on that dataset.
Instance with_empirical_mean_hypothesis(const Instance& instance, const Dataset& data,
                                        const std::string& id = "empirical_mean");

// The randomized small-instance family used by the bench: N <= 2, m <= 3,
// d <= 2, three generated hypotheses plus the empirical-mean anchor.
GeneratorSpec suite_spec(std::uint64_t seed);

struct SuiteCase {
  Instance instance;
  Dataset data;
};

SuiteCase make_suite_case(std::uint64_t seed, std::size_t n);

struct AuditOptions {
  std::vector<RegretKind> regrets{RegretKind::kSwap, RegretKind::kType, RegretKind::kSwapType};
  bool brute_force = false;
  double grid_step = 0.01;
  bool lp_bound = false;
};

struct ExperimentConfig {
  std::optional<std::filesystem::path> instance_path;
  GeneratorSpec generator;
  std::optional<std::filesystem::path> dataset_path;
  std::size_t samples = 2000;
  std::optional<std::filesystem::path> holdout_path;
  std::size_t holdout_samples = 0;
  bool anchor_mean = false;
  std::uint64_t seed = 0;
  GameConfig game;
  // Audit-only mode when set.
  std::optional<std::filesystem::path> predictor_path;
  AuditOptions audits;
  std::optional<std::filesystem::path> report_out;
  std::optional<std::filesystem::path> predictor_out;
  std::optional<std::filesystem::path> trace_out;
};

struct AuditSummary {
  std::size_t samples = 0;
  double utility = 0.0;
  CalibrationReport calibration;
  double full_calibration = 0.0;
  std::vector<RegretReport> regrets;
};

struct SolveSummary {
  double gap = 0.0;
  std::uint64_t rounds = 0;
  bool converged = false;
  double rate = 0.0;
  std::uint64_t horizon = 0;
  double mass = 0.0;
  double gap_target = 0.0;
};

struct RunReport {
  Json config;
  std::vector<std::string> hypothesis_ids;
  RandomizedPredictor predictor{Vec{1.0}};
  std::optional<SolveSummary> solve;
  AuditSummary train;
  std::optional<AuditSummary> holdout;
  std::optional<BruteForceResult> brute_force;
  std::optional<SignalingBound> lp_bound;
  double wall_clock_seconds = 0.0;
  std::string version;
};

AuditSummary audit_predictor(const Instance& instance, const Dataset& data, const RandomizedPredictor& f,
                             const ResponseRule& rule, const AuditOptions& options);

RunReport run_experiment(const ExperimentConfig& config);

Json config_to_json(const ExperimentConfig& config);
Json report_to_json(const RunReport& report);
void write_report(const RunReport& report, const std::filesystem::path& path);
// Human-readable summary of a serialized report.
std::string render_report(const Json& report);

struct BenchConfig {
  std::size_t count = 20;
  std::uint64_t seed = 1;
  std::size_t samples = 2000;
  double gamma = 0.05;
  double epsilon = 0.1;
  std::optional<double> eta;
  std::optional<std::uint64_t> t_max;
  bool brute_force = true;
  bool lp_bound = true;
};

Json run_bench(const BenchConfig& config);

const char* version();

}  // namespace perdec
