#pragma once

// Experiment driver: JSON configs, parameter sweeps, CSV outputs and the
// built-in self-test and benchmark routines behind the CLI.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cepsched/runtime.hpp"

namespace cepsched {

struct SweepAxis {
  std::string field;  // JSON pointer, e.g. "/scheduler/lb_rr_multiple"
  std::vector<nlohmann::json> values;
};

struct ExperimentConfig {
  SimulationConfig sim;
  /// Model-based only: LB = multiple * max lambda_o of Round-Robin on the same workload.
  std::optional<double> lb_rr_multiple;
  std::vector<SweepAxis> sweep;
  std::filesystem::path output_dir{"out"};
  nlohmann::json source;
};

/// Throws ConfigError with the offending field path.
ExperimentConfig parse_experiment(const nlohmann::json& doc);
ExperimentConfig load_experiment(const std::filesystem::path& path);

/// One concrete run of a sweep.
struct RunPoint {
  std::string run_id;
  ExperimentConfig config;
};

/// Cartesian product of the sweep axes; a single point without a sweep.
std::vector<RunPoint> expand_sweep(const ExperimentConfig& base);

struct SummaryRow {
  std::string run_id;
  std::string scheduler;
  std::optional<double> param;  // LB or TH
  Millis max_lo{};
  Millis p99_lo{};
  std::uint64_t transmissions{};
  std::uint64_t violations{};
};

SummaryRow summarize(const std::string& run_id, const SimulationConfig& cfg, const RunMetrics& m);

/// Resolves lb_rr_multiple (running the Round-Robin baseline) and simulates.
RunMetrics run_point(const ExperimentConfig& cfg, std::optional<Millis>* resolved_lb = nullptr);

void write_run_csvs(const std::filesystem::path& dir, const RunMetrics& m,
                    const SimulationConfig& cfg);
void write_summary(const std::filesystem::path& file, const std::vector<SummaryRow>& rows);

struct ExperimentOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
  bool sweep{false};
  unsigned jobs{1};
};

/// Runs a config file and writes per-run CSVs plus summary.csv. Returns the
/// process exit status; errors are reported on err.
int run_experiment(const std::filesystem::path& config_path, const ExperimentOptions& opts,
                   std::ostream& out, std::ostream& err);

struct WorkedExampleResult {
  Millis gamma_minus{};
  Millis gamma_plus{};
  Millis lambda_q_max_alpha0{};
  Millis lambda_q_max_alpha08{};
  Millis lambda_q_max_alpha1{};
  Millis simulated_worst_peak{};
  Millis simulated_best_peak{};
  bool ok{};
};

/// Seven events with latencies {8,8,7,7,4,4,2} arriving every 5 time units.
WorkedExampleResult selftest_worked_example();

struct SchedulingBench {
  std::size_t total_bins{};
  std::size_t decisions{};
  Millis model_based_median{};
  Millis model_based_mean{};
  Millis round_robin_median{};
  Millis reactive_median{};
};

SchedulingBench bench_scheduling_latency(std::size_t n_iat_bins, std::size_t n_lat_bins_per_type,
                                         std::size_t n_types, std::size_t decisions);

/// Median wall time (ms) of freezing a monitoring window holding `entries`
/// inter-arrival times into `bins` bins.
Millis time_monitoring_update(std::size_t entries, std::size_t bins, int repetitions = 5);

}  // namespace cepsched
