// cepsched: run window-scheduling experiments on the simulated split-merge operator.

#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cepsched/experiment.hpp"

namespace {

int cmd_selftest_worked_example() {
  const auto r = cepsched::selftest_worked_example();
  fmt::print("Gamma- = {}\n", r.gamma_minus);
  fmt::print("Gamma+ = {}\n", r.gamma_plus);
  fmt::print("lambda_q_max(alpha=0)   = {}\n", r.lambda_q_max_alpha0);
  fmt::print("lambda_q_max(alpha=0.8) = {}\n", r.lambda_q_max_alpha08);
  fmt::print("lambda_q_max(alpha=1)   = {}\n", r.lambda_q_max_alpha1);
  fmt::print("simulated peak, worst order = {}\n", r.simulated_worst_peak);
  fmt::print("simulated peak, best order  = {}\n", r.simulated_best_peak);
  fmt::print("{}\n", r.ok ? "OK" : "MISMATCH");
  return r.ok ? 0 : 1;
}

int cmd_bench(std::size_t iat_bins, std::size_t lat_bins, std::size_t types, std::size_t decisions,
              bool monitoring) {
  const auto b = cepsched::bench_scheduling_latency(iat_bins, lat_bins, types, decisions);
  fmt::print("total bins: {}\n", b.total_bins);
  fmt::print("decisions: {}\n", b.decisions);
  fmt::print("model_based median: {:.6f} ms, mean: {:.6f} ms\n", b.model_based_median, b.model_based_mean);
  fmt::print("round_robin median: {:.6f} ms\n", b.round_robin_median);
  fmt::print("reactive median: {:.6f} ms\n", b.reactive_median);
  if (monitoring) {
    const auto small = cepsched::time_monitoring_update(100000, iat_bins);
    const auto large = cepsched::time_monitoring_update(1000000, iat_bins);
    fmt::print("monitoring update 1e5 entries: {:.3f} ms\n", small);
    fmt::print("monitoring update 1e6 entries: {:.3f} ms\n", large);
    fmt::print("ratio: {:.2f}\n", large / small);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate and compare window schedulers for a parallel CEP operator"};
  app.require_subcommand(1);

  std::string config;
  std::uint64_t seed = 0;
  std::string out_dir;
  unsigned jobs = 1;

  auto* run = app.add_subcommand("run", "Run the base configuration once");
  run->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  auto* run_seed = run->add_option("--seed", seed, "Override workload.seed");
  auto* run_out = run->add_option("--out", out_dir, "Output directory");

  auto* sweep = app.add_subcommand("sweep", "Run every point of the config's sweep");
  sweep->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  auto* sweep_seed = sweep->add_option("--seed", seed, "Override workload.seed");
  auto* sweep_out = sweep->add_option("--out", out_dir, "Output directory");
  sweep->add_option("--jobs", jobs, "Parallel runs")->check(CLI::PositiveNumber);

  app.add_subcommand("selftest-fig45", "Check the seven-event worked example");

  std::size_t iat_bins = 8, lat_bins = 4, types = 6, decisions = 10000;
  bool monitoring = false;
  auto* bench = app.add_subcommand("bench-scheduling-latency", "Time scheduling decisions on this host");
  bench->add_option("--iat-bins", iat_bins)->check(CLI::PositiveNumber);
  bench->add_option("--lat-bins", lat_bins, "Latency bins per type")->check(CLI::PositiveNumber);
  bench->add_option("--types", types)->check(CLI::Range(1, 1000));
  bench->add_option("--decisions", decisions)->check(CLI::PositiveNumber);
  bench->add_flag("--monitoring", monitoring, "Also time monitoring-window updates");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("selftest-fig45")) return cmd_selftest_worked_example();
    if (app.got_subcommand(bench)) return cmd_bench(iat_bins, lat_bins, types, decisions, monitoring);

    cepsched::ExperimentOptions opts;
    const bool is_sweep = app.got_subcommand(sweep);
    opts.sweep = is_sweep;
    opts.jobs = jobs;
    if ((is_sweep ? sweep_seed : run_seed)->count() > 0) opts.seed = seed;
    if ((is_sweep ? sweep_out : run_out)->count() > 0) opts.output_dir = out_dir;
    return cepsched::run_experiment(config, opts, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
