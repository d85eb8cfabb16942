#pragma once

// Discrete-event simulation of the split-process-merge operator: one
// splitter, n simulated operator instances, one merger.

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "cepsched/core.hpp"
#include "cepsched/latency_model.hpp"
#include "cepsched/scheduler.hpp"
#include "cepsched/splitter.hpp"
#include "cepsched/workload.hpp"

namespace cepsched {

struct RuntimeParams {
  Millis mtime{60000.0};
  /// Defaults to mtime / 10.
  std::optional<Millis> feedback_interval;
  Millis feedback_delay{0.0};
  Millis transfer_delay{0.0};
  /// Bound used for violation accounting; model-based runs default to their LB.
  std::optional<Millis> latency_bound;

  void validate() const;
  Millis effective_feedback_interval() const { return feedback_interval.value_or(mtime / 10.0); }
};

struct SimulationConfig {
  WorkloadConfig workload;
  SchedulerConfig scheduler;
  ModelParams model;
  RuntimeParams runtime;

  void validate() const;
};

/// One event waiting in (or being served from) an instance's input queue.
struct QueuedItem {
  Event event;
  std::vector<WindowId> windows;  // member windows owned by this instance
  std::vector<WindowId> closing;  // subset closed by this event
  Millis arrival{};
  std::size_t record{};  // index into the instance trace
};

struct InstanceState {
  InstanceIndex idx{};
  std::deque<QueuedItem> queue;  // front is in service while busy
  Millis busy_until{};
  bool busy{false};
  std::unordered_map<WindowId, std::vector<std::uint32_t>> per_window_state;
  std::optional<Millis> last_lambda_o;
  FeedbackReport feedback;
};

/// Report of the instance's queue at `now`. An empty queue reports
/// theta_bar_rep = 1.
FeedbackReport emit_feedback(const InstanceState& instance, Millis now, std::size_t n_types);

struct OutputRecord {
  std::uint64_t seq{};
  InstanceIndex instance{};
  Millis emitted_at{};
};

/// Merges per-instance, locally seq-ordered outputs into one seq-ordered
/// stream. Equal seqs keep instance order.
std::vector<OutputRecord> merge(std::span<const std::vector<OutputRecord>> outputs);

/// One (event, instance) processing step, in arrival order per instance.
struct TraceRecord {
  std::uint64_t seq{};
  TypeId etype{};
  Millis arrival{};
  Millis lambda_q{};
  Millis lambda_p{};
  std::size_t queue_length{};  // including this event, at its arrival
};

struct DecisionRecord {
  WindowId wid{};
  Timestamp ts{};
  InstanceIndex instance{};
  bool advanced{};
  std::optional<LatencyPrediction> prediction;
  std::optional<Millis> observed_lambda_o;
};

/// Measured counterpart of a prediction: gains and peaks over the window's
/// events on its instance.
struct WindowActual {
  WindowId wid{};
  InstanceIndex instance{};
  Timestamp open_ts{};
  std::optional<Timestamp> close_ts;
  std::size_t events{};
  Millis gamma_minus{};
  Millis gamma_plus{};
  Millis lambda_q_init{};
  Millis lambda_q_peak{};
  Millis lambda_o_peak{};
};

/// Consecutive windows scheduled onto the same instance.
struct BatchRecord {
  WindowId first_wid{};
  InstanceIndex instance{};
  Timestamp start{};
  Timestamp end{};
  std::size_t windows{};
};

struct FeedbackDelay {
  WindowId first_wid{};
  InstanceIndex instance{};
  Millis lambda_o_delay{};
  Millis peak_lambda_o{};
  Millis queue_delay{};
  std::size_t peak_queue{};
};

struct RunMetrics {
  std::vector<LatencySample> latency_samples;
  std::uint64_t events{};
  std::uint64_t events_in_windows{};
  std::uint64_t transmissions{};
  std::vector<std::uint64_t> transmissions_per_instance;
  std::vector<std::uint64_t> processed_per_instance;
  std::optional<Millis> latency_bound;
  std::uint64_t lb_violations{};
  Millis max_violation{};
  std::uint64_t windows_opened{};
  std::uint64_t dropped_closes{};
  std::vector<DecisionRecord> decisions;
  std::vector<WindowActual> windows;
  std::vector<BatchRecord> batches;
  std::vector<FeedbackDelay> feedback_delays;
  std::vector<std::vector<TraceRecord>> traces;  // per instance
  std::vector<OutputRecord> merged_output;
  TypeTable types;

  Millis max_lambda_o() const;
  /// Nearest-rank percentile of lambda_o, q in (0, 1].
  Millis lambda_o_quantile(double q) const;
};

/// Feedback delay of the batch containing window `wid`; nullopt when the
/// batch processed no events.
std::optional<FeedbackDelay> measure_feedback_delay(const RunMetrics& metrics, WindowId wid);

class Simulation {
public:
  Simulation(std::vector<Event> events, TypeTable types, WindowRules rules, CostModel cost,
             SchedulerConfig scheduler, ModelParams model, RuntimeParams runtime);

  RunMetrics run();

private:
  std::vector<Event> events_;
  TypeTable types_;
  WindowRules rules_;
  CostModel cost_;
  SchedulerConfig scheduler_;
  ModelParams model_;
  RuntimeParams runtime_;
};

/// Generates the workload and simulates it. Config errors surface before
/// any simulation work.
RunMetrics run(const SimulationConfig& cfg);

}  // namespace cepsched
