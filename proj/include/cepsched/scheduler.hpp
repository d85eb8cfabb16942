#pragma once

// Window scheduling controllers: Round-Robin, latency-reactive and
// model-based batch scheduling behind one interface.

#include <optional>
#include <span>
#include <string_view>
#include <variant>

#include "cepsched/core.hpp"
#include "cepsched/latency_model.hpp"
#include "cepsched/splitter.hpp"

namespace cepsched {

struct RoundRobinPolicy {};
/// Keep batching while the current instance's last reported latency is below threshold.
struct ReactivePolicy {
  Millis threshold{};
};
/// Keep batching while the predicted operational-latency peak stays within the bound.
struct ModelBasedPolicy {
  Millis latency_bound{};
  ModelParams model;
};
using SchedulerPolicy = std::variant<RoundRobinPolicy, ReactivePolicy, ModelBasedPolicy>;

struct SchedulerConfig {
  SchedulerPolicy policy{RoundRobinPolicy{}};
  std::size_t n_instances{1};

  void validate() const;
  std::string_view kind_name() const;
};

/// What the splitter knows about one instance at decision time.
struct InstanceView {
  std::size_t open_windows{};
  const FeedbackReport* feedback{};
};

struct SchedulingContext {
  const StreamStatsSnapshot* snapshot{};
  std::span<const InstanceView> instances;
};

struct Decision {
  InstanceIndex instance{};
  bool advanced{};
  std::optional<LatencyPrediction> prediction;  // model-based
  std::optional<Millis> observed_lambda_o;      // reactive
};

class Scheduler {
public:
  explicit Scheduler(SchedulerConfig cfg);

  /// Picks the instance for a window that has just opened.
  Decision schedule(const WindowDescriptor& window, const SchedulingContext& ctx);

  const SchedulerConfig& config() const { return cfg_; }
  InstanceIndex cursor() const { return cursor_; }

private:
  InstanceIndex advance();

  SchedulerConfig cfg_;
  InstanceIndex cursor_{0};
  bool started_{false};
};

}  // namespace cepsched
