#include "cepsched/scheduler.hpp"

#include <cmath>

namespace cepsched {

void SchedulerConfig::validate() const {
  if (n_instances < 1) throw ConfigError("n_instances", "must be >= 1");
  if (const auto* r = std::get_if<ReactivePolicy>(&policy)) {
    if (!(r->threshold > 0.0)) throw ConfigError("scheduler.threshold_ms", "must be > 0");
  } else if (const auto* m = std::get_if<ModelBasedPolicy>(&policy)) {
    // +inf is allowed: it batches everything onto one instance.
    if (!(m->latency_bound > 0.0)) throw ConfigError("scheduler.latency_bound_ms", "must be > 0");
    m->model.validate();
  }
}

std::string_view SchedulerConfig::kind_name() const {
  switch (policy.index()) {
    case 0: return "round_robin";
    case 1: return "reactive";
    default: return "model_based";
  }
}

Scheduler::Scheduler(SchedulerConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.n_instances < 1) throw ConfigError("n_instances", "must be >= 1");
}

InstanceIndex Scheduler::advance() {
  cursor_ = (cursor_ + 1) % cfg_.n_instances;
  return cursor_;
}

Decision Scheduler::schedule(const WindowDescriptor& /*window*/, const SchedulingContext& ctx) {
  Decision d;
  if (std::holds_alternative<RoundRobinPolicy>(cfg_.policy)) {
    if (started_) advance();
    started_ = true;
    d.instance = cursor_;
    d.advanced = true;
    return d;
  }
  // The first window has no previous batch to join.
  const bool first = !started_;
  started_ = true;

  const InstanceView* current = cursor_ < ctx.instances.size() ? &ctx.instances[cursor_] : nullptr;

  if (const auto* reactive = std::get_if<ReactivePolicy>(&cfg_.policy)) {
    const Millis observed =
        current && current->feedback ? current->feedback->last_lambda_o.value_or(0.0) : 0.0;
    d.observed_lambda_o = observed;
    if (!first && observed >= reactive->threshold) {
      advance();
      d.advanced = true;
    }
    d.instance = cursor_;
    return d;
  }

  const auto& mb = std::get<ModelBasedPolicy>(cfg_.policy);
  static const StreamStatsSnapshot kEmpty{};
  const auto& snapshot = ctx.snapshot ? *ctx.snapshot : kEmpty;
  d.prediction = predict_window(snapshot, current ? current->open_windows : 0,
                                current ? current->feedback : nullptr, mb.model);
  if (!first && !(d.prediction->lambda_o_max <= mb.latency_bound)) {
    advance();
    d.advanced = true;
  }
  d.instance = cursor_;
  return d;
}

}  // namespace cepsched
