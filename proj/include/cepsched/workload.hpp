#pragma once

// Synthetic event streams and per-window operator cost models.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cepsched/core.hpp"

namespace cepsched {

struct ConstantIat {
  Millis mean{};
};
struct ExponentialIat {
  Millis mean{};
};
/// Exponential gaps whose mean follows a cosine between max_mean (t = 0) and min_mean.
struct SinusoidalExponentialIat {
  Millis min_mean{};
  Millis max_mean{};
  Millis period{};
};
/// burst_size events intra_gap apart; a new burst starts every inter_gap.
struct BurstIat {
  std::uint32_t burst_size{};
  Millis intra_gap{};
  Millis inter_gap{};
};
using IatProfile = std::variant<ConstantIat, ExponentialIat, SinusoidalExponentialIat, BurstIat>;

enum class Scenario { traffic, face, custom };

enum class WindowPolicy {
  none,
  keyed_aperiodic,  // open on open_type with a fresh key, close on close_type with that key
  time_based,       // open on open_type, close at open_ts + scope
};

struct WindowRules {
  WindowPolicy policy{WindowPolicy::none};
  TypeId open_type{};
  TypeId close_type{};
  Millis scope{};
};

/// Window scope parameters. Traffic windows draw travel times from
/// [ws_min, ws_max]; time-based windows use ws.
struct ScopeProfile {
  Millis ws_min{};
  Millis ws_max{};
  Millis ws{};
};

enum class CostKind { equi_join, flat_per_type, custom_table };

/// Per-window processing cost of one event.
///
/// equi_join:     build_type costs base; probe_type costs base + incr * (build events seen).
///                Any other type costs its base.
/// flat_per_type: base(etype), independent of position.
/// custom_table:  (base(etype) + incr * members seen) * payload_cost_hint.
struct CostModel {
  CostKind kind{CostKind::flat_per_type};
  std::vector<std::optional<Millis>> base;  // indexed by TypeId
  Millis incr{};
  TypeId build_type{};
  TypeId probe_type{};

  void validate() const;
};

struct WorkloadConfig {
  Scenario scenario{Scenario::custom};
  std::uint64_t seed{1};
  Millis duration{};
  std::optional<std::uint64_t> max_events;
  IatProfile iat{ConstantIat{100.0}};
  /// Face scenario: arrival process of query events.
  std::optional<IatProfile> query_iat;
  /// Custom scenario: probability per type name.
  std::map<std::string, double> type_mix;
  ScopeProfile scope;
  /// Custom scenario window rules, by type name.
  WindowPolicy window_policy{WindowPolicy::none};
  std::string window_open_type;
  std::string window_close_type;
  /// Lognormal sigma of payload_cost_hint; 0 leaves hints unset.
  double cost_jitter_sigma{0.0};

  CostKind cost_kind{CostKind::flat_per_type};
  std::map<std::string, Millis> cost_base;
  Millis cost_incr{};

  /// Throws ConfigError naming the offending field.
  void validate() const;
  TypeTable types() const;
  WindowRules window_rules(const TypeTable& types) const;
  CostModel cost_model(const TypeTable& types) const;
};

/// Deterministic for a fixed config (seed included). Events are in total
/// order and carry seq = position.
std::vector<Event> generate_stream(const WorkloadConfig& cfg);

/// Cost of processing e in one window. prior_counts holds the window's
/// member counts per type before e. Throws CostModelError for unknown types.
Millis in_window_cost(const CostModel& model, const Event& e,
                      std::span<const std::uint32_t> prior_counts);

std::string_view to_string(Scenario s);
std::string_view to_string(CostKind k);

}  // namespace cepsched
