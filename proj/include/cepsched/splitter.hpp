#pragma once

// Splitter side of the operator: window detection, routing and the
// monitoring statistics that feed the latency model.

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "cepsched/core.hpp"
#include "cepsched/workload.hpp"

namespace cepsched {

/// Equal-width histogram bin with Welford moments.
struct Bin {
  double lo{};
  double hi{};
  std::uint64_t count{};
  double mean{};
  double variance_accum{};

  void add(double v);
  /// Population standard deviation of the entries; 0 for fewer than two.
  double stddev() const;
};

/// Frozen histogram of one monitored quantity.
struct BinnedDistribution {
  std::vector<Bin> bins;
  std::uint64_t total{};
  double mean{};
  double stddev{};
  double min{};
  double max{};

  double weight(std::size_t i) const;
};

/// Splits [min, max] of values into n_bins equal-width bins. Single pass
/// for the range, single pass for the binning. Requires non-empty values.
BinnedDistribution build_bins(std::span<const double> values, std::size_t n_bins);

struct TCount {
  std::uint64_t c_minus{};
  std::uint64_t c_plus{};
  std::uint64_t c_trans{};
};

struct StreamStatsSnapshot {
  std::optional<BinnedDistribution> iat;
  std::vector<std::optional<BinnedDistribution>> latency;  // per TypeId, in-window latency
  std::vector<double> type_ratio;                           // per TypeId
  std::optional<Millis> ws_est;
  std::optional<Millis> delta_est;
  TCount tcount;
  /// T- group membership per type, derived from this snapshot's latencies.
  std::vector<bool> high_cost;
  Timestamp frozen_at{};
  std::uint64_t event_count{};
  bool stale{true};

  /// Enough information to predict a window.
  bool usable() const;
};

/// Groups types by mean in-window latency: the upper half (median and ties
/// included) form T-. Types without latency data fall into T+.
std::vector<bool> high_cost_groups(const std::vector<std::optional<BinnedDistribution>>& latency);

/// Tumbling-window monitor kept by the splitter.
class StreamStats {
public:
  StreamStats(std::size_t n_types, std::size_t n_iat_bins, std::size_t n_lat_bins);

  /// Throws std::invalid_argument if e.ts precedes the previous event.
  void observe_event(const Event& e);
  void observe_latency(TypeId type, Millis lambda_pw);
  void observe_window_open(Timestamp open_ts);
  void observe_window_close(Millis scope);

  /// Freezes the current monitoring window. With no events observed the
  /// previous snapshot is kept and flagged stale.
  const StreamStatsSnapshot& end_monitoring_window(Timestamp now);

  const StreamStatsSnapshot& snapshot() const { return snapshot_; }
  const TCount& live_tcount() const { return tcount_; }
  std::size_t live_iat_entries() const { return iats_.size(); }

private:
  std::size_t n_types_;
  std::size_t n_iat_bins_;
  std::size_t n_lat_bins_;

  std::optional<Timestamp> prev_ts_;
  std::optional<Timestamp> prev_open_ts_;
  std::optional<bool> prev_group_;
  std::vector<double> iats_;
  std::vector<std::vector<double>> latencies_;
  std::vector<std::uint64_t> type_counts_;
  std::vector<double> scopes_;
  std::vector<double> shifts_;
  std::uint64_t events_{0};
  TCount tcount_;

  StreamStatsSnapshot snapshot_;
};

struct Detection {
  std::vector<WindowId> opened;
  std::vector<WindowDescriptor> closed;
  std::vector<WindowId> memberships;
  bool dropped_close{false};
};

class WindowDetector {
public:
  WindowDetector(WindowRules rules, std::size_t n_types);

  /// Events must arrive in total order.
  Detection detect(const Event& e);

  const std::vector<WindowDescriptor>& open_windows() const { return open_; }
  WindowDescriptor* find_open(WindowId wid);
  std::uint64_t dropped_closes() const { return dropped_closes_; }
  WindowId windows_opened() const { return next_wid_; }

private:
  void close_at(std::size_t idx, Timestamp close_ts, Detection& out);

  WindowRules rules_;
  std::size_t n_types_;
  std::vector<WindowDescriptor> open_;
  std::vector<Timestamp> deadlines_;  // parallel to open_, time-based only
  std::unordered_map<std::uint64_t, WindowId> by_key_;
  WindowId next_wid_{0};
  std::uint64_t dropped_closes_{0};
};

/// Distinct instances owning at least one member window, ascending. One
/// transmission per returned instance.
std::vector<InstanceIndex> route_event(std::span<const InstanceIndex> member_instances);

}  // namespace cepsched
