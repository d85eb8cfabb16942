#pragma once

// Shared vocabulary: events, windows, latency samples, simulated time and the
// error types every other module throws.

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cepsched {

/// Simulated time in integer milliseconds.
using Timestamp = std::int64_t;
/// Durations and latencies are carried as double milliseconds.
using Millis = double;

using WindowId = std::uint64_t;
using InstanceIndex = std::size_t;

/// Dense index of an event type inside a TypeTable.
struct TypeId {
  std::uint16_t value{};
  friend constexpr auto operator<=>(TypeId, TypeId) = default;
};

/// Maps type names ("L1", "face", ...) to dense ids.
class TypeTable {
public:
  TypeTable() = default;
  explicit TypeTable(std::vector<std::string> names);

  TypeId intern(std::string_view name);
  std::optional<TypeId> find(std::string_view name) const;
  /// Throws ConfigError when the name is unknown.
  TypeId at(std::string_view name) const;
  const std::string& name(TypeId id) const { return names_.at(id.value); }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

private:
  std::vector<std::string> names_;
};

struct Event {
  std::uint64_t seq{};
  Timestamp ts{};
  TypeId etype{};
  std::optional<std::uint64_t> key;
  std::optional<double> payload_cost_hint;
};

/// Total order by (ts, seq).
std::strong_ordering compare_events(const Event& a, const Event& b);

struct WindowDescriptor {
  WindowId wid{};
  std::uint64_t start_seq{};
  Timestamp open_ts{};
  std::optional<Timestamp> close_ts;
  InstanceIndex assigned_instance{};
  std::vector<std::uint32_t> member_count_per_type;
  std::optional<std::uint64_t> key;

  /// Window scope; only meaningful once closed.
  std::optional<Millis> scope() const {
    if (!close_ts) return std::nullopt;
    return static_cast<Millis>(*close_ts - open_ts);
  }
};

class SimClock {
public:
  Timestamp now() const { return now_; }
  /// Throws std::logic_error when asked to move backwards.
  void advance_to(Timestamp t);

private:
  Timestamp now_{0};
};

/// One processed (event, instance) pair. lambda_o is always lambda_q + lambda_p.
class LatencySample {
public:
  LatencySample(std::uint64_t event_seq, InstanceIndex instance, Millis lambda_q, Millis lambda_p,
                Timestamp ts);

  std::uint64_t event_seq() const { return event_seq_; }
  InstanceIndex instance() const { return instance_; }
  Millis lambda_q() const { return lambda_q_; }
  Millis lambda_p() const { return lambda_p_; }
  Millis lambda_o() const { return lambda_o_; }
  Timestamp ts() const { return ts_; }

private:
  std::uint64_t event_seq_;
  InstanceIndex instance_;
  Millis lambda_q_;
  Millis lambda_p_;
  Millis lambda_o_;
  Timestamp ts_;
};

/// What an operator instance tells the splitter about its input queue.
struct FeedbackReport {
  InstanceIndex instance{};
  std::vector<std::uint64_t> queued_counts;  // indexed by TypeId
  double theta_bar_rep{1.0};
  std::optional<Millis> last_lambda_o;
  Millis emitted_at{};

  std::uint64_t total_queued() const;
};

class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string field, const std::string& message);
  const std::string& field() const { return field_; }

private:
  std::string field_;
};

class CostModelError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace cepsched
