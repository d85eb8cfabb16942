#include "cepsched/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cepsched {

TypeTable::TypeTable(std::vector<std::string> names) {
  for (auto& n : names) intern(n);
}

TypeId TypeTable::intern(std::string_view name) {
  if (auto id = find(name)) return *id;
  if (names_.size() >= std::numeric_limits<std::uint16_t>::max())
    throw ConfigError("types", "too many event types");
  names_.emplace_back(name);
  return TypeId{static_cast<std::uint16_t>(names_.size() - 1)};
}

std::optional<TypeId> TypeTable::find(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return TypeId{static_cast<std::uint16_t>(it - names_.begin())};
}

TypeId TypeTable::at(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw ConfigError("types", "unknown event type '" + std::string(name) + "'");
}

std::strong_ordering compare_events(const Event& a, const Event& b) {
  if (auto c = a.ts <=> b.ts; c != 0) return c;
  return a.seq <=> b.seq;
}

void SimClock::advance_to(Timestamp t) {
  if (t < now_) throw std::logic_error("simulated clock cannot move backwards");
  now_ = t;
}

LatencySample::LatencySample(std::uint64_t event_seq, InstanceIndex instance, Millis lambda_q,
                             Millis lambda_p, Timestamp ts)
    : event_seq_(event_seq),
      instance_(instance),
      lambda_q_(lambda_q),
      lambda_p_(lambda_p),
      lambda_o_(lambda_q + lambda_p),
      ts_(ts) {
  if (!(lambda_q >= 0.0) || !(lambda_p >= 0.0))
    throw std::invalid_argument("latency components must be non-negative");
}

std::uint64_t FeedbackReport::total_queued() const {
  return std::accumulate(queued_counts.begin(), queued_counts.end(), std::uint64_t{0});
}

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

}  // namespace cepsched
