#include "cepsched/splitter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cepsched {

void Bin::add(double v) {
  ++count;
  const double d = v - mean;
  mean += d / static_cast<double>(count);
  variance_accum += d * (v - mean);
}

double Bin::stddev() const {
  if (count < 2) return 0.0;
  return std::sqrt(std::max(0.0, variance_accum / static_cast<double>(count)));
}

double BinnedDistribution::weight(std::size_t i) const {
  if (total == 0) return 0.0;
  return static_cast<double>(bins.at(i).count) / static_cast<double>(total);
}

BinnedDistribution build_bins(std::span<const double> values, std::size_t n_bins) {
  if (values.empty()) throw std::invalid_argument("build_bins: no values");
  if (n_bins == 0) throw std::invalid_argument("build_bins: need at least one bin");

  const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *mn_it;
  const double hi = *mx_it;
  double width = (hi - lo) / static_cast<double>(n_bins);
  if (!(width > 0.0)) width = std::max(1e-9, 1e-9 * std::abs(lo));

  BinnedDistribution d;
  d.min = lo;
  d.max = hi;
  d.bins.resize(n_bins);
  for (std::size_t i = 0; i < n_bins; ++i) {
    d.bins[i].lo = lo + width * static_cast<double>(i);
    d.bins[i].hi = (i + 1 == n_bins && hi > lo) ? hi : lo + width * static_cast<double>(i + 1);
  }

  Bin all;
  const double inv_width = 1.0 / width;
  for (double v : values) {
    auto pos = static_cast<std::ptrdiff_t>((v - lo) * inv_width);
    pos = std::clamp<std::ptrdiff_t>(pos, 0, static_cast<std::ptrdiff_t>(n_bins) - 1);
    d.bins[static_cast<std::size_t>(pos)].add(v);
    all.add(v);
  }
  d.total = all.count;
  d.mean = all.mean;
  d.stddev = all.stddev();
  return d;
}

bool StreamStatsSnapshot::usable() const {
  if (!iat || !ws_est || !delta_est) return false;
  return std::any_of(latency.begin(), latency.end(), [](const auto& l) { return l.has_value(); });
}

std::vector<bool> high_cost_groups(const std::vector<std::optional<BinnedDistribution>>& latency) {
  std::vector<bool> high(latency.size(), false);
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t t = 0; t < latency.size(); ++t)
    if (latency[t]) ranked.emplace_back(latency[t]->mean, t);
  if (ranked.empty()) return high;
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  const std::size_t upper = (ranked.size() + 1) / 2;
  const double boundary = ranked[upper - 1].first;
  for (const auto& [mean, t] : ranked)
    if (mean >= boundary) high[t] = true;
  return high;
}

StreamStats::StreamStats(std::size_t n_types, std::size_t n_iat_bins, std::size_t n_lat_bins)
    : n_types_(n_types),
      n_iat_bins_(n_iat_bins),
      n_lat_bins_(n_lat_bins),
      latencies_(n_types),
      type_counts_(n_types, 0) {
  if (n_iat_bins == 0 || n_lat_bins == 0)
    throw std::invalid_argument("StreamStats: bin counts must be >= 1");
  snapshot_.latency.resize(n_types);
  snapshot_.type_ratio.assign(n_types, 0.0);
  snapshot_.high_cost.assign(n_types, false);
}

void StreamStats::observe_event(const Event& e) {
  if (prev_ts_ && e.ts < *prev_ts_)
    throw std::invalid_argument("observe_event: timestamps must be non-decreasing");
  if (prev_ts_) iats_.push_back(static_cast<double>(e.ts - *prev_ts_));
  prev_ts_ = e.ts;
  ++events_;
  if (e.etype.value < n_types_) ++type_counts_[e.etype.value];

  const bool high = e.etype.value < snapshot_.high_cost.size() && snapshot_.high_cost[e.etype.value];
  if (high)
    ++tcount_.c_minus;
  else
    ++tcount_.c_plus;
  if (prev_group_ && *prev_group_ != high) ++tcount_.c_trans;
  prev_group_ = high;
}

void StreamStats::observe_latency(TypeId type, Millis lambda_pw) {
  if (type.value >= n_types_) return;
  latencies_[type.value].push_back(lambda_pw);
}

void StreamStats::observe_window_open(Timestamp open_ts) {
  if (prev_open_ts_) shifts_.push_back(static_cast<double>(open_ts - *prev_open_ts_));
  prev_open_ts_ = open_ts;
}

void StreamStats::observe_window_close(Millis scope) { scopes_.push_back(scope); }

const StreamStatsSnapshot& StreamStats::end_monitoring_window(Timestamp now) {
  if (events_ == 0) {
    snapshot_.stale = true;
    return snapshot_;
  }

  StreamStatsSnapshot next;
  next.frozen_at = now;
  next.event_count = events_;
  next.stale = false;
  next.tcount = tcount_;

  next.iat = iats_.empty() ? snapshot_.iat : std::optional(build_bins(iats_, n_iat_bins_));

  next.latency.resize(n_types_);
  for (std::size_t t = 0; t < n_types_; ++t) {
    next.latency[t] = latencies_[t].empty() ? snapshot_.latency[t]
                                            : std::optional(build_bins(latencies_[t], n_lat_bins_));
  }

  next.type_ratio.assign(n_types_, 0.0);
  for (std::size_t t = 0; t < n_types_; ++t)
    next.type_ratio[t] = static_cast<double>(type_counts_[t]) / static_cast<double>(events_);

  auto mean_of = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  next.ws_est = scopes_.empty() ? snapshot_.ws_est : std::optional(mean_of(scopes_));
  next.delta_est = shifts_.empty() ? snapshot_.delta_est : std::optional(mean_of(shifts_));
  next.high_cost = high_cost_groups(next.latency);

  snapshot_ = std::move(next);

  iats_.clear();
  for (auto& l : latencies_) l.clear();
  std::fill(type_counts_.begin(), type_counts_.end(), 0);
  scopes_.clear();
  shifts_.clear();
  events_ = 0;
  tcount_ = {};
  prev_group_.reset();
  return snapshot_;
}

WindowDetector::WindowDetector(WindowRules rules, std::size_t n_types)
    : rules_(rules), n_types_(n_types) {}

WindowDescriptor* WindowDetector::find_open(WindowId wid) {
  auto it = std::lower_bound(open_.begin(), open_.end(), wid,
                             [](const WindowDescriptor& w, WindowId id) { return w.wid < id; });
  if (it == open_.end() || it->wid != wid) return nullptr;
  return &*it;
}

void WindowDetector::close_at(std::size_t idx, Timestamp close_ts, Detection& out) {
  auto w = std::move(open_[idx]);
  w.close_ts = close_ts;
  if (w.key) by_key_.erase(*w.key);
  open_.erase(open_.begin() + static_cast<std::ptrdiff_t>(idx));
  deadlines_.erase(deadlines_.begin() + static_cast<std::ptrdiff_t>(idx));
  out.closed.push_back(std::move(w));
}

Detection WindowDetector::detect(const Event& e) {
  Detection out;
  if (rules_.policy == WindowPolicy::none) return out;

  auto add_member = [&](WindowDescriptor& w) {
    out.memberships.push_back(w.wid);
    if (e.etype.value < w.member_count_per_type.size()) ++w.member_count_per_type[e.etype.value];
  };

  // Time-based windows that expire at or before e. e belongs to a window
  // only up to its deadline.
  if (rules_.policy == WindowPolicy::time_based) {
    for (std::size_t i = 0; i < open_.size();) {
      if (e.ts >= deadlines_[i]) {
        if (e.ts == deadlines_[i]) add_member(open_[i]);
        close_at(i, deadlines_[i], out);
      } else {
        ++i;
      }
    }
  }

  for (auto& w : open_) add_member(w);

  const bool opens =
      e.etype == rules_.open_type &&
      (rules_.policy == WindowPolicy::time_based || (e.key && !by_key_.contains(*e.key)));
  if (opens) {
    WindowDescriptor w;
    w.wid = next_wid_++;
    w.start_seq = e.seq;
    w.open_ts = e.ts;
    w.member_count_per_type.assign(n_types_, 0);
    if (rules_.policy == WindowPolicy::keyed_aperiodic) {
      w.key = e.key;
      by_key_.emplace(*e.key, w.wid);
    }
    add_member(w);
    out.opened.push_back(w.wid);
    open_.push_back(std::move(w));
    deadlines_.push_back(rules_.policy == WindowPolicy::time_based
                             ? e.ts + static_cast<Timestamp>(std::llround(rules_.scope))
                             : 0);
  }

  if (rules_.policy == WindowPolicy::keyed_aperiodic && e.etype == rules_.close_type && !opens) {
    auto it = e.key ? by_key_.find(*e.key) : by_key_.end();
    if (it == by_key_.end()) {
      out.dropped_close = true;
      ++dropped_closes_;
    } else {
      auto* w = find_open(it->second);
      close_at(static_cast<std::size_t>(w - open_.data()), e.ts, out);
    }
  }
  return out;
}

std::vector<InstanceIndex> route_event(std::span<const InstanceIndex> member_instances) {
  std::vector<InstanceIndex> out(member_instances.begin(), member_instances.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace cepsched
