#include "cepsched/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace cepsched {

void RuntimeParams::validate() const {
  if (!(mtime > 0.0)) throw ConfigError("mtime_ms", "must be > 0");
  if (feedback_interval && !(*feedback_interval > 0.0))
    throw ConfigError("feedback_interval_ms", "must be > 0");
  if (!(feedback_delay >= 0.0)) throw ConfigError("feedback_delay_ms", "must be >= 0");
  if (!(transfer_delay >= 0.0)) throw ConfigError("transfer_delay_ms", "must be >= 0");
  if (latency_bound && !(*latency_bound > 0.0))
    throw ConfigError("latency_bound_ms", "must be > 0");
}

void SimulationConfig::validate() const {
  workload.validate();
  scheduler.validate();
  model.validate();
  runtime.validate();
}

FeedbackReport emit_feedback(const InstanceState& instance, Millis now, std::size_t n_types) {
  FeedbackReport r;
  r.instance = instance.idx;
  r.queued_counts.assign(n_types, 0);
  r.emitted_at = now;
  r.last_lambda_o = instance.last_lambda_o;
  std::size_t memberships = 0;
  for (const auto& item : instance.queue) {
    if (item.event.etype.value < n_types) ++r.queued_counts[item.event.etype.value];
    memberships += item.windows.size();
  }
  r.theta_bar_rep = instance.queue.empty()
                        ? 1.0
                        : static_cast<double>(memberships) / static_cast<double>(instance.queue.size());
  return r;
}

std::vector<OutputRecord> merge(std::span<const std::vector<OutputRecord>> outputs) {
  using Cursor = std::pair<std::size_t, std::size_t>;  // (instance, position)
  auto later = [&](const Cursor& a, const Cursor& b) {
    const auto sa = outputs[a.first][a.second].seq;
    const auto sb = outputs[b.first][b.second].seq;
    return sa != sb ? sa > sb : a.first > b.first;
  };
  std::priority_queue<Cursor, std::vector<Cursor>, decltype(later)> heap(later);
  std::size_t total = 0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    total += outputs[i].size();
    if (!outputs[i].empty()) heap.emplace(i, 0);
  }
  std::vector<OutputRecord> merged;
  merged.reserve(total);
  while (!heap.empty()) {
    auto [inst, pos] = heap.top();
    heap.pop();
    merged.push_back(outputs[inst][pos]);
    if (pos + 1 < outputs[inst].size()) heap.emplace(inst, pos + 1);
  }
  return merged;
}

Millis RunMetrics::max_lambda_o() const {
  Millis m = 0.0;
  for (const auto& s : latency_samples) m = std::max(m, s.lambda_o());
  return m;
}

Millis RunMetrics::lambda_o_quantile(double q) const {
  if (latency_samples.empty()) return 0.0;
  std::vector<Millis> v;
  v.reserve(latency_samples.size());
  for (const auto& s : latency_samples) v.push_back(s.lambda_o());
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
  rank = std::clamp<std::size_t>(rank, 1, v.size());
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(rank - 1), v.end());
  return v[rank - 1];
}

namespace {

std::optional<FeedbackDelay> batch_feedback_delay(const BatchRecord& b,
                                                  const std::vector<TraceRecord>& trace) {
  auto first = std::lower_bound(trace.begin(), trace.end(), static_cast<Millis>(b.start),
                                [](const TraceRecord& r, Millis t) { return r.arrival < t; });
  auto last = std::upper_bound(first, trace.end(), static_cast<Millis>(b.end),
                               [](Millis t, const TraceRecord& r) { return t < r.arrival; });
  if (first == last) return std::nullopt;
  FeedbackDelay d;
  d.first_wid = b.first_wid;
  d.instance = b.instance;
  auto peak_lo = first;
  auto peak_q = first;
  for (auto it = first; it != last; ++it) {
    if (it->lambda_q + it->lambda_p > peak_lo->lambda_q + peak_lo->lambda_p) peak_lo = it;
    if (it->queue_length > peak_q->queue_length) peak_q = it;
  }
  d.peak_lambda_o = peak_lo->lambda_q + peak_lo->lambda_p;
  d.lambda_o_delay = peak_lo->arrival + d.peak_lambda_o - static_cast<Millis>(b.start);
  d.peak_queue = peak_q->queue_length;
  d.queue_delay = peak_q->arrival - static_cast<Millis>(b.start);
  return d;
}

}  // namespace

std::optional<FeedbackDelay> measure_feedback_delay(const RunMetrics& metrics, WindowId wid) {
  // Batches are ordered by first window id.
  auto it = std::upper_bound(metrics.batches.begin(), metrics.batches.end(), wid,
                             [](WindowId w, const BatchRecord& b) { return w < b.first_wid; });
  if (it == metrics.batches.begin()) return std::nullopt;
  const auto& batch = *std::prev(it);
  if (wid >= batch.first_wid + batch.windows) return std::nullopt;
  if (batch.instance >= metrics.traces.size()) return std::nullopt;
  return batch_feedback_delay(batch, metrics.traces[batch.instance]);
}

namespace {

enum class Kind : std::uint8_t {
  completion = 0,
  feedback_delivered = 1,
  monitor = 2,
  feedback_tick = 3,
  arrival = 4,
  delivery = 5,
};

struct Entry {
  Millis time;
  Kind kind;
  std::uint64_t order;
  std::size_t payload;
};

struct EntryLater {
  bool operator()(const Entry& a, const Entry& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return a.kind > b.kind;
    return a.order > b.order;
  }
};

struct WindowSpan {
  InstanceIndex instance{};
  std::size_t first{};
  std::size_t last{};
  bool seen{false};
};

struct ReportInFlight {
  FeedbackReport report;
  std::vector<std::pair<TypeId, Millis>> samples;
};

class Engine {
public:
  Engine(std::vector<Event>& events, const TypeTable& types, const WindowRules& rules,
         const CostModel& cost, const SchedulerConfig& sched, const ModelParams& model,
         const RuntimeParams& rt)
      : events_(events),
        n_types_(types.size()),
        n_(sched.n_instances),
        cost_(cost),
        rt_(rt),
        scheduler_(sched),
        stats_(types.size(), model.n_iat_bins, model.n_lat_bins),
        detector_(rules, types.size()),
        instances_(n_),
        latest_report_(n_),
        inbound_(n_),
        pending_samples_(n_),
        outputs_(n_),
        open_count_(n_, 0) {
    for (std::size_t i = 0; i < n_; ++i) instances_[i].idx = i;
    m_.types = types;
    m_.transmissions_per_instance.assign(n_, 0);
    m_.processed_per_instance.assign(n_, 0);
    m_.traces.resize(n_);
    m_.latency_bound = rt.latency_bound;
    if (!m_.latency_bound) {
      if (const auto* mb = std::get_if<ModelBasedPolicy>(&sched.policy))
        if (std::isfinite(mb->latency_bound)) m_.latency_bound = mb->latency_bound;
    }
  }

  RunMetrics run() {
    if (!events_.empty()) push(static_cast<Millis>(events_.front().ts), Kind::arrival, 0);
    push(rt_.mtime, Kind::monitor, 0);
    push(rt_.effective_feedback_interval(), Kind::feedback_tick, 0);

    while (!calendar_.empty()) {
      const Entry e = calendar_.top();
      calendar_.pop();
      if (is_work(e.kind)) --pending_work_;
      clock_ = e.time;
      switch (e.kind) {
        case Kind::arrival: on_arrival(e.payload); break;
        case Kind::delivery: on_delivery(e.payload); break;
        case Kind::completion: on_completion(e.payload); break;
        case Kind::feedback_delivered: on_feedback_delivered(); break;
        case Kind::monitor:
          stats_.end_monitoring_window(static_cast<Timestamp>(std::llround(clock_)));
          if (active()) push(clock_ + rt_.mtime, Kind::monitor, 0);
          break;
        case Kind::feedback_tick:
          on_feedback_tick();
          if (active()) push(clock_ + rt_.effective_feedback_interval(), Kind::feedback_tick, 0);
          break;
      }
    }
    finish();
    return std::move(m_);
  }

private:
  void push(Millis t, Kind k, std::size_t payload) {
    if (is_work(k)) ++pending_work_;
    calendar_.push({t, k, order_++, payload});
  }

  static bool is_work(Kind k) {
    return k == Kind::arrival || k == Kind::delivery || k == Kind::completion;
  }

  /// Periodic ticks keep running while events are still moving.
  bool active() const { return pending_work_ > 0; }

  void on_arrival(std::size_t idx) {
    Event& e = events_[idx];
    e.seq = next_seq_++;
    ++m_.events;
    stats_.observe_event(e);
    auto det = detector_.detect(e);

    for (WindowId wid : det.opened) {
      stats_.observe_window_open(e.ts);
      auto* w = detector_.find_open(wid);
      std::vector<InstanceView> views(n_);
      for (std::size_t i = 0; i < n_; ++i)
        views[i] = {open_count_[i], latest_report_[i] ? &*latest_report_[i] : nullptr};
      SchedulingContext ctx{&stats_.snapshot(), views};
      auto d = scheduler_.schedule(*w, ctx);
      w->assigned_instance = d.instance;
      if (assignment_.size() <= wid) assignment_.resize(wid + 1);
      assignment_[wid] = d.instance;
      ++open_count_[d.instance];
      track_batch(wid, e.ts, d.instance);
      m_.decisions.push_back({wid, e.ts, d.instance, d.advanced, std::move(d.prediction),
                              d.observed_lambda_o});
    }
    for (const auto& w : det.closed) {
      if (auto scope = w.scope()) stats_.observe_window_close(*scope);
      --open_count_[w.assigned_instance];
      auto& b = m_.batches[window_batch_[w.wid]];
      b.end = std::max(b.end, *w.close_ts);
      window_close_[w.wid] = *w.close_ts;
    }

    if (!det.memberships.empty()) {
      ++m_.events_in_windows;
      std::vector<InstanceIndex> member_instances;
      member_instances.reserve(det.memberships.size());
      for (WindowId wid : det.memberships) member_instances.push_back(assignment_[wid]);
      for (InstanceIndex inst : route_event(member_instances)) {
        QueuedItem item;
        item.event = e;
        for (WindowId wid : det.memberships) {
          if (assignment_[wid] != inst) continue;
          item.windows.push_back(wid);
          for (const auto& c : det.closed)
            if (c.wid == wid) item.closing.push_back(wid);
        }
        item.arrival = static_cast<Millis>(e.ts) + rt_.transfer_delay;
        ++m_.transmissions;
        ++m_.transmissions_per_instance[inst];
        inbound_[inst].push_back(std::move(item));
        push(static_cast<Millis>(e.ts) + rt_.transfer_delay, Kind::delivery, inst);
      }
    }
    last_arrival_ts_ = e.ts;

    if (idx + 1 < events_.size())
      push(static_cast<Millis>(events_[idx + 1].ts), Kind::arrival, idx + 1);
  }

  void track_batch(WindowId wid, Timestamp ts, InstanceIndex inst) {
    if (m_.batches.empty() || m_.batches.back().instance != inst)
      m_.batches.push_back({wid, inst, ts, ts, 0});
    auto& b = m_.batches.back();
    ++b.windows;
    if (window_batch_.size() <= wid) {
      window_batch_.resize(wid + 1);
      window_close_.resize(wid + 1);
      spans_.resize(wid + 1);
    }
    window_batch_[wid] = m_.batches.size() - 1;
    open_ts_.push_back(ts);
  }

  void on_delivery(std::size_t inst) {
    auto& in = inbound_[inst];
    QueuedItem item = std::move(in.front());
    in.pop_front();
    auto& st = instances_[inst];
    auto& trace = m_.traces[inst];
    item.record = trace.size();
    for (WindowId wid : item.windows) {
      auto& s = spans_[wid];
      if (!s.seen) {
        s = {inst, item.record, item.record, true};
      }
      s.last = item.record;
    }
    st.queue.push_back(std::move(item));
    trace.push_back({st.queue.back().event.seq, st.queue.back().event.etype, st.queue.back().arrival,
                     0.0, 0.0, st.queue.size()});
    if (!st.busy) start_service(inst);
  }

  void start_service(std::size_t inst) {
    auto& st = instances_[inst];
    auto& item = st.queue.front();
    Millis lambda_p = 0.0;
    auto& samples = pending_samples_[inst];
    for (WindowId wid : item.windows) {
      auto [it, inserted] = st.per_window_state.try_emplace(wid);
      if (inserted) it->second.assign(n_types_, 0);
      const Millis c = in_window_cost(cost_, item.event, it->second);
      if (item.event.etype.value < n_types_) ++it->second[item.event.etype.value];
      lambda_p += c;
      samples.emplace_back(item.event.etype, c);
    }
    for (WindowId wid : item.closing) st.per_window_state.erase(wid);

    auto& rec = m_.traces[inst][item.record];
    rec.lambda_q = std::max(0.0, clock_ - item.arrival);
    rec.lambda_p = lambda_p;
    st.busy = true;
    st.busy_until = clock_ + lambda_p;
    push(st.busy_until, Kind::completion, inst);
  }

  void on_completion(std::size_t inst) {
    auto& st = instances_[inst];
    const auto item = std::move(st.queue.front());
    st.queue.pop_front();
    st.busy = false;
    const auto& rec = m_.traces[inst][item.record];
    m_.latency_samples.emplace_back(item.event.seq, inst, rec.lambda_q, rec.lambda_p, item.event.ts);
    const Millis lo = m_.latency_samples.back().lambda_o();
    st.last_lambda_o = lo;
    if (m_.latency_bound && lo > *m_.latency_bound) {
      ++m_.lb_violations;
      m_.max_violation = std::max(m_.max_violation, lo - *m_.latency_bound);
    }
    ++m_.processed_per_instance[inst];
    outputs_[inst].push_back({item.event.seq, inst, clock_});
    if (!st.queue.empty()) start_service(inst);
  }

  void on_feedback_tick() {
    for (std::size_t i = 0; i < n_; ++i) {
      ReportInFlight r{emit_feedback(instances_[i], clock_, n_types_), std::move(pending_samples_[i])};
      pending_samples_[i].clear();
      instances_[i].feedback = r.report;
      in_flight_.push_back(std::move(r));
      push(clock_ + rt_.feedback_delay, Kind::feedback_delivered, i);
    }
  }

  void on_feedback_delivered() {
    auto r = std::move(in_flight_.front());
    in_flight_.pop_front();
    for (const auto& [type, lpw] : r.samples) stats_.observe_latency(type, lpw);
    latest_report_[r.report.instance] = std::move(r.report);
  }

  void finish() {
    m_.windows_opened = detector_.windows_opened();
    m_.dropped_closes = detector_.dropped_closes();
    for (auto& b : m_.batches) {
      // Batches with windows still open at the end span to the last arrival.
      for (WindowId w = b.first_wid; w < b.first_wid + b.windows; ++w)
        if (!window_close_[w]) b.end = std::max(b.end, last_arrival_ts_);
    }
    for (const auto& b : m_.batches)
      if (auto d = batch_feedback_delay(b, m_.traces[b.instance])) m_.feedback_delays.push_back(*d);

    m_.windows.reserve(spans_.size());
    for (WindowId wid = 0; wid < spans_.size(); ++wid) {
      WindowActual a;
      a.wid = wid;
      a.open_ts = open_ts_[wid];
      a.close_ts = window_close_[wid];
      a.instance = assignment_[wid];
      const auto& s = spans_[wid];
      if (s.seen) {
        const auto& trace = m_.traces[s.instance];
        a.events = s.last - s.first + 1;
        a.lambda_q_init = trace[s.first].lambda_q;
        for (std::size_t k = s.first; k <= s.last; ++k) {
          a.lambda_q_peak = std::max(a.lambda_q_peak, trace[k].lambda_q);
          a.lambda_o_peak = std::max(a.lambda_o_peak, trace[k].lambda_q + trace[k].lambda_p);
          if (k + 1 < trace.size()) {
            const Millis gain = trace[k].lambda_p - (trace[k + 1].arrival - trace[k].arrival);
            if (gain > 0.0)
              a.gamma_minus += gain;
            else
              a.gamma_plus += gain;
          }
        }
      }
      m_.windows.push_back(a);
    }
    m_.merged_output = merge(outputs_);
  }

  std::vector<Event>& events_;
  std::size_t n_types_;
  std::size_t n_;
  const CostModel& cost_;
  const RuntimeParams& rt_;
  Scheduler scheduler_;
  StreamStats stats_;
  WindowDetector detector_;
  std::vector<InstanceState> instances_;
  std::vector<std::optional<FeedbackReport>> latest_report_;
  std::vector<std::deque<QueuedItem>> inbound_;
  std::vector<std::vector<std::pair<TypeId, Millis>>> pending_samples_;
  std::deque<ReportInFlight> in_flight_;
  std::vector<std::vector<OutputRecord>> outputs_;
  std::vector<std::size_t> open_count_;
  std::vector<InstanceIndex> assignment_;
  std::vector<std::size_t> window_batch_;
  std::vector<std::optional<Timestamp>> window_close_;
  std::vector<Timestamp> open_ts_;
  std::vector<WindowSpan> spans_;
  std::priority_queue<Entry, std::vector<Entry>, EntryLater> calendar_;
  std::uint64_t order_{0};
  std::uint64_t pending_work_{0};
  std::uint64_t next_seq_{0};
  Timestamp last_arrival_ts_{0};
  Millis clock_{0.0};
  RunMetrics m_;
};

}  // namespace

Simulation::Simulation(std::vector<Event> events, TypeTable types, WindowRules rules, CostModel cost,
                       SchedulerConfig scheduler, ModelParams model, RuntimeParams runtime)
    : events_(std::move(events)),
      types_(std::move(types)),
      rules_(rules),
      cost_(std::move(cost)),
      scheduler_(std::move(scheduler)),
      model_(std::move(model)),
      runtime_(std::move(runtime)) {
  scheduler_.validate();
  model_.validate();
  runtime_.validate();
  cost_.validate();
  for (std::size_t i = 1; i < events_.size(); ++i)
    if (events_[i].ts < events_[i - 1].ts)
      throw std::invalid_argument("Simulation: events must be in timestamp order");
}

RunMetrics Simulation::run() {
  auto events = events_;
  Engine engine(events, types_, rules_, cost_, scheduler_, model_, runtime_);
  return engine.run();
}

RunMetrics run(const SimulationConfig& cfg) {
  cfg.validate();
  const auto types = cfg.workload.types();
  Simulation sim(generate_stream(cfg.workload), types, cfg.workload.window_rules(types),
                 cfg.workload.cost_model(types), cfg.scheduler, cfg.model, cfg.runtime);
  return sim.run();
}

}  // namespace cepsched
