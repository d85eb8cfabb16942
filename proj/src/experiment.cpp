#include "cepsched/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <fmt/os.h>

namespace cepsched {
namespace {

using nlohmann::json;

class Reader {
public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) const {
    used_.insert(key);
    return obj_.contains(key) && !obj_.at(key).is_null();
  }

  const json& raw(const std::string& key) const {
    used_.insert(key);
    if (!obj_.contains(key)) throw ConfigError(field(key), "missing");
    return obj_.at(key);
  }

  double number(const std::string& key) const {
    const auto& v = raw(key);
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    }
    if (!v.is_number()) throw ConfigError(field(key), "expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  std::optional<double> opt_number(const std::string& key) const {
    return has(key) ? std::optional(number(key)) : std::nullopt;
  }

  std::uint64_t count(const std::string& key) const {
    const auto& v = raw(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
      throw ConfigError(field(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }
  std::uint64_t count(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? count(key) : fallback;
  }

  std::string text(const std::string& key) const {
    const auto& v = raw(key);
    if (!v.is_string()) throw ConfigError(field(key), "expected a string");
    return v.get<std::string>();
  }
  std::string text(const std::string& key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
  }

  Reader child(const std::string& key) const { return Reader(raw(key), field(key)); }

  /// Rejects keys that were never read.
  void finish() const {
    for (const auto& [key, value] : obj_.items())
      if (!used_.contains(key)) throw ConfigError(field(key), "unknown field");
  }

private:
  const json& obj_;
  std::string path_;
  mutable std::set<std::string> used_;
};

IatProfile parse_iat(const Reader& r) {
  const auto kind = r.text("kind");
  IatProfile p;
  if (kind == "constant") {
    p = ConstantIat{r.number("mean_ms")};
  } else if (kind == "exponential") {
    p = ExponentialIat{r.number("mean_ms")};
  } else if (kind == "sinusoidal_exponential") {
    p = SinusoidalExponentialIat{r.number("min_mean_ms"), r.number("max_mean_ms"), r.number("period_ms")};
  } else if (kind == "burst") {
    p = BurstIat{static_cast<std::uint32_t>(r.count("burst_size")), r.number("intra_gap_ms"),
                 r.number("inter_gap_ms")};
  } else {
    throw ConfigError(r.field("kind"), "unknown iat profile '" + kind + "'");
  }
  r.finish();
  return p;
}

WorkloadConfig parse_workload(const Reader& r) {
  WorkloadConfig w;
  const auto scenario = r.text("scenario");
  if (scenario == "traffic")
    w.scenario = Scenario::traffic;
  else if (scenario == "face")
    w.scenario = Scenario::face;
  else if (scenario == "custom")
    w.scenario = Scenario::custom;
  else
    throw ConfigError(r.field("scenario"), "expected traffic, face or custom");

  w.seed = r.count("seed", 1);
  w.duration = r.number("duration_ms");
  if (r.has("max_events")) w.max_events = r.count("max_events");
  w.iat = parse_iat(r.child("iat"));
  if (r.has("query_iat")) w.query_iat = parse_iat(r.child("query_iat"));
  if (r.has("type_mix")) {
    const auto& mix = r.raw("type_mix");
    if (!mix.is_object()) throw ConfigError(r.field("type_mix"), "expected an object");
    for (const auto& [name, p] : mix.items()) {
      if (!p.is_number()) throw ConfigError(r.field("type_mix." + name), "expected a number");
      w.type_mix[name] = p.get<double>();
    }
  }
  if (r.has("scope")) {
    const auto s = r.child("scope");
    w.scope.ws_min = s.number("ws_min_ms", 0.0);
    w.scope.ws_max = s.number("ws_max_ms", w.scope.ws_min);
    w.scope.ws = s.number("ws_ms", 0.0);
    s.finish();
  }
  if (r.has("windows")) {
    const auto s = r.child("windows");
    const auto policy = s.text("policy");
    if (policy == "none")
      w.window_policy = WindowPolicy::none;
    else if (policy == "time_based")
      w.window_policy = WindowPolicy::time_based;
    else if (policy == "keyed_aperiodic")
      w.window_policy = WindowPolicy::keyed_aperiodic;
    else
      throw ConfigError(s.field("policy"), "expected none, time_based or keyed_aperiodic");
    w.window_open_type = s.text("open_type", "");
    s.finish();
  }
  if (r.has("cost")) {
    const auto c = r.child("cost");
    const auto kind = c.text("kind");
    if (kind == "equi_join")
      w.cost_kind = CostKind::equi_join;
    else if (kind == "flat_per_type")
      w.cost_kind = CostKind::flat_per_type;
    else if (kind == "custom_table")
      w.cost_kind = CostKind::custom_table;
    else
      throw ConfigError(c.field("kind"), "expected equi_join, flat_per_type or custom_table");
    const auto& base = c.raw("base");
    if (!base.is_object()) throw ConfigError(c.field("base"), "expected an object");
    for (const auto& [name, v] : base.items()) {
      if (!v.is_number()) throw ConfigError(c.field("base." + name), "expected a number");
      w.cost_base[name] = v.get<double>();
    }
    w.cost_incr = c.number("incr", 0.0);
    w.cost_jitter_sigma = c.number("jitter_sigma", 0.0);
    c.finish();
  }
  r.finish();
  return w;
}

ModelParams parse_model(const Reader& r) {
  ModelParams m;
  m.n_iat_bins = r.count("n_iat_bins", m.n_iat_bins);
  m.n_lat_bins = r.count("n_lat_bins", m.n_lat_bins);
  m.delta_iat = r.number("delta_iat", m.delta_iat);
  m.delta_lp = r.number("delta_lp", m.delta_lp);
  m.iat_floor = r.number("iat_floor_ms", m.iat_floor);
  if (r.has("alpha")) {
    const auto& a = r.raw("alpha");
    if (a.is_string() && a.get<std::string>() == "tcount")
      m.alpha = TCountAlpha{};
    else if (a.is_number())
      m.alpha = FixedAlpha{a.get<double>()};
    else
      throw ConfigError(r.field("alpha"), "expected \"tcount\" or a number in [0, 1]");
  }
  r.finish();
  return m;
}

std::string pointer_from(const std::string& field) {
  if (!field.empty() && field.front() == '/') return field;
  std::string p = "/";
  for (char c : field) p += (c == '.') ? '/' : c;
  return p;
}

std::string fmt_num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{}", v);
}
std::string fmt_opt(const std::optional<double>& v) { return v ? fmt_num(*v) : std::string(); }

}  // namespace

ExperimentConfig parse_experiment(const json& doc) {
  Reader root(doc, "");
  ExperimentConfig cfg;
  cfg.source = doc;
  cfg.sim.workload = parse_workload(root.child("workload"));
  cfg.sim.model = root.has("model") ? parse_model(root.child("model")) : ModelParams{};

  cfg.sim.scheduler.n_instances = root.count("n_instances", 8);
  {
    const auto s = root.child("scheduler");
    const auto kind = s.text("kind");
    if (kind == "round_robin") {
      cfg.sim.scheduler.policy = RoundRobinPolicy{};
    } else if (kind == "reactive") {
      cfg.sim.scheduler.policy = ReactivePolicy{s.number("threshold_ms")};
    } else if (kind == "model_based") {
      cfg.lb_rr_multiple = s.opt_number("lb_rr_multiple");
      const auto lb = s.opt_number("latency_bound_ms");
      if (!lb && !cfg.lb_rr_multiple)
        throw ConfigError("scheduler.latency_bound_ms", "model_based needs latency_bound_ms or lb_rr_multiple");
      if (cfg.lb_rr_multiple && !(*cfg.lb_rr_multiple > 0.0))
        throw ConfigError("scheduler.lb_rr_multiple", "must be > 0");
      // Placeholder bound until the Round-Robin baseline resolves it.
      cfg.sim.scheduler.policy = ModelBasedPolicy{lb.value_or(1.0), cfg.sim.model};
    } else {
      throw ConfigError("scheduler.kind", "expected round_robin, reactive or model_based");
    }
    s.finish();
  }

  cfg.sim.runtime.mtime = root.number("mtime_ms", cfg.sim.runtime.mtime);
  cfg.sim.runtime.feedback_interval = root.opt_number("feedback_interval_ms");
  cfg.sim.runtime.feedback_delay = root.number("feedback_delay_ms", 0.0);
  cfg.sim.runtime.transfer_delay = root.number("transfer_delay_ms", 0.0);
  cfg.sim.runtime.latency_bound = root.opt_number("latency_bound_ms");
  cfg.output_dir = root.text("output_dir", "out");

  if (root.has("sweep")) {
    const auto& sweep = root.raw("sweep");
    if (!sweep.is_array()) throw ConfigError("sweep", "expected a list of {field, values}");
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      Reader axis(sweep[i], fmt::format("sweep[{}]", i));
      SweepAxis a;
      a.field = pointer_from(axis.text("field"));
      const auto& values = axis.raw("values");
      if (!values.is_array() || values.empty())
        throw ConfigError(axis.field("values"), "expected a non-empty list");
      a.values.assign(values.begin(), values.end());
      axis.finish();
      if (!doc.contains(json::json_pointer(a.field)))
        throw ConfigError(axis.field("field"), "'" + a.field + "' does not exist in the config");
      cfg.sweep.push_back(std::move(a));
    }
  }
  root.finish();
  cfg.sim.validate();
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", e.what());
  }
  return parse_experiment(doc);
}

std::vector<RunPoint> expand_sweep(const ExperimentConfig& base) {
  std::vector<json> docs{base.source};
  for (const auto& axis : base.sweep) {
    std::vector<json> next;
    for (const auto& d : docs) {
      for (const auto& v : axis.values) {
        auto copy = d;
        copy[json::json_pointer(axis.field)] = v;
        next.push_back(std::move(copy));
      }
    }
    docs = std::move(next);
  }
  std::vector<RunPoint> points;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    auto doc = docs[i];
    doc.erase("sweep");
    auto cfg = parse_experiment(doc);
    cfg.output_dir = base.output_dir;
    points.push_back({fmt::format("run_{:03}", i), std::move(cfg)});
  }
  return points;
}

RunMetrics run_point(const ExperimentConfig& cfg, std::optional<Millis>* resolved_lb) {
  SimulationConfig sim = cfg.sim;
  if (auto* mb = std::get_if<ModelBasedPolicy>(&sim.scheduler.policy)) {
    mb->model = sim.model;
    if (cfg.lb_rr_multiple) {
      SimulationConfig rr = sim;
      rr.scheduler.policy = RoundRobinPolicy{};
      const auto baseline = run(rr);
      mb->latency_bound = *cfg.lb_rr_multiple * baseline.max_lambda_o();
      if (!(mb->latency_bound > 0.0))
        throw ConfigError("scheduler.lb_rr_multiple", "Round-Robin baseline has zero latency");
    }
    if (resolved_lb) *resolved_lb = mb->latency_bound;
  }
  return run(sim);
}

SummaryRow summarize(const std::string& run_id, const SimulationConfig& cfg, const RunMetrics& m) {
  SummaryRow row;
  row.run_id = run_id;
  row.scheduler = std::string(cfg.scheduler.kind_name());
  if (const auto* r = std::get_if<ReactivePolicy>(&cfg.scheduler.policy)) row.param = r->threshold;
  if (const auto* mb = std::get_if<ModelBasedPolicy>(&cfg.scheduler.policy))
    row.param = mb->latency_bound;
  row.max_lo = m.max_lambda_o();
  row.p99_lo = m.lambda_o_quantile(0.99);
  row.transmissions = m.transmissions;
  row.violations = m.lb_violations;
  return row;
}

void write_run_csvs(const std::filesystem::path& dir, const RunMetrics& m, const SimulationConfig& cfg) {
  std::filesystem::create_directories(dir);
  const auto kind = cfg.scheduler.kind_name();
  {
    auto f = fmt::output_file((dir / "latency.csv").string());
    f.print("seq,instance,lambda_q,lambda_p,lambda_o,ts\n");
    for (const auto& s : m.latency_samples)
      f.print("{},{},{},{},{},{}\n", s.event_seq(), s.instance(), fmt_num(s.lambda_q()),
              fmt_num(s.lambda_p()), fmt_num(s.lambda_o()), s.ts());
  }
  {
    auto f = fmt::output_file((dir / "decisions.csv").string());
    f.print("wid,instance,predicted_lambda_o_max,kind,observed_lambda_o\n");
    for (const auto& d : m.decisions)
      f.print("{},{},{},{},{}\n", d.wid, d.instance,
              d.prediction ? fmt_num(d.prediction->lambda_o_max) : std::string(), kind,
              fmt_opt(d.observed_lambda_o));
  }
  {
    auto f = fmt::output_file((dir / "predictions.csv").string());
    f.print("decision_id,theta_hat,theta_bar,n,gamma_minus,gamma_plus,alpha,lambda_q_init,lambda_o_max,instance,flags\n");
    for (const auto& d : m.decisions) {
      if (!d.prediction) continue;
      const auto& p = *d.prediction;
      f.print("{},{},{},{},{},{},{},{},{},{},{}\n", d.wid, fmt_num(p.theta_hat), fmt_num(p.theta_bar),
              fmt_num(p.n), fmt_num(p.gamma_minus), fmt_num(p.gamma_plus), fmt_num(p.alpha),
              fmt_num(p.lambda_q_init), fmt_num(p.lambda_o_max), d.instance, p.flags);
    }
  }
  {
    auto f = fmt::output_file((dir / "transmissions.csv").string());
    f.print("instance,transmissions,processed\n");
    for (std::size_t i = 0; i < m.transmissions_per_instance.size(); ++i)
      f.print("{},{},{}\n", i, m.transmissions_per_instance[i], m.processed_per_instance[i]);
  }
  {
    auto f = fmt::output_file((dir / "windows.csv").string());
    f.print("wid,instance,open_ts,close_ts,events,gamma_minus,gamma_plus,lambda_q_init,lambda_q_peak,lambda_o_peak\n");
    for (const auto& w : m.windows)
      f.print("{},{},{},{},{},{},{},{},{},{}\n", w.wid, w.instance, w.open_ts,
              w.close_ts ? std::to_string(*w.close_ts) : std::string(), w.events,
              fmt_num(w.gamma_minus), fmt_num(w.gamma_plus), fmt_num(w.lambda_q_init),
              fmt_num(w.lambda_q_peak), fmt_num(w.lambda_o_peak));
  }
  {
    auto f = fmt::output_file((dir / "feedback_delay.csv").string());
    f.print("first_wid,instance,lambda_o_delay,peak_lambda_o,queue_delay,peak_queue\n");
    for (const auto& d : m.feedback_delays)
      f.print("{},{},{},{},{},{}\n", d.first_wid, d.instance, fmt_num(d.lambda_o_delay),
              fmt_num(d.peak_lambda_o), fmt_num(d.queue_delay), d.peak_queue);
  }
}

void write_summary(const std::filesystem::path& file, const std::vector<SummaryRow>& rows) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  const auto tmp = std::filesystem::path(file.string() + ".tmp");
  {
    auto f = fmt::output_file(tmp.string());
    f.print("run_id,scheduler,param,max_lo,p99_lo,transmissions,violations\n");
    for (const auto& r : rows)
      f.print("{},{},{},{},{},{},{}\n", r.run_id, r.scheduler, fmt_opt(r.param), fmt_num(r.max_lo),
              fmt_num(r.p99_lo), r.transmissions, r.violations);
  }
  std::filesystem::rename(tmp, file);
}

int run_experiment(const std::filesystem::path& config_path, const ExperimentOptions& opts,
                   std::ostream& out, std::ostream& err) {
  std::vector<RunPoint> points;
  std::filesystem::path out_dir;
  try {
    auto base = load_experiment(config_path);
    if (opts.seed) {
      base.source["workload"]["seed"] = *opts.seed;
      base = parse_experiment(base.source);
    }
    out_dir = opts.output_dir.value_or(base.output_dir);
    if (!opts.sweep) base.sweep.clear();
    points = expand_sweep(base);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  }

  std::vector<SummaryRow> rows(points.size());
  std::vector<std::string> failures(points.size());
  auto work = [&](std::size_t i) {
    try {
      auto& p = points[i];
      std::optional<Millis> lb;
      const auto metrics = run_point(p.config, &lb);
      auto sim = p.config.sim;
      if (auto* mb = std::get_if<ModelBasedPolicy>(&sim.scheduler.policy); mb && lb)
        mb->latency_bound = *lb;
      const auto dir = points.size() == 1 && !opts.sweep ? out_dir : out_dir / p.run_id;
      write_run_csvs(dir, metrics, sim);
      rows[i] = summarize(p.run_id, sim, metrics);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  };

  const unsigned jobs = std::max(1u, std::min<unsigned>(opts.jobs, static_cast<unsigned>(points.size())));
  if (jobs == 1) {
    for (std::size_t i = 0; i < points.size(); ++i) work(i);
  } else {
    std::mutex mu;
    std::size_t next = 0;
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < jobs; ++t) {
      pool.emplace_back([&] {
        while (true) {
          std::size_t i;
          {
            std::lock_guard lock(mu);
            if (next == points.size()) return;
            i = next++;
          }
          work(i);
        }
      });
    }
  }

  bool failed = false;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!failures[i].empty()) {
      err << points[i].run_id << ": " << failures[i] << '\n';
      failed = true;
    }
  }
  if (failed) return 1;

  write_summary(out_dir / "summary.csv", rows);
  for (const auto& r : rows)
    out << fmt::format("{} {} param={} max_lo={} p99_lo={} transmissions={} violations={}\n", r.run_id,
                       r.scheduler, fmt_opt(r.param), fmt_num(r.max_lo), fmt_num(r.p99_lo),
                       r.transmissions, r.violations);
  return 0;
}

WorkedExampleResult selftest_worked_example() {
  WorkedExampleResult r;
  // Types A..D with latencies 8, 7, 4, 2; counts 2, 2, 2, 1; one iat bin at 5.
  const std::vector<LatencyBinCount> lat{{8, 2}, {7, 2}, {4, 2}, {2, 1}};
  const std::vector<IatBinCount> iat{{5, 7}};
  const auto g = pair_gains(lat, iat, 1.0);
  r.gamma_minus = g.gamma_minus;
  r.gamma_plus = g.gamma_plus;
  r.lambda_q_max_alpha0 = queue_peak(0.0, g.gamma_minus, g.gamma_plus, 0.0);
  r.lambda_q_max_alpha08 = queue_peak(0.0, g.gamma_minus, g.gamma_plus, 0.8);
  r.lambda_q_max_alpha1 = queue_peak(0.0, g.gamma_minus, g.gamma_plus, 1.0);

  // Zero-cost markers "S" open the window at t = 0 and probe the backlog one
  // iat after the last event, so the peak includes the terminal queue.
  auto simulate = [](const std::vector<std::string>& order) {
    TypeTable types({"A", "B", "C", "D", "S"});
    CostModel cost;
    cost.kind = CostKind::flat_per_type;
    cost.base = {8.0, 7.0, 4.0, 2.0, 0.0};
    std::vector<Event> events{{0, 0, types.at("S"), std::nullopt, std::nullopt}};
    for (std::size_t i = 0; i < order.size(); ++i)
      events.push_back({i + 1, static_cast<Timestamp>(5 * i), types.at(order[i]), std::nullopt, std::nullopt});
    events.push_back({order.size() + 1, static_cast<Timestamp>(5 * order.size()), types.at("S"),
                      std::nullopt, std::nullopt});
    WindowRules rules{WindowPolicy::time_based, types.at("S"), types.at("S"), 1000.0};
    SchedulerConfig sched{RoundRobinPolicy{}, 1};
    Simulation sim(events, types, rules, cost, sched, ModelParams{}, RuntimeParams{});
    const auto m = sim.run();
    Millis peak = 0.0;
    for (const auto& s : m.latency_samples) peak = std::max(peak, s.lambda_q());
    return peak;
  };
  r.simulated_worst_peak = simulate({"A", "A", "B", "B", "C", "C", "D"});
  r.simulated_best_peak = simulate({"A", "D", "A", "C", "B", "C", "B"});

  r.ok = r.gamma_minus == 10.0 && r.gamma_plus == -5.0 && r.lambda_q_max_alpha0 == 10.0 &&
         r.lambda_q_max_alpha08 == 6.0 && r.lambda_q_max_alpha1 == 5.0 &&
         r.simulated_worst_peak == 10.0 && r.simulated_best_peak == 5.0;
  return r;
}

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  return v[mid];
}

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

}  // namespace

SchedulingBench bench_scheduling_latency(std::size_t n_iat_bins, std::size_t n_lat_bins_per_type,
                                         std::size_t n_types, std::size_t decisions) {
  // Synthetic statistics: two-mode iat, position-dependent latencies.
  ModelParams model;
  model.n_iat_bins = n_iat_bins;
  model.n_lat_bins = n_lat_bins_per_type;
  StreamStats stats(n_types, n_iat_bins, n_lat_bins_per_type);
  for (std::uint64_t i = 0; i < 20000; ++i) {
    const Timestamp ts = static_cast<Timestamp>(i * 100 + (i % 7) * 13);
    stats.observe_event({i, ts, TypeId{static_cast<std::uint16_t>(i % n_types)}, std::nullopt, std::nullopt});
    stats.observe_latency(TypeId{static_cast<std::uint16_t>(i % n_types)},
                          1.0 + static_cast<double>(i % 97) * 0.3 * static_cast<double>(1 + i % n_types));
    if (i % 10 == 0) stats.observe_window_open(ts);
    if (i % 10 == 5) stats.observe_window_close(30000.0 + static_cast<double>(i % 11) * 100.0);
  }
  const auto& snap = stats.end_monitoring_window(2000000);

  SchedulingBench b;
  b.decisions = decisions;
  for (const auto& l : snap.latency)
    if (l) b.total_bins += l->bins.size();
  if (snap.iat) b.total_bins += snap.iat->bins.size();

  FeedbackReport report;
  report.queued_counts.assign(n_types, 3);
  report.theta_bar_rep = 4.0;
  report.last_lambda_o = 50.0;
  std::vector<InstanceView> views(8, InstanceView{5, &report});
  SchedulingContext ctx{&snap, views};
  WindowDescriptor w;

  auto time_policy = [&](SchedulerPolicy policy, double* mean) {
    Scheduler s(SchedulerConfig{std::move(policy), 8});
    std::vector<double> samples;
    samples.reserve(decisions);
    volatile std::size_t sink = 0;
    for (std::size_t i = 0; i < decisions; ++i) {
      const auto t0 = Clock::now();
      sink = sink + s.schedule(w, ctx).instance;
      samples.push_back(elapsed_ms(t0));
    }
    if (mean) {
      double sum = 0.0;
      for (double v : samples) sum += v;
      *mean = sum / static_cast<double>(samples.size());
    }
    return median_of(std::move(samples));
  };

  b.model_based_median = time_policy(ModelBasedPolicy{1000.0, model}, &b.model_based_mean);
  b.round_robin_median = time_policy(RoundRobinPolicy{}, nullptr);
  b.reactive_median = time_policy(ReactivePolicy{100.0}, nullptr);
  return b;
}

Millis time_monitoring_update(std::size_t entries, std::size_t bins, int repetitions) {
  std::vector<double> samples;
  for (int rep = 0; rep < repetitions; ++rep) {
    StreamStats stats(1, bins, bins);
    std::uint64_t x = 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(rep);
    Timestamp ts = 0;
    for (std::size_t i = 0; i <= entries; ++i) {
      x ^= x << 13;
      x ^= x >> 7;
      x ^= x << 17;
      ts += static_cast<Timestamp>(x % 1000);
      stats.observe_event({i, ts, TypeId{0}, std::nullopt, std::nullopt});
    }
    const auto t0 = Clock::now();
    stats.end_monitoring_window(ts);
    samples.push_back(elapsed_ms(t0));
  }
  return median_of(std::move(samples));
}

}  // namespace cepsched
