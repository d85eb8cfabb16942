#include "cepsched/workload.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "rng.hpp"

namespace cepsched {
namespace {

void require_positive(double v, const std::string& field) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(field, "must be a finite value > 0");
}

void validate_profile(const IatProfile& p, const std::string& field) {
  std::visit(
      [&](const auto& prof) {
        using P = std::decay_t<decltype(prof)>;
        if constexpr (std::is_same_v<P, ConstantIat> || std::is_same_v<P, ExponentialIat>) {
          require_positive(prof.mean, field + ".mean_ms");
        } else if constexpr (std::is_same_v<P, SinusoidalExponentialIat>) {
          require_positive(prof.min_mean, field + ".min_mean_ms");
          require_positive(prof.max_mean, field + ".max_mean_ms");
          require_positive(prof.period, field + ".period_ms");
          if (prof.max_mean < prof.min_mean)
            throw ConfigError(field + ".max_mean_ms", "must be >= min_mean_ms");
        } else {
          if (prof.burst_size < 1) throw ConfigError(field + ".burst_size", "must be >= 1");
          require_positive(prof.intra_gap, field + ".intra_gap_ms");
          require_positive(prof.inter_gap, field + ".inter_gap_ms");
          if (prof.inter_gap < prof.intra_gap * (prof.burst_size - 1))
            throw ConfigError(field + ".inter_gap_ms", "shorter than one burst");
        }
      },
      p);
}

/// Continuous arrival times in [0, horizon) for one profile.
class ArrivalProcess {
public:
  ArrivalProcess(IatProfile profile, std::uint64_t seed) : profile_(std::move(profile)), rng_(seed) {}

  Millis next_gap(Millis now) {
    return std::visit(
        [&](const auto& prof) -> Millis {
          using P = std::decay_t<decltype(prof)>;
          if constexpr (std::is_same_v<P, ConstantIat>) {
            return prof.mean;
          } else if constexpr (std::is_same_v<P, ExponentialIat>) {
            return rng_.exponential(prof.mean);
          } else if constexpr (std::is_same_v<P, SinusoidalExponentialIat>) {
            const double phase = 2.0 * std::numbers::pi * now / prof.period;
            const double mean =
                prof.min_mean + (prof.max_mean - prof.min_mean) * 0.5 * (1.0 + std::cos(phase));
            return rng_.exponential(mean);
          } else {
            const auto pos = burst_pos_++ % prof.burst_size;
            if (pos + 1 < prof.burst_size) return prof.intra_gap;
            return prof.inter_gap - prof.intra_gap * (prof.burst_size - 1);
          }
        },
        profile_);
  }

  std::vector<Millis> arrivals(Millis horizon) {
    std::vector<Millis> out;
    for (Millis t = 0.0; t < horizon; t += next_gap(t)) out.push_back(t);
    return out;
  }

private:
  IatProfile profile_;
  detail::Rng rng_;
  std::uint32_t burst_pos_{0};
};

Timestamp to_ts(Millis t) { return static_cast<Timestamp>(std::llround(t)); }

struct Pending {
  Timestamp ts;
  TypeId etype;
  std::optional<std::uint64_t> key;
};

std::vector<Event> finish(std::vector<Pending> pending, const WorkloadConfig& cfg) {
  std::stable_sort(pending.begin(), pending.end(),
                   [](const Pending& a, const Pending& b) { return a.ts < b.ts; });
  if (cfg.max_events && pending.size() > *cfg.max_events) pending.resize(*cfg.max_events);
  detail::Rng jitter(detail::derive_seed(cfg.seed, 3));
  std::vector<Event> out;
  out.reserve(pending.size());
  for (std::size_t i = 0; i < pending.size(); ++i) {
    Event e{i, pending[i].ts, pending[i].etype, pending[i].key, std::nullopt};
    if (cfg.cost_jitter_sigma > 0.0) {
      const double s = cfg.cost_jitter_sigma;
      e.payload_cost_hint = std::exp(jitter.normal() * s - 0.5 * s * s);
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::traffic: return "traffic";
    case Scenario::face: return "face";
    case Scenario::custom: return "custom";
  }
  return "?";
}

std::string_view to_string(CostKind k) {
  switch (k) {
    case CostKind::equi_join: return "equi_join";
    case CostKind::flat_per_type: return "flat_per_type";
    case CostKind::custom_table: return "custom_table";
  }
  return "?";
}

void CostModel::validate() const {
  for (const auto& b : base)
    if (b && !(*b >= 0.0)) throw ConfigError("workload.cost.base", "costs must be >= 0");
  if (!(incr >= 0.0)) throw ConfigError("workload.cost.incr", "must be >= 0");
}

void WorkloadConfig::validate() const {
  require_positive(duration, "workload.duration_ms");
  validate_profile(iat, "workload.iat");
  if (max_events && *max_events == 0) throw ConfigError("workload.max_events", "must be >= 1");
  if (!(cost_jitter_sigma >= 0.0))
    throw ConfigError("workload.cost_jitter_sigma", "must be >= 0");
  switch (scenario) {
    case Scenario::traffic:
      require_positive(scope.ws_min, "workload.scope.ws_min_ms");
      if (scope.ws_max < scope.ws_min)
        throw ConfigError("workload.scope.ws_max_ms", "must be >= ws_min_ms");
      break;
    case Scenario::face:
      require_positive(scope.ws, "workload.scope.ws_ms");
      if (!query_iat) throw ConfigError("workload.query_iat", "required for the face scenario");
      validate_profile(*query_iat, "workload.query_iat");
      break;
    case Scenario::custom: {
      if (type_mix.empty()) throw ConfigError("workload.type_mix", "must not be empty");
      double sum = 0.0;
      for (const auto& [name, p] : type_mix) {
        if (!(p >= 0.0)) throw ConfigError("workload.type_mix." + name, "must be >= 0");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("workload.type_mix", "must sum to 1");
      if (window_policy == WindowPolicy::time_based) {
        require_positive(scope.ws, "workload.scope.ws_ms");
        if (!type_mix.contains(window_open_type))
          throw ConfigError("workload.windows.open_type", "not a type in type_mix");
      } else if (window_policy == WindowPolicy::keyed_aperiodic) {
        throw ConfigError("workload.windows.policy", "keyed windows need the traffic scenario");
      }
      break;
    }
  }
  const auto t = types();
  for (const auto& [name, cost] : cost_base) {
    if (!t.find(name)) throw ConfigError("workload.cost.base." + name, "unknown event type");
    if (!(cost >= 0.0)) throw ConfigError("workload.cost.base." + name, "must be >= 0");
  }
  if (!(cost_incr >= 0.0)) throw ConfigError("workload.cost.incr", "must be >= 0");
}

TypeTable WorkloadConfig::types() const {
  switch (scenario) {
    case Scenario::traffic: return TypeTable({"L1", "L2"});
    case Scenario::face: return TypeTable({"query", "face"});
    case Scenario::custom: {
      std::vector<std::string> names;
      for (const auto& [name, p] : type_mix) names.push_back(name);
      return TypeTable(std::move(names));
    }
  }
  return {};
}

WindowRules WorkloadConfig::window_rules(const TypeTable& t) const {
  switch (scenario) {
    case Scenario::traffic:
      return {WindowPolicy::keyed_aperiodic, t.at("L1"), t.at("L2"), 0.0};
    case Scenario::face:
      return {WindowPolicy::time_based, t.at("query"), t.at("query"), scope.ws};
    case Scenario::custom:
      if (window_policy == WindowPolicy::time_based)
        return {WindowPolicy::time_based, t.at(window_open_type), t.at(window_open_type),
                scope.ws};
      return {};
  }
  return {};
}

CostModel WorkloadConfig::cost_model(const TypeTable& t) const {
  CostModel m;
  m.kind = cost_kind;
  m.incr = cost_incr;
  m.base.assign(t.size(), std::nullopt);
  for (const auto& [name, cost] : cost_base) m.base[t.at(name).value] = cost;
  if (cost_kind == CostKind::equi_join) {
    m.build_type = t.find("L1").value_or(TypeId{0});
    m.probe_type = t.find("L2").value_or(TypeId{static_cast<std::uint16_t>(t.size() > 1 ? 1 : 0)});
  }
  m.validate();
  return m;
}

std::vector<Event> generate_stream(const WorkloadConfig& cfg) {
  cfg.validate();
  const auto types = cfg.types();
  std::vector<Pending> pending;

  switch (cfg.scenario) {
    case Scenario::traffic: {
      ArrivalProcess vehicles(cfg.iat, detail::derive_seed(cfg.seed, 0));
      detail::Rng travel(detail::derive_seed(cfg.seed, 1));
      const auto l1 = types.at("L1");
      const auto l2 = types.at("L2");
      std::uint64_t key = 0;
      for (Millis t : vehicles.arrivals(cfg.duration)) {
        const Millis ws = cfg.scope.ws_min + (cfg.scope.ws_max - cfg.scope.ws_min) * travel.uniform();
        pending.push_back({to_ts(t), l1, key});
        pending.push_back({to_ts(t + ws), l2, key});
        ++key;
      }
      break;
    }
    case Scenario::face: {
      ArrivalProcess queries(*cfg.query_iat, detail::derive_seed(cfg.seed, 0));
      ArrivalProcess faces(cfg.iat, detail::derive_seed(cfg.seed, 1));
      const auto q = types.at("query");
      const auto f = types.at("face");
      std::uint64_t key = 0;
      for (Millis t : queries.arrivals(cfg.duration)) pending.push_back({to_ts(t), q, key++});
      for (Millis t : faces.arrivals(cfg.duration)) pending.push_back({to_ts(t), f, std::nullopt});
      break;
    }
    case Scenario::custom: {
      ArrivalProcess arrivals(cfg.iat, detail::derive_seed(cfg.seed, 0));
      detail::Rng pick(detail::derive_seed(cfg.seed, 1));
      std::vector<double> cdf;
      double acc = 0.0;
      for (const auto& [name, p] : cfg.type_mix) cdf.push_back(acc += p);
      Millis t = 0.0;
      for (std::uint64_t i = 0; t < cfg.duration && (!cfg.max_events || i < *cfg.max_events);
           ++i, t += arrivals.next_gap(t)) {
        const double u = pick.uniform() * acc;
        auto idx = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        idx = std::min(idx, cdf.size() - 1);
        pending.push_back({to_ts(t), TypeId{static_cast<std::uint16_t>(idx)}, std::nullopt});
      }
      break;
    }
  }
  return finish(std::move(pending), cfg);
}

Millis in_window_cost(const CostModel& model, const Event& e,
                      std::span<const std::uint32_t> prior_counts) {
  const auto idx = e.etype.value;
  if (idx >= model.base.size() || !model.base[idx])
    throw CostModelError("no cost configured for event type " + std::to_string(idx));
  const Millis base = *model.base[idx];
  auto count_of = [&](TypeId t) -> double {
    return t.value < prior_counts.size() ? prior_counts[t.value] : 0.0;
  };
  switch (model.kind) {
    case CostKind::equi_join:
      if (e.etype == model.probe_type) return base + model.incr * count_of(model.build_type);
      return base;
    case CostKind::flat_per_type:
      return base;
    case CostKind::custom_table: {
      double seen = 0.0;
      for (auto c : prior_counts) seen += c;
      return (base + model.incr * seen) * e.payload_cost_hint.value_or(1.0);
    }
  }
  return base;
}

}  // namespace cepsched
