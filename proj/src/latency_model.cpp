#include "cepsched/latency_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cepsched {

void ModelParams::validate() const {
  if (n_iat_bins < 1) throw ConfigError("model.n_iat_bins", "must be >= 1");
  if (n_lat_bins < 1) throw ConfigError("model.n_lat_bins", "must be >= 1");
  if (!(delta_iat >= 0.0)) throw ConfigError("model.delta_iat", "must be >= 0");
  if (!(delta_lp >= 0.0)) throw ConfigError("model.delta_lp", "must be >= 0");
  if (!(iat_floor > 0.0)) throw ConfigError("model.iat_floor_ms", "must be > 0");
  if (const auto* fixed = std::get_if<FixedAlpha>(&alpha)) {
    if (!(fixed->value >= 0.0 && fixed->value <= 1.0))
      throw ConfigError("model.alpha", "fixed alpha must lie in [0, 1]");
  }
}

EventCounts predict_event_counts(Millis iat_mean, Millis iat_sigma, std::span<const double> type_ratio,
                                 Millis ws_est, const ModelParams& params) {
  EventCounts out;
  out.iat_biased = iat_mean - params.delta_iat * iat_sigma;
  if (!(out.iat_biased > params.iat_floor)) {
    if (out.iat_biased < params.iat_floor) out.flags |= kIatFloored;
    out.iat_biased = params.iat_floor;
  }
  out.n = ws_est / out.iat_biased;
  out.per_type.reserve(type_ratio.size());
  for (double r : type_ratio) out.per_type.push_back(r * out.n);
  return out;
}

EventCounts predict_event_counts(const StreamStatsSnapshot& snapshot, const ModelParams& params) {
  if (!snapshot.iat || !snapshot.ws_est)
    throw std::invalid_argument("predict_event_counts: snapshot lacks iat or window scope");
  return predict_event_counts(snapshot.iat->mean, snapshot.iat->stddev, snapshot.type_ratio,
                              *snapshot.ws_est, params);
}

OverlapPrediction predict_overlap(double theta_hat, Millis ws_est, Millis delta_est) {
  if (theta_hat < 1.0) throw std::invalid_argument("predict_overlap: theta_hat must be >= 1");
  OverlapPrediction out;
  if (!(ws_est > 0.0)) {
    out.theta_bar = theta_hat;
    out.flags |= kOverlapInconsistent;
    return out;
  }
  const double closing_phase = (theta_hat - 1.0) * std::max(0.0, delta_est);
  double full_phase = ws_est - closing_phase;
  if (full_phase < 0.0) {
    full_phase = 0.0;
    out.flags |= kOverlapInconsistent;
  }
  const double value = (full_phase * theta_hat + closing_phase * theta_hat / 2.0) / ws_est;
  out.theta_bar = std::clamp(value, 1.0, theta_hat);
  return out;
}

Gains pair_gains(std::vector<LatencyBinCount> latency_bins, std::vector<IatBinCount> iat_bins,
                 double theta_bar) {
  std::stable_sort(latency_bins.begin(), latency_bins.end(),
                   [](const auto& a, const auto& b) { return a.lambda_pw > b.lambda_pw; });
  std::stable_sort(iat_bins.begin(), iat_bins.end(),
                   [](const auto& a, const auto& b) { return a.iat < b.iat; });

  Gains g;
  std::size_t l = 0;
  std::size_t i = 0;
  while (true) {
    while (l < latency_bins.size() && !(latency_bins[l].count > 0.0)) ++l;
    while (i < iat_bins.size() && !(iat_bins[i].count > 0.0)) ++i;
    if (l == latency_bins.size() || i == iat_bins.size()) break;

    auto& lb = latency_bins[l];
    auto& ib = iat_bins[i];
    const double combination = std::min(lb.count, ib.count);
    const double gain = combination * (theta_bar * lb.lambda_pw - ib.iat);
    if (gain > 0.0)
      g.gamma_minus += gain;
    else
      g.gamma_plus += gain;
    g.paired += combination;
    lb.count -= combination;
    ib.count -= combination;
  }
  return g;
}

namespace {

double biased_latency(const Bin& b, const ModelParams& p) { return b.mean + p.delta_lp * b.stddev(); }

std::optional<Millis> global_latency(const StreamStatsSnapshot& s, const ModelParams& p) {
  double weighted = 0.0;
  double total = 0.0;
  for (const auto& dist : s.latency) {
    if (!dist) continue;
    for (const auto& b : dist->bins) {
      weighted += static_cast<double>(b.count) * biased_latency(b, p);
      total += static_cast<double>(b.count);
    }
  }
  if (total <= 0.0) return std::nullopt;
  return weighted / total;
}

}  // namespace

std::vector<LatencyBinCount> latency_bin_counts(const StreamStatsSnapshot& snapshot,
                                                std::span<const double> per_type_counts,
                                                const ModelParams& params) {
  std::vector<LatencyBinCount> out;
  std::optional<Millis> fallback;
  for (std::size_t t = 0; t < per_type_counts.size(); ++t) {
    const double count = per_type_counts[t];
    if (!(count > 0.0)) continue;
    const auto* dist = t < snapshot.latency.size() && snapshot.latency[t] ? &*snapshot.latency[t] : nullptr;
    if (!dist) {
      if (!fallback) fallback = global_latency(snapshot, params);
      if (fallback) out.push_back({*fallback, count});
      continue;
    }
    for (std::size_t b = 0; b < dist->bins.size(); ++b) {
      if (dist->bins[b].count == 0) continue;
      out.push_back({biased_latency(dist->bins[b], params), count * dist->weight(b)});
    }
  }
  return out;
}

std::vector<IatBinCount> iat_bin_counts(const StreamStatsSnapshot& snapshot, double n,
                                        const ModelParams& params) {
  std::vector<IatBinCount> out;
  if (!snapshot.iat) return out;
  const auto& dist = *snapshot.iat;
  for (std::size_t b = 0; b < dist.bins.size(); ++b) {
    const auto& bin = dist.bins[b];
    if (bin.count == 0) continue;
    const Millis iat = std::max(0.0, bin.mean - params.delta_iat * bin.stddev());
    out.push_back({iat, n * dist.weight(b)});
  }
  return out;
}

Gains predict_gains(const StreamStatsSnapshot& snapshot, std::span<const double> per_type_counts,
                    double n, double theta_bar, const ModelParams& params) {
  return pair_gains(latency_bin_counts(snapshot, per_type_counts, params),
                    iat_bin_counts(snapshot, n, params), theta_bar);
}

double predict_alpha_tcount(const TCount& counts) {
  const auto smaller = std::min(counts.c_plus, counts.c_minus);
  if (smaller == 0 || counts.c_trans == 0) return 0.0;
  const double alpha =
      (static_cast<double>(counts.c_trans) - 1.0) / (2.0 * static_cast<double>(smaller));
  return std::clamp(alpha, 0.0, 1.0);
}

std::optional<Millis> type_latency(const StreamStatsSnapshot& snapshot, TypeId type,
                                   const ModelParams& params) {
  if (type.value >= snapshot.latency.size() || !snapshot.latency[type.value]) return std::nullopt;
  const auto& dist = *snapshot.latency[type.value];
  double sum = 0.0;
  for (std::size_t b = 0; b < dist.bins.size(); ++b)
    sum += dist.weight(b) * biased_latency(dist.bins[b], params);
  return sum;
}

QueueInitPrediction predict_lambda_q_init(const FeedbackReport& report,
                                          const StreamStatsSnapshot& snapshot,
                                          const ModelParams& params) {
  QueueInitPrediction out;
  std::optional<Millis> fallback;
  for (std::size_t t = 0; t < report.queued_counts.size(); ++t) {
    const auto queued = report.queued_counts[t];
    if (queued == 0) continue;
    auto lat = type_latency(snapshot, TypeId{static_cast<std::uint16_t>(t)}, params);
    if (!lat) {
      out.flags |= kUnknownFeedbackType;
      if (!fallback) fallback = global_latency(snapshot, params);
      lat = fallback.value_or(0.0);
    }
    out.lambda_q_init += static_cast<double>(queued) * report.theta_bar_rep * *lat;
  }
  return out;
}

Millis queue_peak(Millis lambda_q_init, Millis gamma_minus, Millis gamma_plus, double alpha) {
  return std::max(lambda_q_init, lambda_q_init + gamma_minus + alpha * gamma_plus);
}

LatencyPrediction predict_peak(Gains gains, double alpha, Millis lambda_q_init, double theta_bar,
                               Millis max_lambda_pw) {
  LatencyPrediction p;
  p.theta_bar = theta_bar;
  p.gamma_minus = gains.gamma_minus;
  p.gamma_plus = gains.gamma_plus;
  p.alpha = alpha;
  p.lambda_q_init = lambda_q_init;
  p.lambda_q_max = queue_peak(lambda_q_init, gains.gamma_minus, gains.gamma_plus, alpha);
  p.lambda_p_max = theta_bar * max_lambda_pw;
  p.lambda_o_max = p.lambda_q_max + p.lambda_p_max;
  return p;
}

std::optional<Millis> max_bin_latency(const StreamStatsSnapshot& snapshot, const ModelParams& params) {
  std::optional<Millis> best;
  for (const auto& dist : snapshot.latency) {
    if (!dist) continue;
    for (const auto& b : dist->bins) {
      if (b.count == 0) continue;
      const auto v = biased_latency(b, params);
      if (!best || v > *best) best = v;
    }
  }
  return best;
}

LatencyPrediction predict_window(const StreamStatsSnapshot& snapshot, std::size_t open_windows,
                                 const FeedbackReport* feedback, const ModelParams& params) {
  const double theta_hat = static_cast<double>(open_windows) + 1.0;
  if (!snapshot.usable()) {
    LatencyPrediction p;
    p.theta_hat = theta_hat;
    p.theta_bar = theta_hat;
    p.lambda_q_max = std::numeric_limits<double>::infinity();
    p.lambda_o_max = std::numeric_limits<double>::infinity();
    p.flags = kNoStatistics;
    return p;
  }

  const auto counts = predict_event_counts(snapshot, params);
  const auto overlap = predict_overlap(theta_hat, *snapshot.ws_est, *snapshot.delta_est);
  const auto gains = predict_gains(snapshot, counts.per_type, counts.n, overlap.theta_bar, params);
  const double alpha = std::holds_alternative<FixedAlpha>(params.alpha)
                           ? std::get<FixedAlpha>(params.alpha).value
                           : predict_alpha_tcount(snapshot.tcount);
  QueueInitPrediction init;
  if (feedback) init = predict_lambda_q_init(*feedback, snapshot, params);

  auto p = predict_peak(gains, alpha, init.lambda_q_init, overlap.theta_bar,
                        max_bin_latency(snapshot, params).value_or(0.0));
  p.theta_hat = theta_hat;
  p.n = counts.n;
  p.per_type_counts = counts.per_type;
  p.flags = counts.flags | overlap.flags | init.flags;
  return p;
}

}  // namespace cepsched
