#pragma once

// Predicts the operational-latency peak of batching a new window onto an
// operator instance: event counts, overlap, negative/positive gains,
// compensation factor and initial queuing latency.

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cepsched/core.hpp"
#include "cepsched/splitter.hpp"

namespace cepsched {

struct TCountAlpha {};
struct FixedAlpha {
  double value{};
};
using AlphaMode = std::variant<TCountAlpha, FixedAlpha>;

struct ModelParams {
  std::size_t n_iat_bins{8};
  std::size_t n_lat_bins{4};
  /// Standard deviations subtracted from monitored inter-arrival times.
  double delta_iat{0.75};
  /// Standard deviations added to monitored in-window latencies.
  double delta_lp{2.0};
  AlphaMode alpha{TCountAlpha{}};
  Millis iat_floor{0.01};

  /// Throws ConfigError.
  void validate() const;
};

/// Conditions met while predicting that the model's assumptions did not hold.
enum PredictionFlag : unsigned {
  kNone = 0,
  kIatFloored = 1u << 0,
  kOverlapInconsistent = 1u << 1,
  kUnknownFeedbackType = 1u << 2,
  kNoStatistics = 1u << 3,
};

struct EventCounts {
  double n{};
  std::vector<double> per_type;
  Millis iat_biased{};
  unsigned flags{kNone};
};

/// n = ws / (mean - delta_iat * sigma), with the denominator floored at
/// iat_floor; per-type counts are ratio * n (fractional).
EventCounts predict_event_counts(Millis iat_mean, Millis iat_sigma, std::span<const double> type_ratio,
                                 Millis ws_est, const ModelParams& params);
EventCounts predict_event_counts(const StreamStatsSnapshot& snapshot, const ModelParams& params);

struct OverlapPrediction {
  double theta_bar{};
  unsigned flags{kNone};
};

/// Average overlap of the new window's events when it joins a batch whose
/// current overlap is theta_hat. Clamped to [1, theta_hat].
OverlapPrediction predict_overlap(double theta_hat, Millis ws_est, Millis delta_est);

/// One latency bin: biased in-window latency and predicted event count.
struct LatencyBinCount {
  Millis lambda_pw{};
  double count{};
};
/// One iat bin: biased inter-arrival time and predicted event count.
struct IatBinCount {
  Millis iat{};
  double count{};
};

struct Gains {
  Millis gamma_minus{};  // >= 0
  Millis gamma_plus{};   // <= 0
  double paired{};       // sum of #combination
};

/// Pairs the most expensive latency bins with the shortest inter-arrival
/// times, accumulating count * (theta_bar * lambda_pw - iat) into the negative
/// (> 0) or positive (<= 0) total until either side runs out of events.
Gains pair_gains(std::vector<LatencyBinCount> latency_bins, std::vector<IatBinCount> iat_bins,
                 double theta_bar);

/// Bins from a snapshot, biased per bin, with counts from predict_event_counts.
Gains predict_gains(const StreamStatsSnapshot& snapshot, std::span<const double> per_type_counts,
                    double n, double theta_bar, const ModelParams& params);

std::vector<LatencyBinCount> latency_bin_counts(const StreamStatsSnapshot& snapshot,
                                                std::span<const double> per_type_counts,
                                                const ModelParams& params);
std::vector<IatBinCount> iat_bin_counts(const StreamStatsSnapshot& snapshot, double n,
                                        const ModelParams& params);

/// (c_trans - 1) / (2 min{c_plus, c_minus}), clamped to [0, 1]; 0 when a
/// group is empty.
double predict_alpha_tcount(const TCount& counts);

/// Bin-weighted biased mean in-window latency of one type.
std::optional<Millis> type_latency(const StreamStatsSnapshot& snapshot, TypeId type,
                                   const ModelParams& params);

struct QueueInitPrediction {
  Millis lambda_q_init{};
  unsigned flags{kNone};
};

/// Sum over reported queue contents of count * theta_bar_rep * lambda_pw(type).
/// Types without latency statistics fall back to the global mean and are flagged.
QueueInitPrediction predict_lambda_q_init(const FeedbackReport& report,
                                          const StreamStatsSnapshot& snapshot,
                                          const ModelParams& params);

struct LatencyPrediction {
  double theta_hat{};
  double n{};
  std::vector<double> per_type_counts;
  double theta_bar{};
  Millis gamma_minus{};
  Millis gamma_plus{};
  double alpha{};
  Millis lambda_q_init{};
  Millis lambda_q_max{};
  Millis lambda_p_max{};
  Millis lambda_o_max{};
  unsigned flags{kNone};
};

/// max(init, init + gamma_minus + alpha * gamma_plus).
Millis queue_peak(Millis lambda_q_init, Millis gamma_minus, Millis gamma_plus, double alpha);

/// Combines sub-predictions into the peak. lambda_p_max = theta_bar * max_lambda_pw.
LatencyPrediction predict_peak(Gains gains, double alpha, Millis lambda_q_init, double theta_bar,
                               Millis max_lambda_pw);

/// Highest biased in-window latency over all latency bins of all types.
std::optional<Millis> max_bin_latency(const StreamStatsSnapshot& snapshot, const ModelParams& params);

/// Full prediction for batching a new window onto an instance with
/// open_windows currently open. Without usable statistics the peak is +inf.
LatencyPrediction predict_window(const StreamStatsSnapshot& snapshot, std::size_t open_windows,
                                 const FeedbackReport* feedback, const ModelParams& params);

}  // namespace cepsched
