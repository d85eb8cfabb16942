#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "cepsched/latency_model.hpp"
#include "oracles.hpp"

using namespace cepsched;

namespace {

std::optional<BinnedDistribution> dist_of(std::vector<double> values, std::size_t bins = 1) {
  return build_bins(values, bins);
}

ModelParams unbiased() {
  ModelParams p;
  p.delta_iat = 0.0;
  p.delta_lp = 0.0;
  return p;
}

}  // namespace

TEST_CASE("event count from biased mean iat") {
  ModelParams p;
  p.delta_iat = 1.0;
  const std::vector<double> ratio{0.4, 0.6};
  const auto c = predict_event_counts(500, 100, ratio, 10000, p);
  CHECK(c.iat_biased == 400.0);
  CHECK(c.n == 25.0);
  CHECK(c.per_type[0] == doctest::Approx(10.0));
  CHECK(c.per_type[1] == doctest::Approx(15.0));
  CHECK(c.flags == kNone);
}

TEST_CASE("zero iat bias predicts ws / mean") {
  const std::vector<double> ratio{1.0};
  CHECK(predict_event_counts(400, 250, ratio, 10000, unbiased()).n == 25.0);
}

TEST_CASE("iat floor guards a non-positive biased iat") {
  ModelParams p;
  p.delta_iat = 3.0;
  const std::vector<double> ratio{1.0};
  const auto c = predict_event_counts(100, 50, ratio, 1000, p);
  CHECK(c.iat_biased == p.iat_floor);
  CHECK(c.n == doctest::Approx(1000 / p.iat_floor));
  CHECK((c.flags & kIatFloored) != 0);
}

TEST_CASE("overlap formula") {
  CHECK(predict_overlap(1, 5000, 700).theta_bar == 1.0);
  CHECK(predict_overlap(3, 10000, 2000).theta_bar == doctest::Approx(2.4));
  CHECK(predict_overlap(2, 10000, 10000).theta_bar == doctest::Approx(1.0));
  const auto inconsistent = predict_overlap(5, 1000, 2000);
  CHECK((inconsistent.flags & kOverlapInconsistent) != 0);
  CHECK(inconsistent.theta_bar >= 1.0);
  CHECK(inconsistent.theta_bar <= 5.0);
}

TEST_CASE("overlap stays within [1, theta_hat]") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double th = 1.0 + std::floor(u(rng) * 50.0);
    const double ws = 1.0 + u(rng) * 20000.0;
    const double delta = u(rng) * 5000.0;
    const auto o = predict_overlap(th, ws, delta);
    CHECK(o.theta_bar >= 1.0);
    CHECK(o.theta_bar <= th);
  }
}

TEST_CASE("single latency bin against one iat bin") {
  const auto g = pair_gains({{8, 7}}, {{5, 7}}, 1.0);
  CHECK(g.gamma_minus == 21.0);
  CHECK(g.gamma_plus == 0.0);
}

TEST_CASE("worked-example multiset gives Gamma- = 10 and Gamma+ = -5") {
  const auto g = pair_gains({{8, 2}, {7, 2}, {4, 2}, {2, 1}}, {{5, 7}}, 1.0);
  CHECK(g.gamma_minus == 10.0);
  CHECK(g.gamma_plus == -5.0);
  CHECK(g.paired == 7.0);
  // Bin order in the input does not matter.
  const auto shuffled = pair_gains({{2, 1}, {7, 2}, {8, 2}, {4, 2}}, {{5, 7}}, 1.0);
  CHECK(shuffled.gamma_minus == 10.0);
  CHECK(shuffled.gamma_plus == -5.0);
}

TEST_CASE("cheap events against long gaps give only positive gains") {
  const auto g = pair_gains({{1, 3}, {2, 4}}, {{10, 5}, {20, 2}}, 1.0);
  CHECK(g.gamma_minus == 0.0);
  CHECK(g.gamma_plus < 0.0);
}

TEST_CASE("queue peak for alpha 0, 0.8 and 1") {
  CHECK(queue_peak(0, 10, -5, 0.0) == 10.0);
  CHECK(queue_peak(0, 10, -5, 0.8) == 6.0);
  CHECK(queue_peak(0, 10, -5, 1.0) == 5.0);
  CHECK(queue_peak(3, 1, -5, 1.0) == 3.0);
}

TEST_CASE("queue peak is non-increasing in alpha and never below the initial queue") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int i = 0; i < 500; ++i) {
    const double init = u(rng), gm = u(rng), gp = -u(rng);
    double prev = std::numeric_limits<double>::infinity();
    for (double a = 0.0; a <= 1.0; a += 0.125) {
      const double q = queue_peak(init, gm, gp, a);
      CHECK(q >= init);
      CHECK(q <= prev);
      prev = q;
    }
  }
}

TEST_CASE("T-COUNT alpha") {
  CHECK(predict_alpha_tcount({3, 3, 5}) == doctest::Approx(4.0 / 6.0));
  CHECK(predict_alpha_tcount({3, 3, 1}) == 0.0);
  CHECK(predict_alpha_tcount({4, 0, 1}) == 0.0);
  CHECK(predict_alpha_tcount({2, 9, 40}) == 1.0);
}

TEST_CASE("initial queuing latency from a feedback report") {
  StreamStatsSnapshot s;
  s.latency = {dist_of({1.0}), dist_of({3.0})};
  FeedbackReport r;
  r.queued_counts = {4, 2};
  r.theta_bar_rep = 2.0;
  CHECK(predict_lambda_q_init(r, s, ModelParams{}).lambda_q_init == 20.0);

  FeedbackReport empty;
  empty.queued_counts = {0, 0};
  CHECK(predict_lambda_q_init(empty, s, ModelParams{}).lambda_q_init == 0.0);

  FeedbackReport one;
  one.queued_counts = {0, 5};
  CHECK(predict_lambda_q_init(one, s, ModelParams{}).lambda_q_init == 15.0);
}

TEST_CASE("unknown feedback type falls back to the global mean") {
  StreamStatsSnapshot s;
  s.latency = {dist_of({2.0, 4.0}), std::nullopt};
  FeedbackReport r;
  r.queued_counts = {0, 3};
  const auto q = predict_lambda_q_init(r, s, unbiased());
  CHECK((q.flags & kUnknownFeedbackType) != 0);
  CHECK(q.lambda_q_init == doctest::Approx(9.0));
}

TEST_CASE("peak combines queue and processing latency") {
  const auto p = predict_peak({10, -5, 7}, 0.8, 2.0, 1.5, 4.0);
  CHECK(p.lambda_q_max == 8.0);
  CHECK(p.lambda_p_max == 6.0);
  CHECK(p.lambda_o_max == 14.0);
}

TEST_CASE("no usable statistics predicts an unbounded peak") {
  const auto p = predict_window(StreamStatsSnapshot{}, 2, nullptr, ModelParams{});
  CHECK(std::isinf(p.lambda_o_max));
  CHECK((p.flags & kNoStatistics) != 0);
  CHECK(p.theta_hat == 3.0);
}

TEST_CASE("predict_window on a degenerate model matches the closed form") {
  StreamStatsSnapshot s;
  s.iat = dist_of({50.0, 50.0, 50.0});
  s.latency = {dist_of({80.0, 80.0})};
  s.type_ratio = {1.0};
  s.ws_est = 1000.0;
  s.delta_est = 1000.0;
  s.tcount = {0, 10, 1};
  const auto p = predict_window(s, 0, nullptr, unbiased());
  CHECK(p.n == 20.0);
  CHECK(p.theta_bar == 1.0);
  CHECK(p.gamma_minus == doctest::Approx(20.0 * (80.0 - 50.0)));
  CHECK(p.gamma_plus == 0.0);
  CHECK(p.alpha == 0.0);
  CHECK(p.lambda_o_max == doctest::Approx(600.0 + 80.0));
}

TEST_CASE("degenerate gains equal n * max(0, theta * lambda - iat) per type") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(1.0, 100.0);
  for (int i = 0; i < 200; ++i) {
    StreamStatsSnapshot s;
    const double iat = u(rng);
    s.iat = dist_of({iat});
    const std::size_t types = 1 + rng() % 4;
    std::vector<double> counts;
    double expected_minus = 0.0, expected_plus = 0.0;
    const double theta = 1.0 + std::floor(u(rng) / 20.0);
    for (std::size_t t = 0; t < types; ++t) {
      const double lat = u(rng);
      s.latency.push_back(dist_of({lat}));
      counts.push_back(std::floor(u(rng)));
      const double gain = counts.back() * (theta * lat - iat);
      (gain > 0 ? expected_minus : expected_plus) += gain;
    }
    const double n = std::accumulate(counts.begin(), counts.end(), 0.0);
    const auto g = predict_gains(s, counts, n, theta, unbiased());
    CHECK(g.gamma_minus == doctest::Approx(expected_minus).epsilon(1e-12));
    CHECK(g.gamma_plus == doctest::Approx(expected_plus).epsilon(1e-12));
  }
}

TEST_CASE("latency bins are biased upward and iat bins downward") {
  StreamStatsSnapshot s;
  s.iat = dist_of({10.0, 30.0});
  s.latency = {dist_of({2.0, 6.0})};
  ModelParams p;
  p.delta_iat = 0.5;
  p.delta_lp = 2.0;
  const std::vector<double> counts{4.0};
  const auto lat = latency_bin_counts(s, counts, p);
  REQUIRE(lat.size() == 1);
  CHECK(lat[0].lambda_pw == 4.0 + 2.0 * 2.0);
  CHECK(lat[0].count == 4.0);
  const auto iat = iat_bin_counts(s, 4.0, p);
  REQUIRE(iat.size() == 1);
  CHECK(iat[0].iat == 20.0 - 0.5 * 10.0);
  CHECK(*max_bin_latency(s, p) == 8.0);
  CHECK(*type_latency(s, TypeId{0}, p) == 8.0);
}

TEST_CASE("gains algorithm conserves counts and matches the segment oracle") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int round = 0; round < 500; ++round) {
    std::vector<LatencyBinCount> lat(1 + rng() % 12);
    std::vector<IatBinCount> iat(1 + rng() % 12);
    for (auto& b : lat) b = {u(rng) * 50.0, (rng() % 4 == 0) ? 0.0 : u(rng) * 30.0};
    for (auto& b : iat) b = {u(rng) * 50.0, (rng() % 4 == 0) ? 0.0 : u(rng) * 30.0};
    const double theta = 1.0 + u(rng) * 5.0;

    const auto g = pair_gains(lat, iat, theta);
    const auto o = oracle::segment_gains(lat, iat, theta);
    double lat_total = 0.0, iat_total = 0.0;
    for (const auto& b : lat) lat_total += b.count;
    for (const auto& b : iat) iat_total += b.count;

    CHECK(g.paired == doctest::Approx(std::min(lat_total, iat_total)).epsilon(1e-9));
    CHECK(g.gamma_minus >= 0.0);
    CHECK(g.gamma_plus <= 0.0);
    const double scale = std::max(1.0, std::abs(o.total));
    CHECK(std::abs((g.gamma_minus + g.gamma_plus) - o.total) / scale < 1e-9);
  }
}

TEST_CASE("Lindley oracle lies in the gains bracket") {
  std::mt19937_64 rng(99);
  for (int round = 0; round < 1000; ++round) {
    const auto seq = oracle::random_sequence(rng);
    const auto peak = oracle::lindley_peak(seq, 0.0);

    std::vector<LatencyBinCount> lat;
    std::vector<IatBinCount> iat;
    for (const auto& [lp, gap] : seq) {
      lat.push_back({lp, 1.0});
      iat.push_back({gap, 1.0});
    }
    const auto g = pair_gains(lat, iat, 1.0);
    const double upper = queue_peak(0.0, g.gamma_minus, g.gamma_plus, 0.0);
    const double lower = queue_peak(0.0, g.gamma_minus, g.gamma_plus, 1.0);
    CHECK(lower == doctest::Approx(std::max(0.0, g.gamma_minus + g.gamma_plus)));
    CHECK(peak <= upper + 1e-9);
    CHECK(peak >= lower - 1e-9);
  }
}

TEST_CASE("model parameters validate") {
  ModelParams p;
  p.n_iat_bins = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = ModelParams{};
  p.alpha = FixedAlpha{1.5};
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = ModelParams{};
  p.delta_lp = -1;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  CHECK_NOTHROW(ModelParams{}.validate());
}
