#include <doctest.h>

#include <limits>
#include <vector>

#include "cepsched/scheduler.hpp"

using namespace cepsched;

namespace {

/// Snapshot whose prediction on an empty instance is
/// lambda_o_max = n * (lat - iat) + lat with n = ws / iat.
StreamStatsSnapshot simple_snapshot(double iat, double lat, double ws) {
  StreamStatsSnapshot s;
  const std::vector<double> iats{iat};
  const std::vector<double> lats{lat};
  s.iat = build_bins(iats, 1);
  s.latency = {build_bins(lats, 1)};
  s.type_ratio = {1.0};
  s.ws_est = ws;
  s.delta_est = ws;
  return s;
}

ModelParams unbiased() {
  ModelParams p;
  p.delta_iat = 0.0;
  p.delta_lp = 0.0;
  return p;
}

std::vector<InstanceIndex> run(Scheduler& s, const SchedulingContext& ctx, int windows) {
  std::vector<InstanceIndex> out;
  for (int i = 0; i < windows; ++i) out.push_back(s.schedule(WindowDescriptor{}, ctx).instance);
  return out;
}

}  // namespace

TEST_CASE("round robin cycles through instances") {
  Scheduler s({RoundRobinPolicy{}, 8});
  std::vector<InstanceView> views(8);
  const SchedulingContext ctx{nullptr, views};
  CHECK(run(s, ctx, 10) == std::vector<InstanceIndex>{0, 1, 2, 3, 4, 5, 6, 7, 0, 1});
}

TEST_CASE("model based keeps the instance while the bound holds") {
  // n = 1, gain 1, peak = 1 + 2 = 3.
  const auto snap = simple_snapshot(1.0, 2.0, 1.0);
  std::vector<InstanceView> views(8);
  const SchedulingContext ctx{&snap, views};
  Scheduler s({ModelBasedPolicy{5.0, unbiased()}, 8});
  s.schedule(WindowDescriptor{}, ctx);
  const auto d = s.schedule(WindowDescriptor{}, ctx);
  REQUIRE(d.prediction.has_value());
  CHECK(d.prediction->lambda_o_max == doctest::Approx(3.0));
  CHECK(d.instance == 0);
  CHECK_FALSE(d.advanced);
}

TEST_CASE("model based advances without re-checking and wraps around") {
  // Peak 5 + 3.5 > LB 5 at every instance.
  const auto snap = simple_snapshot(1.0, 3.5, 2.0);
  std::vector<InstanceView> views(8);
  const SchedulingContext ctx{&snap, views};
  Scheduler s({ModelBasedPolicy{5.0, unbiased()}, 8});
  const auto order = run(s, ctx, 9);
  CHECK(order == std::vector<InstanceIndex>{0, 1, 2, 3, 4, 5, 6, 7, 0});
  CHECK(s.cursor() == 0);
}

TEST_CASE("model based with a zero bound matches round robin") {
  const auto snap = simple_snapshot(10.0, 1.0, 100.0);
  std::vector<InstanceView> views(5);
  const SchedulingContext ctx{&snap, views};
  Scheduler mb({ModelBasedPolicy{0.0, unbiased()}, 5});
  Scheduler rr({RoundRobinPolicy{}, 5});
  CHECK(run(mb, ctx, 23) == run(rr, ctx, 23));
}

TEST_CASE("model based with an infinite bound batches everything") {
  const auto snap = simple_snapshot(1.0, 100.0, 1000.0);
  std::vector<InstanceView> views(4, InstanceView{50, nullptr});
  const SchedulingContext ctx{&snap, views};
  Scheduler s({ModelBasedPolicy{std::numeric_limits<double>::infinity(), unbiased()}, 4});
  for (auto i : run(s, ctx, 40)) CHECK(i == 0);
}

TEST_CASE("model based without statistics spreads windows") {
  std::vector<InstanceView> views(3);
  const SchedulingContext ctx{nullptr, views};
  Scheduler s({ModelBasedPolicy{1000.0, ModelParams{}}, 3});
  CHECK(run(s, ctx, 4) == std::vector<InstanceIndex>{0, 1, 2, 0});
}

TEST_CASE("open windows on the current instance raise the prediction") {
  auto snap = simple_snapshot(10.0, 4.0, 100.0);
  snap.delta_est = 10.0;
  std::vector<InstanceView> views(2, InstanceView{0, nullptr});
  const SchedulingContext idle{&snap, views};
  Scheduler a({ModelBasedPolicy{1e9, unbiased()}, 2});
  a.schedule(WindowDescriptor{}, idle);
  const auto low = a.schedule(WindowDescriptor{}, idle).prediction->lambda_o_max;

  std::vector<InstanceView> busy_views(2, InstanceView{9, nullptr});
  const SchedulingContext busy{&snap, busy_views};
  Scheduler b({ModelBasedPolicy{1e9, unbiased()}, 2});
  b.schedule(WindowDescriptor{}, busy);
  const auto d = b.schedule(WindowDescriptor{}, busy);
  CHECK(d.prediction->theta_hat == 10.0);
  CHECK(d.prediction->lambda_o_max > low);
}

TEST_CASE("queued work reported by the instance raises the prediction") {
  const auto snap = simple_snapshot(1.0, 2.0, 1.0);
  FeedbackReport r;
  r.queued_counts = {3};
  r.theta_bar_rep = 1.0;
  std::vector<InstanceView> views(2, InstanceView{0, &r});
  const SchedulingContext ctx{&snap, views};
  Scheduler s({ModelBasedPolicy{5.0, unbiased()}, 2});
  s.schedule(WindowDescriptor{}, ctx);
  const auto d = s.schedule(WindowDescriptor{}, ctx);
  CHECK(d.prediction->lambda_q_init == 6.0);
  CHECK(d.advanced);
  CHECK(d.instance == 1);
}

TEST_CASE("reactive batches until the observed latency reaches the threshold") {
  FeedbackReport low;
  low.last_lambda_o = 4.0;
  FeedbackReport high;
  high.last_lambda_o = 12.0;
  std::vector<InstanceView> views{{0, &low}, {0, &low}, {0, &low}};
  const SchedulingContext ctx{nullptr, views};
  Scheduler s({ReactivePolicy{10.0}, 3});
  CHECK(run(s, ctx, 3) == std::vector<InstanceIndex>{0, 0, 0});

  views[0].feedback = &high;
  const auto d = s.schedule(WindowDescriptor{}, ctx);
  CHECK(d.advanced);
  CHECK(d.instance == 1);
  CHECK(*d.observed_lambda_o == 12.0);
  CHECK(s.schedule(WindowDescriptor{}, ctx).instance == 1);
}

TEST_CASE("decisions are deterministic") {
  const auto snap = simple_snapshot(3.0, 5.0, 30.0);
  std::vector<InstanceView> views(4, InstanceView{2, nullptr});
  const SchedulingContext ctx{&snap, views};
  Scheduler a({ModelBasedPolicy{40.0, unbiased()}, 4});
  Scheduler b({ModelBasedPolicy{40.0, unbiased()}, 4});
  CHECK(run(a, ctx, 30) == run(b, ctx, 30));
}

TEST_CASE("scheduler config validation") {
  CHECK_THROWS_AS((SchedulerConfig{RoundRobinPolicy{}, 0}.validate()), ConfigError);
  CHECK_THROWS_AS((SchedulerConfig{ReactivePolicy{0.0}, 2}.validate()), ConfigError);
  CHECK_THROWS_AS((SchedulerConfig{ModelBasedPolicy{-1.0, ModelParams{}}, 2}.validate()), ConfigError);
  CHECK_NOTHROW((SchedulerConfig{ModelBasedPolicy{std::numeric_limits<double>::infinity(), ModelParams{}}, 2}.validate()));
  CHECK(SchedulerConfig{ReactivePolicy{1.0}, 2}.kind_name() == "reactive");
}
