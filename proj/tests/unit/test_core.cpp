#include <doctest.h>

#include <random>
#include <vector>

#include "cepsched/core.hpp"

using namespace cepsched;

namespace {

Event ev(std::uint64_t seq, Timestamp ts) { return Event{seq, ts, TypeId{0}, std::nullopt, std::nullopt}; }

}  // namespace

TEST_CASE("compare_events breaks timestamp ties by seq") {
  CHECK(compare_events(ev(1, 5), ev(2, 5)) == std::strong_ordering::less);
  CHECK(compare_events(ev(2, 5), ev(1, 5)) == std::strong_ordering::greater);
}

TEST_CASE("compare_events lets the timestamp dominate") {
  CHECK(compare_events(ev(9, 3), ev(2, 4)) == std::strong_ordering::less);
}

TEST_CASE("compare_events is reflexive") {
  const auto a = ev(7, 11);
  CHECK(compare_events(a, a) == std::strong_ordering::equal);
}

TEST_CASE("compare_events is a strict total order over random event sets") {
  std::mt19937_64 rng(1234);
  std::uniform_int_distribution<Timestamp> ts(0, 20);
  for (int round = 0; round < 50; ++round) {
    std::vector<Event> events;
    for (std::uint64_t s = 0; s < 40; ++s) events.push_back(ev(s, ts(rng)));
    for (const auto& a : events) {
      for (const auto& b : events) {
        const auto ab = compare_events(a, b);
        const auto ba = compare_events(b, a);
        // Antisymmetry and totality: exactly one direction unless identical seq.
        if (a.seq == b.seq) {
          CHECK(ab == std::strong_ordering::equal);
        } else {
          CHECK(ab != std::strong_ordering::equal);
          CHECK((ab == std::strong_ordering::less) == (ba == std::strong_ordering::greater));
        }
        for (const auto& c : events) {
          if (ab == std::strong_ordering::less && compare_events(b, c) == std::strong_ordering::less)
            CHECK(compare_events(a, c) == std::strong_ordering::less);
        }
      }
    }
  }
}

TEST_CASE("LatencySample keeps lambda_o = lambda_q + lambda_p") {
  const LatencySample s(3, 1, 2.5, 4.25, 100);
  CHECK(s.lambda_o() == 6.75);
  CHECK(s.event_seq() == 3);
  CHECK(s.instance() == 1);
  CHECK(s.ts() == 100);
  CHECK_THROWS_AS(LatencySample(0, 0, -1.0, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(LatencySample(0, 0, 1.0, -0.5, 0), std::invalid_argument);
}

TEST_CASE("SimClock never moves backwards") {
  SimClock clock;
  clock.advance_to(10);
  clock.advance_to(10);
  CHECK(clock.now() == 10);
  CHECK_THROWS_AS(clock.advance_to(9), std::logic_error);
}

TEST_CASE("TypeTable interns names densely") {
  TypeTable t({"L1", "L2"});
  CHECK(t.at("L1").value == 0);
  CHECK(t.at("L2").value == 1);
  CHECK(t.intern("L2").value == 1);
  CHECK(t.intern("X").value == 2);
  CHECK(t.name(TypeId{2}) == "X");
  CHECK_FALSE(t.find("nope").has_value());
  CHECK_THROWS_AS(t.at("nope"), ConfigError);
}

TEST_CASE("WindowDescriptor scope is defined once closed") {
  WindowDescriptor w;
  w.open_ts = 100;
  CHECK_FALSE(w.scope().has_value());
  w.close_ts = 350;
  CHECK(*w.scope() == 250.0);
}

TEST_CASE("ConfigError carries the field path") {
  const ConfigError e("workload.iat.mean_ms", "must be > 0");
  CHECK(e.field() == "workload.iat.mean_ms");
  CHECK(std::string(e.what()).find("workload.iat.mean_ms") != std::string::npos);
}

TEST_CASE("FeedbackReport totals its queue") {
  FeedbackReport r;
  r.queued_counts = {4, 0, 2};
  CHECK(r.total_queued() == 6);
}
