#include <doctest.h>

#include <array>
#include <cmath>
#include <stdexcept>

#include "favedge/event_counters.hpp"
#include "favedge/walk.hpp"

using namespace favedge;
using namespace favedge::events;

namespace {

std::vector<int> path_of(SeedPair s, std::int64_t n) {
  StepGenerator g(s);
  std::vector<int> out(static_cast<std::size_t>(n));
  for (auto& v : out) v = g.next();
  return out;
}

}  // namespace

TEST_SUITE("event-counters") {

TEST_CASE("three straight steps") {
  const std::vector<int> p{1, 1, 1};
  CountConfig c;
  c.H = 5;
  const auto r = count_events_on_path(p, c);
  CHECK(r.f == std::array<std::int64_t, 4>{1, 1, 1, 0});
  CHECK(r.ftilde == std::array<std::int64_t, 4>{1, 1, 1, 0});
  CHECK(r.events.empty());
  CHECK(r.censored);
  CHECK(r.stop_reason == "path-end");
  CHECK(r.N_at(5) == 0);
}

TEST_CASE("size tallies cover every step") {
  const std::vector<int> p{1, -1};
  const auto t = downcross_site_tallies_path(p);
  CHECK(t[0] == 1);
  CHECK(t[1] == 1);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto u = downcross_site_tallies(SeedPair{4, s}, 5000);
    CHECK(u[0] + u[1] + u[2] + u[3] == 5000);
  }
  CHECK_THROWS_AS(downcross_site_tallies(SeedPair{4, 0}, 0), std::invalid_argument);
}

TEST_CASE("every recorded event satisfies its defining conditions") {
  CountConfig c;
  c.H = 60;
  c.h_min_N = 1;
  c.h_min_tilde = 1;
  std::int64_t seen_up = 0, seen_down = 0;
  for (std::uint64_t s = 0; s < 300; ++s) {
    const SeedPair seeds{21, s};
    const auto r = count_path_events(seeds, c);
    REQUIRE_FALSE(r.censored);
    if (r.events.empty()) continue;
    const auto steps = path_of(seeds, r.stop_time);
    CrossingLedger l;
    WalkState st;
    std::size_t next = 0;
    for (std::int64_t n = 1; n <= r.stop_time && next < r.events.size(); ++n) {
      const auto prev = st.position;
      advance(st, l, steps[static_cast<std::size_t>(n - 1)]);
      while (next < r.events.size() && r.events[next].time == n) {
        const auto& e = r.events[next++];
        const auto fav = l.favorite_edges();
        REQUIRE(fav.size() == 3);
        CHECK(fav[0] == e.x);
        CHECK(fav[2] == e.x + 2);
        CHECK(l.max_edge_local() == 2 * e.h);
        CHECK(e.x >= 2);
        if (e.kind == EventKind::upcross) {
          ++seen_up;
          CHECK(st.position == e.x - 1);
          CHECK(st.position == prev + 1);
          CHECK(l.up(e.x - 1) == e.k + 1);
          CHECK(branching::in_k_window(e.k, 2 * e.h));
        } else {
          ++seen_down;
          CHECK(st.position == e.x - 1);
          CHECK(st.position == prev - 1);
          CHECK(l.down(e.x - 1) == e.h);
        }
      }
    }
    CHECK(next == r.events.size());
  }
  CHECK(seen_up > 0);
  CHECK(seen_down > 0);
}

TEST_CASE("containment and cumulative counts") {
  CountConfig c;
  c.H = 200;
  std::int64_t up = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto r = count_path_events(SeedPair{7, s}, c);
    const auto a = audit_containment_disjointness(r);
    CHECK(a.containment_violations.empty());
    CHECK(a.monotonicity_violations == 0);
    up += a.upcross_events;
    REQUIRE(r.N.size() == 201);
    CHECK(r.N.front() == 0);
    CHECK(r.N_at(7) == 0);
    CHECK(r.Ntilde_at(49) == 0);
  }
  CHECK(up >= 0);
}

TEST_CASE("no events after the stop") {
  CountConfig c;
  c.H = 40;
  c.h_min_N = 1;
  c.h_min_tilde = 1;
  c.overrun_factor = 4;
  for (std::uint64_t s = 0; s < 40; ++s) {
    CHECK(count_path_events(SeedPair{8, s}, c).late_events == 0);
  }
}

TEST_CASE("budget censoring") {
  CountConfig c;
  c.H = 200;
  c.budget = 1000;
  const auto r = count_path_events(SeedPair{1, 1}, c);
  CHECK(r.censored);
  CHECK(r.stop_reason == "budget");
  CHECK(r.stop_time == 1000);
  c.H = 0;
  CHECK_THROWS_AS(count_path_events(SeedPair{1, 1}, c), std::invalid_argument);
}

TEST_CASE("explicit path equals the seeded run") {
  CountConfig c;
  c.H = 30;
  c.h_min_N = 1;
  c.h_min_tilde = 1;
  const SeedPair s{13, 5};
  const auto a = count_path_events(s, c);
  const auto steps = path_of(s, a.stop_time + 10);
  auto b = count_events_on_path(steps, c);
  b.seeds = s;
  CHECK(to_json(a).dump() == to_json(b).dump());
  const std::vector<int> bad{1, 2};
  CHECK_THROWS_AS(count_events_on_path(bad, c), std::invalid_argument);
}

TEST_CASE("json lines are deterministic") {
  CountConfig c;
  const auto a = to_json(count_path_events(SeedPair{7, 3}, c)).dump();
  const auto b = to_json(count_path_events(SeedPair{7, 3}, c)).dump();
  CHECK(a == b);
  const auto j = nlohmann::json::parse(a);
  CHECK(j.at("f").contains("4+"));
  CHECK(j.at("stop_reason") == "max-edge-local");
}

}  // TEST_SUITE
