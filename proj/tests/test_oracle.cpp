#include <doctest.h>

#include <map>
#include <stdexcept>

#include "favedge/exact_oracle.hpp"
#include "favedge/walk.hpp"

using namespace favedge;
using namespace favedge::oracle;

namespace {

using Law = std::map<std::int64_t, std::uint64_t>;

// Reference laws from an independent brute-force enumeration script
// (tests/oracles/derive.py), counts out of 2^n paths.
const std::map<int, Law> kFavorites = {
    {1, {{1, 2}}},
    {2, {{1, 2}, {2, 2}}},
    {3, {{1, 6}, {3, 2}}},
    {4, {{1, 10}, {2, 4}, {4, 2}}},
    {5, {{1, 24}, {2, 6}, {5, 2}}},
    {6, {{1, 46}, {2, 10}, {3, 6}, {6, 2}}},
    {7, {{1, 102}, {2, 16}, {3, 8}, {7, 2}}},
    {8, {{1, 186}, {2, 52}, {3, 8}, {4, 8}, {8, 2}}},
    {9, {{1, 404}, {2, 80}, {3, 16}, {4, 10}, {9, 2}}},
    {10, {{1, 744}, {2, 226}, {3, 32}, {4, 10}, {5, 10}, {10, 2}}},
};
const std::map<int, Law> kDownFavorites = {
    {1, {{1, 1}, {2, 1}}},
    {4, {{1, 8}, {2, 4}, {3, 2}, {4, 1}, {5, 1}}},
    {10, {{1, 628}, {2, 253}, {3, 82}, {4, 35}, {5, 10}, {6, 5}, {7, 4},
          {8, 3}, {9, 2}, {10, 1}, {11, 1}}},
};
const std::map<int, Law> kMinAbs = {
    {3, {{0, 3}, {1, 4}, {2, 1}}},
    {8, {{0, 81}, {1, 95}, {2, 42}, {3, 22}, {4, 9}, {5, 4}, {6, 2}, {7, 1}}},
    {10, {{0, 290}, {1, 366}, {2, 179}, {3, 101}, {4, 48}, {5, 24}, {6, 9},
          {7, 4}, {8, 2}, {9, 1}}},
};
const std::map<int, Law> kThreeTimes = {
    {3, {{0, 6}, {1, 2}}},
    {7, {{0, 84}, {1, 38}, {2, 4}, {3, 2}}},
    {10, {{0, 620}, {1, 334}, {2, 48}, {3, 12}, {4, 6}, {5, 2}, {6, 2}}},
};

void check_law(const ExactDistribution& d, const Law& want) {
  REQUIRE(d.denominator_log2 == d.n);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < d.support.size(); ++i) total += d.numerators[i];
  CHECK(total == (std::uint64_t{1} << d.n));
  Law got;
  for (std::size_t i = 0; i < d.support.size(); ++i) {
    if (d.numerators[i]) got[d.support[i]] = d.numerators[i];
  }
  CHECK(got == want);
}

}  // namespace

TEST_SUITE("exact-oracle") {

TEST_CASE("favorite edge count laws") {
  for (const auto& [n, law] : kFavorites) {
    CAPTURE(n);
    check_law(enumerate(n, Statistic::favorite_edge_count, 1), law);
  }
  const auto d3 = enumerate(3, Statistic::favorite_edge_count);
  CHECK(d3.numerator_of(3) == 2);
  CHECK(d3.mass(3) == 0.25);
  CHECK(enumerate(1, Statistic::favorite_edge_count).mass(1) == 1.0);
}

TEST_CASE("other statistics") {
  for (const auto& [n, law] : kDownFavorites) {
    CAPTURE(n);
    check_law(enumerate(n, Statistic::favorite_down_site_count), law);
  }
  for (const auto& [n, law] : kMinAbs) {
    CAPTURE(n);
    check_law(enumerate(n, Statistic::min_abs_favorite_edge), law);
  }
  for (const auto& [n, law] : kThreeTimes) {
    CAPTURE(n);
    check_law(enumerate(n, Statistic::three_favorite_times), law);
  }
}

TEST_CASE("crossing identities never fail") {
  for (int n : {1, 5, 10, 14}) {
    const auto d = enumerate(n, Statistic::identity_violations);
    CHECK(d.mass(0) == 1.0);
  }
}

TEST_CASE("worker count does not change the result") {
  const auto a = enumerate(16, Statistic::three_favorite_times, 1);
  const auto b = enumerate(16, Statistic::three_favorite_times, 3);
  CHECK(a.support == b.support);
  CHECK(a.numerators == b.numerators);
}

TEST_CASE("horizon limits") {
  CHECK_THROWS_AS(enumerate(0, Statistic::favorite_edge_count), std::invalid_argument);
  CHECK_THROWS_AS(enumerate(kMaxEnumerationHorizon + 1, Statistic::favorite_edge_count),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_statistic("nope"), std::invalid_argument);
  CHECK(parse_statistic("favorites") == Statistic::favorite_edge_count);
}

TEST_CASE("json round trip") {
  const auto d = enumerate(6, Statistic::favorite_down_site_count);
  nlohmann::json j = d;
  const auto back = j.get<ExactDistribution>();
  CHECK(back.support == d.support);
  CHECK(back.numerators == d.numerators);
  CHECK(back.statistic == d.statistic);
}

TEST_CASE("stopped downcrossing laws") {
  CHECK(exact_stopped_pmf(3, 0, 0).ratio == doctest::Approx(0.5));
  for (int j = 0; j < 6; ++j) {
    CHECK(exact_stopped_pmf(3, 0, 0).mass(j) == doctest::Approx(std::ldexp(1.0, -(j + 1))));
  }
  CHECK(exact_stopped_pmf(2, 0, 0).mass(0) == 1.0);
  CHECK(exact_stopped_pmf(2, 0, 1).mass(0) == 1.0);
  CHECK(exact_stopped_pmf(3, 0, -1).mass(0) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(exact_stopped_pmf(5, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(exact_stopped_pmf(3, 1, 0), std::invalid_argument);
}

TEST_CASE("stopped law below the origin against the walk") {
  const int reps = 30000;
  int zeros = 0;
  int censored = 0;
  for (int r = 0; r < reps; ++r) {
    const auto p = stopped_run(SeedPair{41, static_cast<std::uint64_t>(r)}, 2, 1,
                               CrossingKind::upcross, Window{-1, -1}, 10'000'000);
    if (p.censored) {
      ++censored;
      continue;
    }
    zeros += p.at(-1) == 0;
  }
  CHECK(censored < reps / 200);
  const double kept = reps - censored;
  const double p0 = 1.0 / 3.0;
  CHECK(std::abs(zeros / kept - p0) < 5 * std::sqrt(p0 * (1 - p0) / kept));
}

}  // TEST_SUITE
