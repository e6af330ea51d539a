#include <doctest.h>

#include "favedge/rayknight.hpp"

using namespace favedge;
using namespace favedge::rayknight;

namespace {

CompareReport compare(std::int64_t x, std::int64_t k, Window w, std::int64_t reps,
                      std::uint64_t seed, OriginSeam seam = OriginSeam::corrected) {
  CompareConfig c;
  c.external_x = x;
  c.k = k;
  c.window = w;
  c.replicas = reps;
  c.master_seed = seed;
  c.seam = seam;
  c.cap = 50'000'000;
  return distribution_compare(c);
}

}  // namespace

TEST_SUITE("rayknight") {

TEST_CASE("regimes") {
  CHECK(regime_of(1) == Regime::right);
  CHECK(regime_of(5) == Regime::right);
  CHECK(regime_of(0) == Regime::left);
  CHECK(regime_of(-3) == Regime::left);
}

TEST_CASE("literal seam at x = 1, k = 0 is identically zero") {
  CounterRng rng(SeedPair{1, 0});
  for (int r = 0; r < 500; ++r) {
    const auto p = sample_patched_profile(1, 0, Window{-6, 6}, rng, OriginSeam::literal);
    for (auto v : p.values) REQUIRE(v == 0);
  }
}

TEST_CASE("x = 2, k = 0: geometric below the seam, zero above") {
  CounterRng rng(SeedPair{2, 0});
  std::vector<std::int64_t> counts(40, 0);
  const int n = 100'000;
  for (int r = 0; r < n; ++r) {
    const auto p = sample_patched_profile(2, 0, Window{0, 4}, rng);
    REQUIRE(p.at(1) == 0);
    REQUIRE(p.at(2) == 0);
    REQUIRE(p.at(4) == 0);
    ++counts[static_cast<std::size_t>(std::min<std::int64_t>(39, p.at(0)))];
  }
  std::vector<double> geo(40);
  for (int j = 0; j < 40; ++j) geo[j] = std::ldexp(1.0, -(j + 1));
  CHECK(stats::total_variation(stats::normalise(counts), geo) <= 0.01);
}

TEST_CASE("profiles are reproducible and validated") {
  CounterRng a(SeedPair{3, 3}), b(SeedPair{3, 3});
  CHECK(sample_patched_profile(4, 2, Window{-5, 9}, a).values ==
        sample_patched_profile(4, 2, Window{-5, 9}, b).values);
  CHECK_THROWS_AS(sample_patched_profile(2, -1, Window{0, 1}, a), std::invalid_argument);
  CHECK_THROWS_AS(sample_patched_profile(2, 0, Window{3, 1}, a), std::invalid_argument);
  CHECK_THROWS_AS(sample_patched_profile(2, 0, Window{0, kMaxWindowWidth + 1}, a),
                  std::invalid_argument);
}

TEST_CASE("walk side trivial configurations") {
  for (std::uint64_t r = 0; r < 200; ++r) {
    const auto p = walk_profile_sampler(2, 0, Window{0, 1}, 10'000'000, SeedPair{5, r});
    REQUIRE_FALSE(p.censored);
    CHECK(p.at(0) == 0);
    CHECK(p.at(1) == 0);
  }
}

TEST_CASE("single coordinate at the origin") {
  const auto r = compare(3, 0, Window{0, 0}, 100'000, 1);
  CHECK(r.max_tv <= 0.01);
  CHECK(r.min_p_bonferroni > 1e-3);
  CHECK(r.censor_rate < 0.01);
  CHECK_FALSE(r.invalid);
}

TEST_CASE("both regimes on a window") {
  const auto right = compare(4, 1, Window{-2, 6}, 20'000, 2);
  CHECK(right.min_p_bonferroni > 1e-3);
  CHECK_FALSE(right.fingerprint.has_value());  // width 9
  const auto left = compare(-1, 1, Window{-4, 3}, 20'000, 3);
  CHECK(left.min_p_bonferroni > 1e-3);
  const auto origin = compare(1, 2, Window{-3, 3}, 20'000, 4);
  CHECK(origin.min_p_bonferroni > 1e-3);
  REQUIRE(origin.fingerprint.has_value());
  CHECK(origin.fingerprint->p_value > 1e-3);
}

TEST_CASE("the literal seam is rejected below the origin") {
  const auto lit = compare(3, 0, Window{-1, -1}, 20'000, 5, OriginSeam::literal);
  CHECK(lit.min_p_bonferroni < 1e-6);
  const auto cor = compare(3, 0, Window{-1, -1}, 20'000, 5);
  CHECK(cor.min_p_bonferroni > 1e-3);
}

TEST_CASE("null check p-values are not concentrated near zero") {
  int small = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    CompareConfig c;
    c.external_x = 3;
    c.window = Window{-1, 2};
    c.replicas = 2'000;
    c.master_seed = 100 + s;
    c.null_check = true;
    small += distribution_compare(c).min_p_bonferroni < 0.01;
  }
  CHECK(small <= 3);
}

TEST_CASE("reports are byte-deterministic") {
  const auto a = to_json(compare(3, 1, Window{-1, 3}, 2'000, 9)).dump();
  const auto b = to_json(compare(3, 1, Window{-1, 3}, 2'000, 9)).dump();
  CHECK(a == b);
  CHECK(chain_side_seed(9) != 9);
  CHECK(parse_seam(to_string(OriginSeam::literal)) == OriginSeam::literal);
  CHECK_THROWS_AS(parse_seam("other"), std::invalid_argument);
}

TEST_CASE("censoring marks the report invalid") {
  CompareConfig c;
  c.external_x = 30;
  c.window = Window{0, 0};
  c.replicas = 200;
  c.cap = 50;
  c.master_seed = 1;
  const auto r = distribution_compare(c);
  CHECK(r.censor_rate > kMaxCensorRate);
  CHECK(r.invalid);
}

}  // TEST_SUITE
