#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "favedge/branching.hpp"

using namespace favedge;
using namespace favedge::branching;

namespace {

// First-passage expectations solved exactly on the transient states by an
// independent script (tests/oracles/derive.py).
constexpr double kTau_k0_h10 = 12.564531858424;
constexpr double kTau_k5_h40 = 40.149424938450;
constexpr double kLevel_k5_h40 = 45.149424938450;
constexpr double kDriftSum_h10_k2 = 2.228584587554;
constexpr double kDriftSum_h400_k185 = 13.385969345424;
constexpr double kRuin_m3_h10 = 0.754770908782;

bool within(const stats::Estimate& e, double target, double n_se) {
  return std::abs(e.mean - target) <= n_se * e.se;
}

}  // namespace

TEST_SUITE("branching") {

TEST_CASE("kernel values") {
  CHECK(plain_kernel(1, 0) == 0.5);
  CHECK(plain_kernel(1, 1) == 0.25);
  CHECK(plain_kernel(0, 0) == 1.0);
  CHECK(plain_kernel(0, 5) == 0.0);
  CHECK(plain_kernel(3, 4) == 15.0 / 128.0);
  CHECK(kernel_eval(KernelKind::immigrant, 0, 0) == 0.5);
  CHECK(kernel_eval(KernelKind::shifted_immigrant, 1, 1) == 0.5);
  CHECK(kernel_eval(KernelKind::shifted_immigrant, 4, 0) == 0.0);
  CHECK(plain_kernel(2, -1) == 0.0);
}

TEST_CASE("exact and log-gamma evaluations agree") {
  for (std::int64_t i = 1; i <= 40; ++i) {
    for (std::int64_t j = 0; i + j <= 60; ++j) {
      const double a = plain_kernel_exact(i, j);
      CHECK(plain_kernel_lgamma(i, j) == doctest::Approx(a).epsilon(1e-12));
    }
  }
}

TEST_CASE("rows sum to one") {
  for (auto k : {KernelKind::plain, KernelKind::immigrant, KernelKind::shifted_immigrant}) {
    for (std::int64_t i = 0; i <= 200; ++i) {
      REQUIRE(row_sum_error(k, i) < 1e-12);
    }
  }
}

TEST_CASE("rows decrease in the parent count below the diagonal") {
  CHECK(monotonicity_violations(120) == 0);
}

TEST_CASE("kernel names") {
  for (auto k : {KernelKind::plain, KernelKind::immigrant, KernelKind::shifted_immigrant}) {
    CHECK(parse_kernel(to_string(k)) == k);
  }
  CHECK_THROWS_AS(parse_kernel("poisson"), std::invalid_argument);
}

TEST_CASE("sampler support") {
  CounterRng rng(SeedPair{1, 1});
  for (int r = 0; r < 2000; ++r) {
    REQUIRE(kernel_sample(KernelKind::plain, 0, rng) == 0);
    REQUIRE(kernel_sample(KernelKind::shifted_immigrant, r % 7, rng) >= 1);
    REQUIRE(kernel_sample(KernelKind::immigrant, r % 5, rng) >= 0);
  }
}

TEST_CASE("geometric row in total variation") {
  CounterRng rng(SeedPair{2, 0});
  const int n = 1'000'000;
  std::vector<std::int64_t> counts(64, 0);
  for (int r = 0; r < n; ++r) {
    ++counts[static_cast<std::size_t>(std::min<std::int64_t>(63, kernel_sample(KernelKind::plain, 1, rng)))];
  }
  std::vector<double> p(64);
  for (int j = 0; j < 64; ++j) p[j] = plain_kernel(1, j);
  CHECK(stats::total_variation(stats::normalise(counts), p) <= 0.01);
}

TEST_CASE("both samplers fit the exact rows") {
  for (auto sampler : {Sampler::sum_of_geometrics, Sampler::inverse_cdf}) {
    for (auto kind : {KernelKind::plain, KernelKind::immigrant, KernelKind::shifted_immigrant}) {
      for (std::int64_t i : {1, 5, 50}) {
        CounterRng rng(SeedPair{77, static_cast<std::uint64_t>(i)});
        std::vector<std::int64_t> draws(100'000);
        for (auto& d : draws) d = kernel_sample(kind, i, rng, sampler);
        const std::int64_t top = *std::max_element(draws.begin(), draws.end());
        std::vector<double> probs;
        for (std::int64_t j = 0; j <= top; ++j) probs.push_back(kernel_eval(kind, i, j));
        const auto chi = stats::chi_square_gof(stats::histogram(draws, top), probs);
        CAPTURE(i);
        CHECK(chi.p_value > 1e-4);
      }
    }
  }
}

TEST_CASE("chain stopping rules") {
  CounterRng rng(SeedPair{3, 3});
  auto t = chain_run(KernelKind::plain, 0, {StopRule::extinct, 0, 0}, rng);
  CHECK(t.extinction_index == 0);
  CHECK(t.states.size() == 1);
  t = chain_run(KernelKind::immigrant, 0, {StopRule::steps, 5, 0}, rng);
  CHECK(t.states.size() == 6);
  CHECK_THROWS_AS(chain_run(KernelKind::plain, 1, {StopRule::hit, 0, 3}, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(chain_run(KernelKind::immigrant, 1, {StopRule::extinct, 0, 0}, rng),
                  std::invalid_argument);
  t = chain_run(KernelKind::immigrant, 0, {StopRule::steps, 100, 0}, rng, 10);
  CHECK(t.censored);
}

TEST_CASE("hitting moments") {
  const auto one = hitting_moments(0, 1, 200'000, 5);
  CHECK(within(one.tau, 2.0, 4));
  CHECK(within(one.level, 2.0, 4));
  const auto a = hitting_moments(0, 10, 100'000, 6);
  CHECK(within(a.tau, kTau_k0_h10, 4));
  const auto b = hitting_moments(5, 40, 50'000, 7);
  CHECK(within(b.tau, kTau_k5_h40, 4));
  CHECK(within(b.level, kLevel_k5_h40, 4));
  CHECK(within(b.residual, 0.0, 4));
  CHECK(b.censored == 0);
}

TEST_CASE("ruin probabilities") {
  CHECK(within(ruin_probability(1, 2, 200'000, 8), 2.0 / 3.0, 4));
  CHECK(within(ruin_probability(3, 10, 100'000, 9), kRuin_m3_h10, 4));
  CHECK(ruin_probability(0, 10, 100, 9).mean == 1.0);
}

TEST_CASE("drift sum statistic against the linear-system value") {
  const auto s = lemma41_statistic(2, 10, 200'000, 10);
  CHECK(within(s.direct, kDriftSum_h10_k2, 4));
  CHECK(within(s.stopped_identity, kDriftSum_h10_k2, 4));
  const auto t = lemma41_statistic(185, 400, 50'000, 11);
  CHECK(t.direct.mean > 0.0);
  CHECK(within(t.direct, kDriftSum_h400_k185, 4));
  CHECK_THROWS_AS(lemma41_statistic(0, 4, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(lemma41_statistic(200, 400, 10, 1), std::invalid_argument);
}

TEST_CASE("exact kernel powers") {
  const auto one = kernel_power(KernelKind::immigrant, 0, 1, 200);
  for (int j = 0; j < 10; ++j) CHECK(one.masses[j] == doctest::Approx(std::ldexp(1.0, -(j + 1))));
  const auto two = kernel_power(KernelKind::immigrant, 0, 2, 400);
  CHECK(two.mean() == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(two.overflow < kOverflowTolerance);
  const auto dead = kernel_power(KernelKind::plain, 0, 7, 50);
  CHECK(dead.masses[0] == 1.0);

  CounterRng rng(SeedPair{12, 0});
  std::vector<double> z2;
  for (int r = 0; r < 200'000; ++r) {
    z2.push_back(static_cast<double>(
        chain_run(KernelKind::immigrant, 0, {StopRule::steps, 2, 0}, rng).final_state()));
  }
  CHECK(within(stats::estimate(z2), two.mean(), 4));
}

TEST_CASE("martingale expectations") {
  const auto a = martingale_checks(0, 1, 200);
  CHECK(std::abs(a.m) < 1e-12);
  CHECK(std::abs(a.m_prime) < 1e-12);
  const auto b = martingale_checks(3, 4, 200);
  CHECK(std::abs(b.m_prime + 9.0 / 4.0) < 1e-9);
  for (std::int64_t k = 0; k <= 5; ++k) {
    CHECK(std::abs(martingale_checks(k, 1, 100).m) < 1e-12);
  }
}

TEST_CASE("k window") {
  const auto w = k_window(400);
  REQUIRE(!w.empty());
  CHECK(w.front() == 181);
  CHECK(w.back() == 189);
  CHECK(k_window_midpoint(400) == 185);
  CHECK_FALSE(in_k_window(191, 400));
  // a = 16: both endpoints are integers, 4 and 6
  CHECK_FALSE(in_k_window(4, 16));
  CHECK_FALSE(in_k_window(6, 16));
  CHECK(in_k_window(5, 16));
  CHECK(in_k_window(4, 16, WindowConvention::closed));
  CHECK(in_k_window(6, 16, WindowConvention::closed));
  for (std::int64_t a = 16; a < 3000; a += 7) {
    for (auto k : k_window(a)) {
      const double x = static_cast<double>(a);
      REQUIRE(k > (x - 2 * std::sqrt(x)) / 2);
      REQUIRE(k < (x - std::sqrt(x)) / 2);
    }
  }
}

TEST_CASE("kernel bands") {
  for (std::int64_t h : {100, 1000, 10000}) {
    const auto b = kernel_bands(h);
    CAPTURE(h);
    CHECK(b.max_scaled <= 100.0);
    CHECK(b.antidiagonal_max_scaled <= 0.5);
    CHECK(b.min_scaled_near_diagonal >= 1e-2);
    CHECK(b.min_scaled >= 0.0);
  }
}

}  // TEST_SUITE
