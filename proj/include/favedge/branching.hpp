#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "favedge/rng.hpp"
#include "favedge/stats.hpp"

namespace favedge::branching {

/// Transition laws of the critical geometric Galton-Watson chains:
/// plain pi(i,j), immigrant rho(i,j) = pi(i+1,j), and shifted immigrant
/// rho*(i,j) = pi(i,j-1).
enum class KernelKind { plain, immigrant, shifted_immigrant };

std::string_view to_string(KernelKind k);
KernelKind parse_kernel(std::string_view name);

/// pi(i,j) = 2^{-i-j} (i+j-1)! / ((i-1)! j!) for i > 0, delta_0(j) for i = 0.
/// Exact 64-bit binomial for i + j <= 60, log-gamma beyond.
double plain_kernel(std::int64_t i, std::int64_t j);
/// The two routes, exposed for the crossover check.
double plain_kernel_exact(std::int64_t i, std::int64_t j);
double plain_kernel_lgamma(std::int64_t i, std::int64_t j);

double kernel_eval(KernelKind kind, std::int64_t i, std::int64_t j);

/// Number of geometric offspring summed by one transition from i, and the
/// deterministic shift added afterwards.
struct Offspring {
  std::uint64_t parents = 0;
  std::int64_t shift = 0;
};
Offspring offspring_of(KernelKind kind, std::int64_t i) noexcept;

enum class Sampler { sum_of_geometrics, inverse_cdf };

/// One transition from state i. The default sums i (or i+1) Geometric(1/2)
/// variables; inverse_cdf walks the kernel row instead.
std::int64_t kernel_sample(KernelKind kind, std::int64_t i, CounterRng& rng,
                           Sampler sampler = Sampler::sum_of_geometrics);

enum class StopRule { steps, hit, extinct, hit_or_extinct };

struct StopCondition {
  StopRule rule = StopRule::steps;
  std::int64_t steps = 0;      // for StopRule::steps
  std::int64_t threshold = 0;  // first index with state >= threshold
};

inline constexpr std::int64_t kDefaultChainBudget = 10'000'000;

struct ChainTrajectory {
  KernelKind kind = KernelKind::plain;
  std::int64_t start = 0;
  std::vector<std::int64_t> states;
  std::optional<std::int64_t> hit_index;         // tau_h / sigma_h
  std::optional<std::int64_t> extinction_index;  // omega
  bool censored = false;

  std::int64_t final_state() const { return states.back(); }
};

/// Runs a chain from `start` until the stop rule fires or `budget`
/// transitions, in which case the trajectory is flagged censored.
/// Throws std::invalid_argument for a hit rule on a plain chain (not a.s.
/// finite) or an extinction rule on an immigrant chain (never fires).
ChainTrajectory chain_run(KernelKind kind, std::int64_t start,
                          StopCondition stop, CounterRng& rng,
                          std::int64_t budget = kDefaultChainBudget);

/// Marginal law after `steps` transitions on {0..cap}; `overflow` holds the
/// mass that left the truncated state space.
struct ExactPmf {
  std::vector<double> masses;
  double overflow = 0.0;
  std::int64_t steps = 0;
  std::int64_t start = 0;
  bool low_precision = false;

  double mean() const;
  double second_moment() const;
  double total() const;
};

inline constexpr double kOverflowTolerance = 1e-12;

ExactPmf kernel_power(KernelKind kind, std::int64_t start, std::int64_t steps,
                      std::int64_t cap);

/// Laws after 0, 1, ..., steps transitions.
std::vector<ExactPmf> kernel_power_sequence(KernelKind kind,
                                            std::int64_t start,
                                            std::int64_t steps,
                                            std::int64_t cap);

struct HittingMoments {
  stats::Estimate tau;        // first index with Z >= h
  stats::Estimate level;      // Z at that index
  stats::Estimate residual;   // tau - (Z_tau - k), paired per replica
  std::int64_t censored = 0;
};

/// Immigrant chain from k, stopped on first reaching [h, inf).
HittingMoments hitting_moments(std::int64_t k, std::int64_t h,
                               std::int64_t replicas,
                               std::uint64_t master_seed,
                               unsigned workers = 0);

/// P(plain chain from m hits 0 before reaching [h, inf)).
stats::Estimate ruin_probability(std::int64_t m, std::int64_t h,
                                 std::int64_t replicas,
                                 std::uint64_t master_seed,
                                 unsigned workers = 0);

struct Lemma41Estimate {
  /// Mean of sum_{n=1}^{tau} (h/2 - Z_n)/(h/2), tau the first index with
  /// Z_n >= (h-1)/2.
  stats::Estimate direct;
  /// Same expectation through the optional-stopping identity
  /// (2h - 1 - (Z_tau + Z_0)) (Z_tau - Z_0) / (2h).
  stats::Estimate stopped_identity;
};

/// Immigrant chain from Z_0 = k. Requires h > 4 and 0 <= k < (h-1)/2.
Lemma41Estimate lemma41_statistic(std::int64_t k, std::int64_t h,
                                  std::int64_t replicas,
                                  std::uint64_t master_seed,
                                  unsigned workers = 0);

struct MartingaleExpectations {
  /// E[sum_{s<=n}(Z_s - s) - n (Z_n - n)]; should be 0.
  double m = 0.0;
  /// E[-Z_n^2/4 + n Z_n - n^2/2 + n/4]; should be -k^2/4.
  double m_prime = 0.0;
  double overflow = 0.0;
  bool low_precision = false;
};

/// Exact expectations of the two immigrant-chain martingales at time n
/// from Z_0 = k, by propagating the marginal laws on {0..cap}.
MartingaleExpectations martingale_checks(std::int64_t k, std::int64_t n,
                                         std::int64_t cap);

/// Convention for the integer members of the window
/// K_a = ((a - 2 sqrt a)/2, (a - sqrt a)/2).
enum class WindowConvention { open, closed };

/// Exact integer test of k in K_a.
bool in_k_window(std::int64_t k, std::int64_t a,
                 WindowConvention c = WindowConvention::open);

/// Integer members of K_a in increasing order (possibly empty).
std::vector<std::int64_t> k_window(std::int64_t a,
                                   WindowConvention c = WindowConvention::open);

/// Integer nearest to the window midpoint (a - 1.5 sqrt a)/2, clamped into
/// the window. Throws std::invalid_argument if the window is empty.
std::int64_t k_window_midpoint(std::int64_t a,
                               WindowConvention c = WindowConvention::open);

/// Scaled kernel bands on the square |2i - h|, |2j - h| < 10 sqrt h and the
/// antidiagonal i + j = h.
struct KernelBands {
  std::int64_t h = 0;
  double min_scaled = 0.0;  // min sqrt(h) pi(i,j) on the square
  double max_scaled = 0.0;  // max sqrt(h) pi(i,j) on the square
  double antidiagonal_max_scaled = 0.0;
  /// Minimum restricted to |i - j| <= sqrt(2i), i.e. j within one standard
  /// deviation of the row mean.
  double min_scaled_near_diagonal = 0.0;
};
KernelBands kernel_bands(std::int64_t h);

/// Number of (j, i1, i2) with j < i1 < i2 <= max_i and
/// pi(i1, j) <= pi(i2, j).
std::int64_t monotonicity_violations(std::int64_t max_i);

/// |sum_j kernel(i, j) - 1| with the tail beyond the summed range added in
/// closed form from the negative binomial distribution.
double row_sum_error(KernelKind kind, std::int64_t i);

}  // namespace favedge::branching
