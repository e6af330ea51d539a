#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "favedge/rng.hpp"
#include "favedge/stats.hpp"
#include "favedge/walk.hpp"

namespace favedge::embedding {

/// Wiener proxy: a fine walk with spatial step 1/m and time step 1/m^2.
/// The embedded walk S_k = W(tau_k) records each exit from (S_{k-1} - 1,
/// S_{k-1} + 1). Local times at integer x are read from crossings of the
/// two fine edges next to x: eta = (right + left)/(2m), and the one-side
/// local time eta_R = right/(2m).
struct EmbeddingOptions {
  int m = 64;
  std::int64_t coarse_steps = 1'000'000;
  /// Sorted coarse indices n at which D(n) is measured, both at the
  /// coupled time tau_n and at time n.
  std::vector<std::int64_t> n_grid;
  /// Sorted integer times t at which the local time profiles are captured.
  std::vector<std::int64_t> eta_times;
  Window eta_window{-3, 3};
  bool keep_increments = true;
};

inline constexpr int kMinResolution = 8;
inline constexpr int kMaxResolution = 256;

struct DiscrepancyPoint {
  std::int64_t n = 0;
  /// sup_x |xi_D(x, n) - eta_R(x, tau_n)|
  double coupled = 0.0;
  /// sup_x |xi_D(x, n) - eta_R(x, n)|
  double at_time = 0.0;
};

struct EtaSnapshot {
  std::int64_t t = 0;
  Window window;
  std::vector<double> eta;
  std::vector<double> eta_right;

  double eta_at(std::int64_t x) const {
    return eta.at(static_cast<std::size_t>(x - window.lo));
  }
  double eta_right_at(std::int64_t x) const {
    return eta_right.at(static_cast<std::size_t>(x - window.lo));
  }
};

struct EmbeddingTrace {
  SeedPair seeds;
  int m = 0;
  std::int64_t coarse_steps = 0;
  std::int64_t fine_steps = 0;
  std::vector<std::int8_t> increments;  // S_k - S_{k-1}
  stats::Estimate tau;                  // tau_k - tau_{k-1}, in time units
  double sigma2 = 0.0;                  // sample variance of the same
  std::vector<DiscrepancyPoint> discrepancy;
  std::vector<EtaSnapshot> eta;
};

/// Throws std::invalid_argument for m outside [8, 256], an unsorted grid
/// or grid points beyond coarse_steps.
EmbeddingTrace simulate_embedding(SeedPair seeds, const EmbeddingOptions& opt);

enum class DiscrepancyVariant { coupled, at_time };

struct Curve {
  std::vector<std::int64_t> n;
  std::vector<double> value;
  /// log-log fit over the points with positive value (needs >= 3).
  std::optional<stats::FitResult> fit;
};

Curve discrepancy_curve(const EmbeddingTrace& trace, DiscrepancyVariant v);

/// Pointwise median across seeds (same n grid), then the log-log fit.
Curve median_curve(const std::vector<Curve>& curves);

struct NeighborGapResult {
  std::vector<std::int64_t> n;
  /// sup_x |xi_D(x+1, n) - xi_D(x, n)| per seed, indexed [seed][grid].
  std::vector<std::vector<double>> sup_gap;
  Curve median_gap;
  /// Mean over seeds of |xi_D(1,n) - xi_D(0,n)|^4 / n^1.1, per grid point.
  std::vector<stats::Estimate> fourth_moment_ratio;
  /// log-log slope of the fourth-moment ratio over the top decade.
  std::optional<stats::FitResult> fourth_moment_trend;
};

NeighborGapResult neighbor_gap_curve(std::uint64_t master_seed,
                                     std::int64_t seeds,
                                     std::vector<std::int64_t> n_grid,
                                     unsigned workers = 0);

struct BlockDistribution {
  /// pmf of M_0(0,1) = xi_D(1, alpha_1); last entry collects the tail.
  std::vector<std::int64_t> counts;
  std::int64_t samples = 0;
  std::int64_t censored = 0;
  double censor_rate = 0.0;
  bool flagged = false;  // censor rate above 1%
  stats::Estimate p01;   // P(M_0(0,1) != 0)
  stats::Estimate p10;   // P(M_1(1,0) != 0)
  stats::Estimate mean;  // E xi_D(1, alpha_1)

  std::vector<double> pmf() const;
};

inline constexpr std::int64_t kBlockCap = 10'000'000;
inline constexpr std::int64_t kBlockMaxValue = 30;

/// Each replica walks until alpha_1 (first 1 -> 0 step) and until the
/// first block between consecutive downcrossings into 1 is complete.
BlockDistribution block_distribution(std::uint64_t master_seed,
                                     std::int64_t replicas,
                                     std::int64_t cap = kBlockCap,
                                     unsigned workers = 0);

/// Exact law of M_0(0,1): 1/2 at 0 and 2^-(k+1) for k >= 1.
double block_pmf(std::int64_t k);

/// xi*(n) / sqrt(2 n log log n), one value per seed, where xi* is the
/// largest site local time.
std::vector<double> kesten_ratios(std::uint64_t master_seed,
                                  std::int64_t seeds, std::int64_t n,
                                  unsigned workers = 0);

}  // namespace favedge::embedding
