#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "favedge/rng.hpp"
#include "favedge/stats.hpp"
#include "favedge/walk.hpp"

namespace favedge::rayknight {

/// How the chains are joined around the origin.
///
/// corrected: the law of xi_D(., T_U(x, k+1)) by first-step analysis. For
/// x >= 1 the immigrant chain runs from the seam k at y = x-1 down to
/// y = -1 and the plain chain continues below from there; for x <= 0 the
/// seam value at y = x-1 is k+1.
///
/// literal: the immigrant chain stops at y = 0 and seeds the plain chain
/// there (x >= 1), and the seam value is k for x <= 0. Kept for comparison;
/// it does not match the walk on the negative half-line.
enum class OriginSeam { corrected, literal };

enum class Regime { right, left };

/// Right regime for x >= 1, left for x <= 0 (x is the patch parameter,
/// one less than the walk's external x).
Regime regime_of(std::int64_t x) noexcept;

struct PatchedProfile {
  std::int64_t x = 0;
  std::int64_t k = 0;
  Regime regime = Regime::right;
  OriginSeam seam = OriginSeam::corrected;
  Window window;
  std::vector<std::int64_t> values;

  std::int64_t at(std::int64_t y) const {
    return values.at(static_cast<std::size_t>(y - window.lo));
  }
};

/// Largest window width accepted by the samplers.
inline constexpr std::int64_t kMaxWindowWidth = 1'000'000;

/// One draw of Delta_x^(k) restricted to `window`. Chains are generated
/// outward from the seam at y = x-1, so only the dependence through the
/// seam and the origin is introduced. Throws std::invalid_argument for
/// k < 0 or an empty or oversized window.
PatchedProfile sample_patched_profile(
    std::int64_t x, std::int64_t k, Window window, CounterRng& rng,
    OriginSeam seam = OriginSeam::corrected);

/// xi_D(., T_U(external_x - 1, k+1)) over `window`, censored at `cap`.
StoppedProfile walk_profile_sampler(std::int64_t external_x, std::int64_t k,
                                    Window window, std::int64_t cap,
                                    SeedPair seeds);

struct CompareConfig {
  std::int64_t external_x = 3;
  std::int64_t k = 0;
  Window window{0, 0};
  std::int64_t replicas = 10'000;
  std::int64_t cap = kDefaultStopCap;
  std::uint64_t master_seed = 1;
  unsigned workers = 0;
  OriginSeam seam = OriginSeam::corrected;
  /// Feed the chain sampler to both sides (null calibration).
  bool null_check = false;
};

struct CoordinateComparison {
  std::int64_t y = 0;
  std::vector<std::int64_t> walk_counts;   // index = value
  std::vector<std::int64_t> chain_counts;
  stats::ChiSquareResult chi_square;
  double p_bonferroni = 1.0;
  double tv = 0.0;
};

struct CompareReport {
  CompareConfig config;
  std::int64_t walk_samples = 0;   // uncensored
  std::int64_t chain_samples = 0;
  std::int64_t walk_censored = 0;
  double censor_rate = 0.0;
  std::vector<CoordinateComparison> coordinates;
  /// Joint test on sum_y min(value, 2) 3^(y - lo); windows of width <= 8.
  std::optional<stats::ChiSquareResult> fingerprint;
  double min_p_bonferroni = 1.0;
  double max_tv = 0.0;
  /// Walk-side censor rate above kMaxCensorRate.
  bool invalid = false;

  const CoordinateComparison& at(std::int64_t y) const;
};

inline constexpr double kMaxCensorRate = 0.05;
inline constexpr std::int64_t kMaxFingerprintWidth = 8;

/// Walk side uses streams (master_seed, r); chain side uses a seed derived
/// from master_seed so the two samples are independent.
CompareReport distribution_compare(const CompareConfig& config);

std::uint64_t chain_side_seed(std::uint64_t master_seed) noexcept;

std::string_view to_string(OriginSeam s);
OriginSeam parse_seam(std::string_view name);

nlohmann::json to_json(const CompareReport& report);

}  // namespace favedge::rayknight
