#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace favedge::oracle {

/// Statistics available from exhaustive path enumeration at horizon n.
enum class Statistic {
  favorite_edge_count,       // #K(n)
  favorite_down_site_count,  // #U(n)
  min_abs_favorite_edge,     // Ũ(n)
  three_favorite_times,      // #{1 <= m <= n : #K(m) = 3}
  identity_violations,       // edges where the crossing balance fails
};

std::string_view to_string(Statistic s);
/// Parses the CLI names (favorites, down-favorites, min-abs-favorite,
/// f3-count, identity-violations). Throws std::invalid_argument.
Statistic parse_statistic(std::string_view name);

/// Exact pmf with masses numerator / 2^denominator_log2.
struct ExactDistribution {
  std::string statistic;
  int n = 0;
  std::vector<std::int64_t> support;
  std::vector<std::uint64_t> numerators;
  int denominator_log2 = 0;

  /// Numerator of P(value); 0 if value is off the support.
  std::uint64_t numerator_of(std::int64_t value) const;
  double mass(std::int64_t value) const;
};

inline constexpr int kMaxEnumerationHorizon = 24;

/// Enumerates all 2^n paths. Work is split by path prefix over `workers`
/// threads (0 = hardware concurrency); partial histograms add up exactly.
/// Throws std::invalid_argument for n < 1 or n > 24.
ExactDistribution enumerate(int n, Statistic stat, unsigned workers = 0);

void to_json(nlohmann::json& j, const ExactDistribution& d);
void from_json(const nlohmann::json& j, ExactDistribution& d);

/// Closed-form law of the downcrossing count at y when the walk first
/// upcrosses site x-1 (k = 0), obtained by first-step analysis:
/// P(value = m) = (1 - r) r^m, with r = 0 a point mass at zero.
struct StoppedPmf {
  int x = 0;
  int k = 0;
  int y = 0;
  double ratio = 0.0;

  double mass(std::int64_t m) const;
  std::vector<double> masses(std::int64_t max_value) const;
};

/// Supported: x in {2, 3}, k = 0, y >= -1. Throws std::invalid_argument
/// otherwise.
StoppedPmf exact_stopped_pmf(int x, int k, int y);

}  // namespace favedge::oracle
