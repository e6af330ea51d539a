#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "favedge/branching.hpp"
#include "favedge/rng.hpp"

namespace favedge::events {

enum class EventKind { upcross, downcross };

/// One triple-favorite event. Upcross events fire at T_U(x-1, k+1) with
/// K = {x, x+1, x+2}, L(x) = 2h and k in the window K_2h; downcross events
/// fire at T_D(x-1, h) with K = {x, x+1, x+2} and L(x) = 2h (k = -1).
struct EventTriple {
  std::int64_t x = 0;
  std::int64_t h = 0;
  std::int64_t k = -1;
  std::int64_t time = 0;
  EventKind kind = EventKind::upcross;
};

struct CountConfig {
  std::int64_t H = 200;
  std::int64_t h_min_N = 8;
  std::int64_t h_min_tilde = 50;
  branching::WindowConvention window = branching::WindowConvention::open;
  /// Hard step budget; reaching it marks the report censored.
  std::int64_t budget = 2'000'000'000;
  /// After the stop, keep walking until overrun_factor * stop_time and
  /// count events with h <= H that would have been missed (should be 0).
  std::int64_t overrun_factor = 0;
};

/// Bucket of r in {1, 2, 3, 4+}.
inline constexpr int kSizeBuckets = 4;

struct PathCountReport {
  SeedPair seeds;
  CountConfig config;
  std::int64_t stop_time = 0;
  std::string stop_reason;  // "max-edge-local" or "budget"
  bool censored = false;
  /// N[H'] and Ntilde[H'] for H' = 0..H (cumulative in H').
  std::vector<std::int64_t> N;
  std::vector<std::int64_t> Ntilde;
  /// f(r) and f~(r) over 1 <= n <= stop_time, r = 1, 2, 3, 4+.
  std::array<std::int64_t, kSizeBuckets> f{};
  std::array<std::int64_t, kSizeBuckets> ftilde{};
  std::vector<EventTriple> events;
  std::int64_t late_events = 0;

  std::int64_t N_at(std::int64_t h) const;
  std::int64_t Ntilde_at(std::int64_t h) const;
};

/// Runs one walk until the maximal edge local time exceeds 2H. Both event
/// kinds need that maximum to equal 2h <= 2H and it never decreases, so no
/// event with h <= H can happen afterwards.
PathCountReport count_path_events(SeedPair seeds, const CountConfig& config);

/// Same rules on an explicit +-1 path; if the path ends first the report
/// is censored with stop reason "path-end".
PathCountReport count_events_on_path(std::span<const int> steps,
                                     const CountConfig& config);

struct AuditSummary {
  std::int64_t upcross_events = 0;
  std::int64_t downcross_events = 0;
  /// Upcross events without a downcross event at the same (x, h) earlier.
  std::vector<EventTriple> containment_violations;
  /// Values of h for which more than one upcross event fired.
  std::vector<std::int64_t> disjointness_violations;
  /// H' with N[H'] > Ntilde[H'].
  std::vector<std::int64_t> order_violations;
  /// H' with N[H'] < N[H'-1] or Ntilde[H'] < Ntilde[H'-1].
  std::int64_t monotonicity_violations = 0;
  /// f(3) < N[H].
  bool f3_below_N = false;
};

AuditSummary audit_containment_disjointness(const PathCountReport& report);

/// Number of 1 <= n <= horizon with #U(n) = r, r = 1, 2, 3, 4+.
std::array<std::int64_t, kSizeBuckets> downcross_site_tallies(
    SeedPair seeds, std::int64_t horizon);
std::array<std::int64_t, kSizeBuckets> downcross_site_tallies_path(
    std::span<const int> steps);

std::string_view to_string(EventKind k);

/// One JSON line per path.
nlohmann::json to_json(const PathCountReport& r);

}  // namespace favedge::events
