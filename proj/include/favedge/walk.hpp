#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "favedge/offset_array.hpp"
#include "favedge/rng.hpp"

namespace favedge {

/// Closed integer interval [lo, hi].
struct Window {
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  std::int64_t width() const noexcept { return hi - lo + 1; }
  bool contains(std::int64_t y) const noexcept { return y >= lo && y <= hi; }
  friend bool operator==(const Window&, const Window&) = default;
};

struct WalkState {
  std::int64_t n = 0;
  std::int64_t position = 0;
  std::int64_t previous = 0;
};

/// Edge crossed by the jump prev -> cur; edge x joins sites x-1 and x.
/// Throws std::invalid_argument unless |cur - prev| == 1.
std::int64_t edge_of_step(std::int64_t prev, std::int64_t cur);

/// Upcrossing/downcrossing counts per site, edge local times, and the
/// argmax sets of edge local time and downcrossing count, all maintained
/// in O(1) amortised work per step.
class CrossingLedger {
 public:
  CrossingLedger();

  /// Lowest and highest visited site.
  std::int64_t lo() const noexcept { return lo_; }
  std::int64_t hi() const noexcept { return hi_; }

  std::int64_t up(std::int64_t x) const noexcept { return up_.get(x); }
  std::int64_t down(std::int64_t x) const noexcept { return down_.get(x); }
  std::int64_t edge_local(std::int64_t x) const noexcept {
    return edge_.get(x);
  }
  /// Site local time: number of arrivals at x up to now.
  std::int64_t visits(std::int64_t x) const noexcept { return up(x) + down(x); }

  std::int64_t max_edge_local() const noexcept { return max_edge_; }
  std::int64_t max_down() const noexcept { return max_down_; }

  /// Sorted favorite edges; empty before the first step.
  std::span<const std::int64_t> favorite_edges() const noexcept {
    return favorite_edges_;
  }
  /// Sorted favorite downcrossing sites among visited sites.
  std::span<const std::int64_t> favorite_down_sites() const noexcept {
    return favorite_down_;
  }

  bool is_favorite_edge(std::int64_t x) const noexcept {
    return max_edge_ > 0 && edge_local(x) == max_edge_;
  }
  bool is_favorite_down_site(std::int64_t x) const noexcept {
    return x >= lo_ && x <= hi_ && down(x) == max_down_;
  }

  /// Records the jump prev -> cur (|cur - prev| == 1, unchecked).
  void record(std::int64_t prev, std::int64_t cur);

 private:
  void extend_to(std::int64_t site);

  std::int64_t lo_ = 0;
  std::int64_t hi_ = 0;
  OffsetArray<std::int64_t> up_;
  OffsetArray<std::int64_t> down_;
  OffsetArray<std::int64_t> edge_;
  std::int64_t max_edge_ = 0;
  std::int64_t max_down_ = 0;
  std::vector<std::int64_t> favorite_edges_;
  std::vector<std::int64_t> favorite_down_;
};

/// Applies one +-1 step. Throws std::invalid_argument for other steps.
void advance(WalkState& state, CrossingLedger& ledger, int step);

/// min |x| over the favorite edges (Ũ(n)); nullopt before the first step.
std::optional<std::int64_t> min_abs_favorite_edge(const CrossingLedger& l);
/// min |x| over the favorite downcrossing sites (U(n)).
std::optional<std::int64_t> min_abs_favorite_down_site(const CrossingLedger& l);

/// True iff every favorite edge x has x-1 among the favorite downcrossing
/// sites.
bool audit_prop24(const CrossingLedger& ledger);

/// Checks, at edge x, the crossing balance
///   up(x) - down(x-1) = 1{0<x<=S} - 1{S<x<=0}
/// and the three expressions of edge local time in terms of crossings.
bool identities_hold_at(const CrossingLedger& ledger, std::int64_t position,
                        std::int64_t x);

/// Full sweep of identities_hold_at over every edge that can be nonzero.
std::int64_t count_identity_violations(const CrossingLedger& ledger,
                                       std::int64_t position);

/// Argmax sets recomputed by scanning the visited range.
std::vector<std::int64_t> brute_force_favorite_edges(const CrossingLedger& l);
std::vector<std::int64_t> brute_force_favorite_down_sites(
    const CrossingLedger& l);

struct WalkSnapshot {
  WalkState state;
  std::vector<std::int64_t> favorite_edges;
  std::vector<std::int64_t> favorite_down_sites;
  std::int64_t min_abs_favorite_edge = 0;       // Ũ(n)
  std::int64_t min_abs_favorite_down_site = 0;  // U(n)
};

WalkSnapshot take_snapshot(const WalkState& state, const CrossingLedger& l);

/// Runs the walk of `seeds` for n_steps and snapshots it at each probe
/// (sorted step indices in [1, n_steps]).
std::vector<WalkSnapshot> simulate(SeedPair seeds, std::int64_t n_steps,
                                   std::span<const std::int64_t> probes);

/// Same as simulate but driven by an explicit +-1 path.
std::vector<WalkSnapshot> simulate_path(std::span<const int> steps,
                                        std::span<const std::int64_t> probes);

/// Per-run audit tallies. The crossing identities can only change at the
/// edge touched by the current jump, so checking that edge at every step
/// (plus full sweeps at the probe times) verifies them at every step.
struct AuditReport {
  std::int64_t steps = 0;
  std::int64_t identity_checks = 0;
  std::int64_t identity_violations = 0;
  std::int64_t prop24_checks = 0;
  std::int64_t prop24_violations = 0;
  std::int64_t full_sweeps = 0;
  std::int64_t favorite_set_mismatches = 0;
};

/// Audited run: touched-edge identities and the favorite-edge /
/// favorite-downcrossing-site implication at every step, full identity
/// sweeps and brute-force argmax comparisons at `sweep_probes` random times.
AuditReport audited_run(SeedPair seeds, std::int64_t n_steps,
                        std::int64_t sweep_probes);

enum class CrossingKind { upcross, downcross };

struct StoppedProfile {
  std::int64_t target_site = 0;
  std::int64_t target_count = 1;
  CrossingKind kind = CrossingKind::upcross;
  Window window;
  std::optional<std::int64_t> stop_time;  // absent iff censored
  std::vector<std::int64_t> down_profile;  // down(y) for y in window
  bool censored = false;
  std::int64_t cap = 0;
  std::int64_t steps_used = 0;

  std::int64_t at(std::int64_t y) const {
    return down_profile.at(static_cast<std::size_t>(y - window.lo));
  }
};

inline constexpr std::int64_t kDefaultStopCap = 100'000'000;

/// Runs until the crossing count of `kind` at target_site reaches
/// target_count (an inverse local time) or `cap` steps, and returns the
/// downcrossing profile over `window` at that moment.
StoppedProfile stopped_run(SeedPair seeds, std::int64_t target_site,
                           std::int64_t target_count, CrossingKind kind,
                           Window window, std::int64_t cap = kDefaultStopCap);

}  // namespace favedge
