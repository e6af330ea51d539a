#include "favedge/walk.hpp"

#include <algorithm>
#include <cassert>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace favedge {

std::int64_t edge_of_step(std::int64_t prev, std::int64_t cur) {
  if (cur - prev != 1 && prev - cur != 1) {
    throw std::invalid_argument("edge_of_step: |cur - prev| must be 1, got " +
                                std::to_string(prev) + " -> " +
                                std::to_string(cur));
  }
  // prev + cur is odd, so the division is exact.
  return (prev + cur + 1) / 2;
}

CrossingLedger::CrossingLedger() { favorite_down_.push_back(0); }

void CrossingLedger::extend_to(std::int64_t site) {
  if (site < lo_) {
    lo_ = site;
    if (max_down_ == 0) favorite_down_.insert(favorite_down_.begin(), site);
  } else if (site > hi_) {
    hi_ = site;
    if (max_down_ == 0) favorite_down_.push_back(site);
  }
}

namespace {

void insert_sorted(std::vector<std::int64_t>& v, std::int64_t x) {
  v.insert(std::lower_bound(v.begin(), v.end(), x), x);
}

}  // namespace

void CrossingLedger::record(std::int64_t prev, std::int64_t cur) {
  if (cur < lo_ || cur > hi_) extend_to(cur);
  const std::int64_t e = (prev + cur + 1) / 2;
  if (cur > prev) {
    ++up_[cur];
  } else {
    const std::int64_t d = ++down_[cur];
    if (d > max_down_) {
      max_down_ = d;
      favorite_down_.assign(1, cur);
    } else if (d == max_down_) {
      insert_sorted(favorite_down_, cur);
    }
  }
  const std::int64_t l = ++edge_[e];
  if (l > max_edge_) {
    max_edge_ = l;
    favorite_edges_.assign(1, e);
  } else if (l == max_edge_) {
    insert_sorted(favorite_edges_, e);
  }
}

void advance(WalkState& state, CrossingLedger& ledger, int step) {
  if (step != 1 && step != -1) {
    throw std::invalid_argument("advance: step must be +1 or -1, got " +
                                std::to_string(step));
  }
  state.previous = state.position;
  state.position += step;
  ++state.n;
  ledger.record(state.previous, state.position);
  assert(identities_hold_at(ledger, state.position,
                            (state.previous + state.position + 1) / 2));
}

namespace {

std::optional<std::int64_t> min_abs(std::span<const std::int64_t> xs) {
  if (xs.empty()) return std::nullopt;
  std::int64_t best = std::llabs(xs.front());
  for (auto x : xs) best = std::min<std::int64_t>(best, std::llabs(x));
  return best;
}

}  // namespace

std::optional<std::int64_t> min_abs_favorite_edge(const CrossingLedger& l) {
  return min_abs(l.favorite_edges());
}

std::optional<std::int64_t> min_abs_favorite_down_site(
    const CrossingLedger& l) {
  return min_abs(l.favorite_down_sites());
}

bool audit_prop24(const CrossingLedger& ledger) {
  for (auto x : ledger.favorite_edges()) {
    if (!ledger.is_favorite_down_site(x - 1)) return false;
  }
  return true;
}

bool identities_hold_at(const CrossingLedger& ledger, std::int64_t position,
                        std::int64_t x) {
  const std::int64_t u = ledger.up(x);
  const std::int64_t d = ledger.down(x - 1);
  const std::int64_t l = ledger.edge_local(x);
  const std::int64_t pos = (0 < x && x <= position) ? 1 : 0;
  const std::int64_t neg = (position < x && x <= 0) ? 1 : 0;
  return u - d == pos - neg && l == u + d && l == 2 * u + neg - pos &&
         l == 2 * d + pos - neg;
}

std::int64_t count_identity_violations(const CrossingLedger& ledger,
                                       std::int64_t position) {
  std::int64_t bad = 0;
  for (std::int64_t x = ledger.lo() - 1; x <= ledger.hi() + 1; ++x) {
    if (!identities_hold_at(ledger, position, x)) ++bad;
  }
  return bad;
}

std::vector<std::int64_t> brute_force_favorite_edges(const CrossingLedger& l) {
  std::vector<std::int64_t> out;
  std::int64_t best = 0;
  for (std::int64_t x = l.lo() + 1; x <= l.hi(); ++x) {
    const auto v = l.edge_local(x);
    if (v > best) {
      best = v;
      out.assign(1, x);
    } else if (v == best && best > 0) {
      out.push_back(x);
    }
  }
  return out;
}

std::vector<std::int64_t> brute_force_favorite_down_sites(
    const CrossingLedger& l) {
  std::vector<std::int64_t> out;
  std::int64_t best = -1;
  for (std::int64_t x = l.lo(); x <= l.hi(); ++x) {
    const auto v = l.down(x);
    if (v > best) {
      best = v;
      out.assign(1, x);
    } else if (v == best) {
      out.push_back(x);
    }
  }
  return out;
}

WalkSnapshot take_snapshot(const WalkState& state, const CrossingLedger& l) {
  WalkSnapshot s;
  s.state = state;
  s.favorite_edges.assign(l.favorite_edges().begin(), l.favorite_edges().end());
  s.favorite_down_sites.assign(l.favorite_down_sites().begin(),
                               l.favorite_down_sites().end());
  s.min_abs_favorite_edge = min_abs_favorite_edge(l).value_or(0);
  s.min_abs_favorite_down_site = min_abs_favorite_down_site(l).value_or(0);
  return s;
}

namespace {

template <class NextStep>
std::vector<WalkSnapshot> run_with_probes(std::int64_t n_steps,
                                          std::span<const std::int64_t> probes,
                                          NextStep&& next) {
  if (!std::is_sorted(probes.begin(), probes.end())) {
    throw std::invalid_argument("simulate: probes must be sorted");
  }
  std::vector<WalkSnapshot> out;
  out.reserve(probes.size());
  WalkState state;
  CrossingLedger ledger;
  auto probe = probes.begin();
  while (probe != probes.end() && *probe <= 0) {
    out.push_back(take_snapshot(state, ledger));
    ++probe;
  }
  for (std::int64_t i = 1; i <= n_steps && probe != probes.end(); ++i) {
    advance(state, ledger, next());
    while (probe != probes.end() && *probe == i) {
      out.push_back(take_snapshot(state, ledger));
      ++probe;
    }
  }
  return out;
}

}  // namespace

std::vector<WalkSnapshot> simulate(SeedPair seeds, std::int64_t n_steps,
                                   std::span<const std::int64_t> probes) {
  if (n_steps < 1) throw std::invalid_argument("simulate: n_steps must be >= 1");
  StepGenerator gen(seeds);
  return run_with_probes(n_steps, probes, [&] { return gen.next(); });
}

std::vector<WalkSnapshot> simulate_path(std::span<const int> steps,
                                        std::span<const std::int64_t> probes) {
  std::size_t i = 0;
  return run_with_probes(static_cast<std::int64_t>(steps.size()), probes,
                         [&] { return steps[i++]; });
}

AuditReport audited_run(SeedPair seeds, std::int64_t n_steps,
                        std::int64_t sweep_probes) {
  AuditReport rep;
  std::vector<std::int64_t> probes;
  CounterRng probe_rng(SeedPair{mix64(seeds.master_seed ^ 0x5bd1e995u),
                                seeds.stream_index});
  for (std::int64_t i = 0; i < sweep_probes; ++i) {
    probes.push_back(1 + static_cast<std::int64_t>(
                             probe_rng() % static_cast<std::uint64_t>(n_steps)));
  }
  std::sort(probes.begin(), probes.end());

  StepGenerator gen(seeds);
  WalkState state;
  CrossingLedger ledger;
  auto probe = probes.begin();
  for (std::int64_t i = 1; i <= n_steps; ++i) {
    advance(state, ledger, gen.next());
    ++rep.steps;
    const std::int64_t e = (state.previous + state.position + 1) / 2;
    ++rep.identity_checks;
    if (!identities_hold_at(ledger, state.position, e)) {
      ++rep.identity_violations;
    }
    ++rep.prop24_checks;
    if (!audit_prop24(ledger)) ++rep.prop24_violations;
    bool swept = false;
    while (probe != probes.end() && *probe == i) {
      ++probe;
      if (swept) continue;
      swept = true;
      ++rep.full_sweeps;
      rep.identity_violations +=
          count_identity_violations(ledger, state.position);
      const auto fe = brute_force_favorite_edges(ledger);
      const auto fd = brute_force_favorite_down_sites(ledger);
      if (!std::equal(fe.begin(), fe.end(), ledger.favorite_edges().begin(),
                      ledger.favorite_edges().end()) ||
          !std::equal(fd.begin(), fd.end(),
                      ledger.favorite_down_sites().begin(),
                      ledger.favorite_down_sites().end())) {
        ++rep.favorite_set_mismatches;
      }
    }
  }
  return rep;
}

StoppedProfile stopped_run(SeedPair seeds, std::int64_t target_site,
                           std::int64_t target_count, CrossingKind kind,
                           Window window, std::int64_t cap) {
  if (target_count < 1) {
    throw std::invalid_argument("stopped_run: target_count must be >= 1");
  }
  if (cap < 1) throw std::invalid_argument("stopped_run: cap must be >= 1");
  if (window.hi < window.lo) {
    throw std::invalid_argument("stopped_run: empty window");
  }

  StoppedProfile out;
  out.target_site = target_site;
  out.target_count = target_count;
  out.kind = kind;
  out.window = window;
  out.cap = cap;

  OffsetArray<std::int64_t> down;
  CounterRng rng(seeds);
  std::int64_t pos = 0;
  std::int64_t n = 0;
  std::int64_t count = 0;
  const bool want_up = kind == CrossingKind::upcross;
  bool stopped = false;
  while (n < cap && !stopped) {
    // A word moves the walk at most 64 sites, so the storage is grown once
    // per word and the inner loop runs branch-free on raw memory.
    down[pos - 65];
    down[pos + 65];
    std::int64_t* const d = &down.at_unchecked(0);
    const std::uint64_t w = rng();
    const std::int64_t lim = std::min<std::int64_t>(64, cap - n);
    for (std::int64_t b = 0; b < lim; ++b) {
      const auto bit = static_cast<std::int64_t>((w >> b) & 1u);
      pos += 2 * bit - 1;
      d[pos] += 1 - bit;
      const std::int64_t hit =
          (want_up ? bit : 1 - bit) & static_cast<std::int64_t>(pos == target_site);
      if (hit && ++count == target_count) {
        n += b + 1;
        stopped = true;
        break;
      }
    }
    if (!stopped) n += lim;
  }
  out.steps_used = n;
  out.censored = !stopped;
  if (stopped) out.stop_time = n;
  out.down_profile.reserve(static_cast<std::size_t>(window.width()));
  for (std::int64_t y = window.lo; y <= window.hi; ++y) {
    out.down_profile.push_back(down.get(y));
  }
  return out;
}

}  // namespace favedge
