#include "favedge/event_counters.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "favedge/walk.hpp"

namespace favedge::events {

std::string_view to_string(EventKind k) {
  return k == EventKind::upcross ? "upcross" : "downcross";
}

std::int64_t PathCountReport::N_at(std::int64_t h) const {
  if (N.empty() || h < 0) return 0;
  return N[static_cast<std::size_t>(std::min<std::int64_t>(h, config.H))];
}

std::int64_t PathCountReport::Ntilde_at(std::int64_t h) const {
  if (Ntilde.empty() || h < 0) return 0;
  return Ntilde[static_cast<std::size_t>(std::min<std::int64_t>(h, config.H))];
}

namespace {

bool triple_at(const CrossingLedger& l, std::int64_t x) {
  const auto fav = l.favorite_edges();
  return fav.size() == 3 && fav[0] == x && fav[2] == x + 2;
}

class EventScanner {
 public:
  explicit EventScanner(const CountConfig& c) : cfg_(c) {
    if (c.H < 1 || c.h_min_N < 1 || c.h_min_tilde < 1) {
      throw std::invalid_argument("count_path_events: H and h minima must be >= 1");
    }
    lowest_h_ = std::min(c.h_min_N, c.h_min_tilde);
  }

  // Checks the state right after the jump prev -> cur at time n.
  template <class Emit>
  void check(const CrossingLedger& l, std::int64_t prev, std::int64_t cur,
             std::int64_t n, Emit&& emit) const {
    const std::int64_t top = l.max_edge_local();
    if ((top & 1) != 0 || top > 2 * cfg_.H) return;
    const std::int64_t h = top / 2;
    if (h < lowest_h_) return;
    if (cur > prev) {
      const std::int64_t x = cur + 1;
      if (x < 2 || h < cfg_.h_min_N || !triple_at(l, x)) return;
      const std::int64_t k = l.up(cur) - 1;
      if (!branching::in_k_window(k, 2 * h, cfg_.window)) return;
      emit(EventTriple{x, h, k, n, EventKind::upcross});
    } else {
      const std::int64_t x = prev;
      if (x < 2 || l.down(cur) != h || !triple_at(l, x)) return;
      emit(EventTriple{x, h, -1, n, EventKind::downcross});
    }
  }

 private:
  CountConfig cfg_;
  std::int64_t lowest_h_ = 1;
};

template <class NextStep>
PathCountReport run_counter(const CountConfig& cfg, NextStep&& next,
                            std::int64_t available) {
  EventScanner scan(cfg);
  PathCountReport rep;
  rep.config = cfg;
  const auto H = static_cast<std::size_t>(cfg.H);
  std::vector<std::int64_t> per_h_N(H + 1, 0), per_h_tilde(H + 1, 0);

  CrossingLedger ledger;
  std::int64_t pos = 0;
  std::int64_t n = 0;
  const std::int64_t limit = std::min(cfg.budget, available);
  auto record = [&](const EventTriple& e) {
    rep.events.push_back(e);
    const auto h = static_cast<std::size_t>(e.h);
    if (e.kind == EventKind::upcross) ++per_h_N[h];
    else if (e.h >= cfg.h_min_tilde) ++per_h_tilde[h];
  };
  bool stopped = false;
  while (n < limit) {
    const std::int64_t prev = pos;
    pos += next();
    ++n;
    ledger.record(prev, pos);
    const auto r = ledger.favorite_edges().size();
    const std::size_t bucket = std::min<std::size_t>(r, kSizeBuckets) - 1;
    ++rep.f[bucket];
    if (ledger.is_favorite_edge((prev + pos + 1) / 2)) ++rep.ftilde[bucket];
    scan.check(ledger, prev, pos, n, record);
    if (ledger.max_edge_local() > 2 * cfg.H) {
      stopped = true;
      break;
    }
  }
  rep.stop_time = n;
  rep.censored = !stopped;
  rep.stop_reason = stopped ? "max-edge-local"
                            : (n >= cfg.budget ? "budget" : "path-end");

  if (stopped && cfg.overrun_factor > 1) {
    const std::int64_t until =
        std::min(available, rep.stop_time * cfg.overrun_factor);
    auto late = [&](const EventTriple&) { ++rep.late_events; };
    while (n < until) {
      const std::int64_t prev = pos;
      pos += next();
      ++n;
      ledger.record(prev, pos);
      scan.check(ledger, prev, pos, n, late);
    }
  }

  rep.N.assign(H + 1, 0);
  rep.Ntilde.assign(H + 1, 0);
  for (std::size_t h = 1; h <= H; ++h) {
    rep.N[h] = rep.N[h - 1] + per_h_N[h];
    rep.Ntilde[h] = rep.Ntilde[h - 1] + per_h_tilde[h];
  }
  return rep;
}

}  // namespace

PathCountReport count_path_events(SeedPair seeds, const CountConfig& config) {
  StepGenerator gen(seeds);
  auto rep = run_counter(config, [&] { return gen.next(); },
                         std::numeric_limits<std::int64_t>::max());
  rep.seeds = seeds;
  return rep;
}

PathCountReport count_events_on_path(std::span<const int> steps,
                                     const CountConfig& config) {
  for (int s : steps) {
    if (s != 1 && s != -1) {
      throw std::invalid_argument("count_events_on_path: steps must be +-1");
    }
  }
  std::size_t i = 0;
  return run_counter(config, [&] { return steps[i++]; },
                     static_cast<std::int64_t>(steps.size()));
}

AuditSummary audit_containment_disjointness(const PathCountReport& r) {
  AuditSummary a;
  std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> down_time;
  std::map<std::int64_t, std::int64_t> up_per_h;
  for (const auto& e : r.events) {
    if (e.kind == EventKind::downcross) {
      ++a.downcross_events;
      down_time.emplace(std::pair{e.x, e.h}, e.time);
    }
  }
  for (const auto& e : r.events) {
    if (e.kind != EventKind::upcross) continue;
    ++a.upcross_events;
    ++up_per_h[e.h];
    const auto it = down_time.find({e.x, e.h});
    if (it == down_time.end() || it->second >= e.time) {
      a.containment_violations.push_back(e);
    }
  }
  for (auto [h, c] : up_per_h) {
    if (c > 1) a.disjointness_violations.push_back(h);
  }
  for (std::size_t h = 0; h < r.N.size(); ++h) {
    if (r.N[h] > r.Ntilde[h]) a.order_violations.push_back(static_cast<std::int64_t>(h));
    if (h > 0 && (r.N[h] < r.N[h - 1] || r.Ntilde[h] < r.Ntilde[h - 1])) {
      ++a.monotonicity_violations;
    }
  }
  a.f3_below_N = !r.N.empty() && r.f[2] < r.N.back();
  return a;
}

namespace {

template <class NextStep>
std::array<std::int64_t, kSizeBuckets> tally_down_sites(NextStep&& next,
                                                        std::int64_t horizon) {
  std::array<std::int64_t, kSizeBuckets> t{};
  CrossingLedger ledger;
  std::int64_t pos = 0;
  for (std::int64_t n = 1; n <= horizon; ++n) {
    const std::int64_t prev = pos;
    pos += next();
    ledger.record(prev, pos);
    const auto r = ledger.favorite_down_sites().size();
    ++t[std::min<std::size_t>(r, kSizeBuckets) - 1];
  }
  return t;
}

}  // namespace

std::array<std::int64_t, kSizeBuckets> downcross_site_tallies(
    SeedPair seeds, std::int64_t horizon) {
  if (horizon < 1) throw std::invalid_argument("downcross_site_tallies: horizon must be >= 1");
  StepGenerator gen(seeds);
  return tally_down_sites([&] { return gen.next(); }, horizon);
}

std::array<std::int64_t, kSizeBuckets> downcross_site_tallies_path(
    std::span<const int> steps) {
  std::size_t i = 0;
  for (int s : steps) {
    if (s != 1 && s != -1) throw std::invalid_argument("steps must be +-1");
  }
  return tally_down_sites([&] { return steps[i++]; },
                          static_cast<std::int64_t>(steps.size()));
}

namespace {

nlohmann::json buckets(const std::array<std::int64_t, kSizeBuckets>& b) {
  return {{"1", b[0]}, {"2", b[1]}, {"3", b[2]}, {"4+", b[3]}};
}

}  // namespace

nlohmann::json to_json(const PathCountReport& r) {
  nlohmann::json ev = nlohmann::json::array();
  for (const auto& e : r.events) {
    nlohmann::json j = {{"x", e.x}, {"h", e.h}, {"time", e.time},
                        {"kind", std::string(to_string(e.kind))}};
    if (e.kind == EventKind::upcross) j["k"] = e.k;
    ev.push_back(std::move(j));
  }
  return {{"seed", r.seeds.master_seed},
          {"stream", r.seeds.stream_index},
          {"H", r.config.H},
          {"stop_time", r.stop_time},
          {"stop_reason", r.stop_reason},
          {"censored", r.censored},
          {"N", r.N},
          {"Ntilde", r.Ntilde},
          {"f", buckets(r.f)},
          {"ftilde", buckets(r.ftilde)},
          {"events", ev},
          {"late_events", r.late_events}};
}

}  // namespace favedge::events
