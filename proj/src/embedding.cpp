#include "favedge/embedding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "favedge/offset_array.hpp"
#include "favedge/parallel.hpp"

namespace favedge::embedding {

namespace {

// Effect of up to 8 fine steps from relative position p in (-m, m).
struct Cell {
  std::int16_t p = 0;
  std::uint8_t right = 0;  // crossings of the fine edge (0, 1)
  std::uint8_t left = 0;   // crossings of the fine edge (-1, 0)
  std::uint8_t bits = 0;
  std::int8_t exit = 0;
};

class FineTable {
 public:
  explicit FineTable(int m) : m_(m), cells_(static_cast<std::size_t>(2 * m - 1) * 256) {
    for (int p = -m + 1; p <= m - 1; ++p) {
      for (unsigned b = 0; b < 256; ++b) {
        Cell c;
        int q = p;
        for (unsigned i = 0; i < 8; ++i) {
          const int nq = q + (((b >> i) & 1u) ? 1 : -1);
          if ((q == 0 && nq == 1) || (q == 1 && nq == 0)) ++c.right;
          if ((q == 0 && nq == -1) || (q == -1 && nq == 0)) ++c.left;
          q = nq;
          c.bits = static_cast<std::uint8_t>(i + 1);
          if (q == m || q == -m) {
            c.exit = static_cast<std::int8_t>(q > 0 ? 1 : -1);
            break;
          }
        }
        c.p = static_cast<std::int16_t>(q);
        cells_[index(p, b)] = c;
      }
    }
  }

  const Cell& at(int p, unsigned byte) const noexcept {
    return cells_[index(p, byte)];
  }

 private:
  std::size_t index(int p, unsigned b) const noexcept {
    return static_cast<std::size_t>(p + m_ - 1) * 256 + b;
  }
  int m_;
  std::vector<Cell> cells_;
};

struct Profile {
  std::int64_t lo = 0;
  std::vector<double> values;

  double at(std::int64_t x) const {
    const std::int64_t i = x - lo;
    if (i < 0 || i >= static_cast<std::int64_t>(values.size())) return 0.0;
    return values[static_cast<std::size_t>(i)];
  }
  std::int64_t hi() const { return lo + static_cast<std::int64_t>(values.size()) - 1; }
};

double sup_difference(const Profile& a, const Profile& b) {
  const std::int64_t lo = std::min(a.lo, b.lo);
  const std::int64_t hi = std::max(a.hi(), b.hi());
  double d = 0.0;
  for (std::int64_t x = lo; x <= hi; ++x) d = std::max(d, std::abs(a.at(x) - b.at(x)));
  return d;
}

void require_sorted(const std::vector<std::int64_t>& v, const char* what) {
  if (!std::is_sorted(v.begin(), v.end())) {
    throw std::invalid_argument(std::string("simulate_embedding: unsorted ") + what);
  }
}

}  // namespace

EmbeddingTrace simulate_embedding(SeedPair seeds, const EmbeddingOptions& opt) {
  const int m = opt.m;
  if (m < kMinResolution || m > kMaxResolution) {
    throw std::invalid_argument("simulate_embedding: m must be in [8, 256]");
  }
  if (opt.coarse_steps < 1) {
    throw std::invalid_argument("simulate_embedding: coarse_steps must be >= 1");
  }
  require_sorted(opt.n_grid, "n_grid");
  require_sorted(opt.eta_times, "eta_times");
  if (!opt.n_grid.empty() &&
      (opt.n_grid.front() < 1 || opt.n_grid.back() > opt.coarse_steps)) {
    throw std::invalid_argument("simulate_embedding: n_grid outside [1, coarse_steps]");
  }
  if (!opt.eta_times.empty() && opt.eta_times.front() < 1) {
    throw std::invalid_argument("simulate_embedding: eta_times must be >= 1");
  }

  const FineTable table(m);
  const std::int64_t m2 = static_cast<std::int64_t>(m) * m;
  const double two_m = 2.0 * m;

  EmbeddingTrace tr;
  tr.seeds = seeds;
  tr.m = m;
  tr.discrepancy.resize(opt.n_grid.size());
  for (std::size_t i = 0; i < opt.n_grid.size(); ++i) tr.discrepancy[i].n = opt.n_grid[i];
  if (opt.keep_increments) tr.increments.reserve(static_cast<std::size_t>(opt.coarse_steps));

  // Fine-time targets: (fine step, kind, index); kind 0 = discrepancy at
  // time n, kind 1 = local time snapshot.
  struct Target {
    std::int64_t fine;
    int kind;
    std::size_t index;
  };
  std::vector<Target> targets;
  for (std::size_t i = 0; i < opt.n_grid.size(); ++i) {
    targets.push_back({opt.n_grid[i] * m2, 0, i});
  }
  for (std::size_t i = 0; i < opt.eta_times.size(); ++i) {
    targets.push_back({opt.eta_times[i] * m2, 1, i});
  }
  std::stable_sort(targets.begin(), targets.end(),
                   [](const Target& a, const Target& b) { return a.fine < b.fine; });

  BitSource bits(seeds);
  OffsetArray<std::int64_t> right, left, down;
  std::int64_t v = 0, lo = 0, hi = 0;
  int p = 0;
  std::int64_t fine = 0, n = 0, last_exit = 0;
  stats::MomentAccumulator tau;
  std::size_t next_grid = 0, next_target = 0;
  std::map<std::size_t, Profile> down_at_n, right_at_time;

  auto down_profile = [&] {
    Profile pr{lo - 1, {}};
    for (std::int64_t x = lo - 1; x <= hi + 1; ++x) {
      pr.values.push_back(static_cast<double>(down.get(x)));
    }
    return pr;
  };
  auto right_profile = [&] {
    Profile pr{lo - 1, {}};
    for (std::int64_t x = lo - 1; x <= hi + 1; ++x) {
      pr.values.push_back(static_cast<double>(right.get(x)) / two_m);
    }
    return pr;
  };
  auto settle = [&](std::size_t i) {
    auto a = down_at_n.find(i);
    auto b = right_at_time.find(i);
    if (a == down_at_n.end() || b == right_at_time.end()) return;
    tr.discrepancy[i].at_time = sup_difference(a->second, b->second);
    down_at_n.erase(a);
    right_at_time.erase(b);
  };

  auto exit_cell = [&](int dir) {
    if (dir > 0) {
      ++left[v + 1];
      ++v;
    } else {
      ++right[v - 1];
      --v;
      ++down[v];
    }
    p = 0;
    ++n;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    if (opt.keep_increments) tr.increments.push_back(static_cast<std::int8_t>(dir));
    tau.add(static_cast<double>(fine - last_exit) / static_cast<double>(m2));
    last_exit = fine;
    while (next_grid < opt.n_grid.size() && opt.n_grid[next_grid] == n) {
      const Profile d = down_profile();
      tr.discrepancy[next_grid].coupled = sup_difference(d, right_profile());
      down_at_n.emplace(next_grid, d);
      settle(next_grid);
      ++next_grid;
    }
  };
  auto hit_target = [&](const Target& t) {
    if (t.kind == 0) {
      right_at_time.emplace(t.index, right_profile());
      settle(t.index);
      return;
    }
    EtaSnapshot s;
    s.t = opt.eta_times[t.index];
    s.window = opt.eta_window;
    for (std::int64_t x = s.window.lo; x <= s.window.hi; ++x) {
      const double r = static_cast<double>(right.get(x));
      const double l = static_cast<double>(left.get(x));
      s.eta.push_back((r + l) / two_m);
      s.eta_right.push_back(r / two_m);
    }
    tr.eta.push_back(std::move(s));
  };

  constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::max();
  for (;;) {
    while (next_target < targets.size() && targets[next_target].fine == fine) {
      hit_target(targets[next_target++]);
    }
    const std::int64_t due =
        next_target < targets.size() ? targets[next_target].fine : kNever;
    if (n >= opt.coarse_steps && due == kNever) break;

    if (due - fine < 32) {
      // Single steps up to the probe.
      const bool up = bits.next_bit();
      const int q = p + (up ? 1 : -1);
      ++fine;
      if ((p == 0 && q == 1) || (p == 1 && q == 0)) ++right[v];
      if ((p == 0 && q == -1) || (p == -1 && q == 0)) ++left[v];
      if (q == m) exit_cell(1);
      else if (q == -m) exit_cell(-1);
      else p = q;
      continue;
    }
    // Far from the centre and the exits a whole chunk is a plain
    // displacement: it can neither touch 0 nor reach +-m.
    const int a = p < 0 ? -p : p;
    if (a > 32 && a < m - 32) {
      const std::uint32_t w = bits.peek32();
      bits.consume(32);
      p += 2 * std::popcount(w) - 32;
      fine += 32;
    } else if (a > 16 && a < m - 16) {
      const auto w = static_cast<std::uint16_t>(bits.peek32());
      bits.consume(16);
      p += 2 * std::popcount(w) - 16;
      fine += 16;
    } else if (a > 8 && a < m - 8) {
      const unsigned w = bits.peek8();
      bits.consume(8);
      p += 2 * std::popcount(w) - 8;
      fine += 8;
    } else {
      const Cell& c = table.at(p, bits.peek8());
      bits.consume(c.bits);
      fine += c.bits;
      if (c.right) right[v] += c.right;
      if (c.left) left[v] += c.left;
      if (c.exit) exit_cell(c.exit);
      else p = c.p;
    }
  }

  tr.coarse_steps = n;
  tr.fine_steps = fine;
  tr.tau = tau.result();
  tr.sigma2 = tr.tau.se * tr.tau.se * static_cast<double>(tr.tau.count);
  return tr;
}

namespace {

void fit_positive(Curve& c) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < c.n.size(); ++i) {
    if (c.value[i] > 0.0) {
      x.push_back(static_cast<double>(c.n[i]));
      y.push_back(c.value[i]);
    }
  }
  if (x.size() >= 3) c.fit = stats::fit(stats::FitModel::log_log, x, y);
}

}  // namespace

Curve discrepancy_curve(const EmbeddingTrace& trace, DiscrepancyVariant v) {
  Curve c;
  for (const auto& d : trace.discrepancy) {
    c.n.push_back(d.n);
    c.value.push_back(v == DiscrepancyVariant::coupled ? d.coupled : d.at_time);
  }
  fit_positive(c);
  return c;
}

Curve median_curve(const std::vector<Curve>& curves) {
  Curve out;
  if (curves.empty()) return out;
  out.n = curves.front().n;
  for (std::size_t i = 0; i < out.n.size(); ++i) {
    std::vector<double> xs;
    for (const auto& c : curves) {
      if (c.n.size() != out.n.size() || c.n[i] != out.n[i]) {
        throw std::invalid_argument("median_curve: grids differ");
      }
      xs.push_back(c.value[i]);
    }
    out.value.push_back(stats::quantile(xs, 0.5));
  }
  fit_positive(out);
  return out;
}

namespace {

// The walk of StepGenerator, advanced word by word with per-site
// downcrossing and upcrossing counts.
class LeanWalk {
 public:
  explicit LeanWalk(SeedPair s) : rng_(s) {}

  void advance_to(std::int64_t target) {
    while (n_ < target) {
      if (avail_ == 0) {
        word_ = rng_();
        avail_ = 64;
      }
      const std::int64_t take = std::min<std::int64_t>(avail_, target - n_);
      down_[pos_ - 65];
      down_[pos_ + 65];
      up_[pos_ - 65];
      up_[pos_ + 65];
      std::int64_t* const d = &down_.at_unchecked(0);
      std::int64_t* const u = &up_.at_unchecked(0);
      for (std::int64_t i = 0; i < take; ++i) {
        const auto bit = static_cast<std::int64_t>(word_ & 1u);
        word_ >>= 1;
        pos_ += 2 * bit - 1;
        d[pos_] += 1 - bit;
        u[pos_] += bit;
      }
      lo_ = std::min(lo_, pos_ - take);
      hi_ = std::max(hi_, pos_ + take);
      avail_ -= take;
      n_ += take;
    }
  }

  std::int64_t down(std::int64_t x) const { return down_.get(x); }
  std::int64_t up(std::int64_t x) const { return up_.get(x); }
  // Bounds containing every visited site (possibly wider).
  std::int64_t lo() const { return lo_; }
  std::int64_t hi() const { return hi_; }

 private:
  CounterRng rng_;
  std::uint64_t word_ = 0;
  std::int64_t avail_ = 0;
  std::int64_t n_ = 0;
  std::int64_t pos_ = 0;
  std::int64_t lo_ = 0, hi_ = 0;
  OffsetArray<std::int64_t> down_, up_;
};

}  // namespace

NeighborGapResult neighbor_gap_curve(std::uint64_t master_seed,
                                     std::int64_t seeds,
                                     std::vector<std::int64_t> n_grid,
                                     unsigned workers) {
  if (!std::is_sorted(n_grid.begin(), n_grid.end()) || n_grid.empty() ||
      n_grid.front() < 1) {
    throw std::invalid_argument("neighbor_gap_curve: grid must be sorted and >= 1");
  }
  struct One {
    std::vector<double> gap, fourth;
  };
  auto rows = map_replicas(master_seed, seeds, workers, [&](std::int64_t r) {
    LeanWalk w(SeedPair{master_seed, static_cast<std::uint64_t>(r)});
    One o;
    for (auto n : n_grid) {
      w.advance_to(n);
      std::int64_t g = 0;
      for (std::int64_t x = w.lo() - 1; x <= w.hi(); ++x) {
        g = std::max<std::int64_t>(g, std::llabs(w.down(x + 1) - w.down(x)));
      }
      o.gap.push_back(static_cast<double>(g));
      const double d = static_cast<double>(w.down(1) - w.down(0));
      o.fourth.push_back(d * d * d * d / std::pow(static_cast<double>(n), 1.1));
    }
    return o;
  });
  NeighborGapResult res;
  res.n = n_grid;
  std::vector<Curve> curves;
  for (auto& o : rows) {
    res.sup_gap.push_back(o.gap);
    curves.push_back(Curve{n_grid, o.gap, std::nullopt});
  }
  res.median_gap = median_curve(curves);
  std::vector<double> top_x, top_y;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    std::vector<double> xs;
    for (auto& o : rows) xs.push_back(o.fourth[i]);
    res.fourth_moment_ratio.push_back(stats::estimate(xs));
    if (n_grid[i] * 10 >= n_grid.back() && res.fourth_moment_ratio.back().mean > 0.0) {
      top_x.push_back(static_cast<double>(n_grid[i]));
      top_y.push_back(res.fourth_moment_ratio.back().mean);
    }
  }
  if (top_x.size() >= 3) {
    res.fourth_moment_trend = stats::fit(stats::FitModel::log_log, top_x, top_y);
  }
  return res;
}

double block_pmf(std::int64_t k) {
  if (k < 0) return 0.0;
  if (k == 0) return 0.5;
  return std::ldexp(1.0, -static_cast<int>(std::min<std::int64_t>(k + 1, 1100)));
}

std::vector<double> BlockDistribution::pmf() const {
  return stats::normalise(counts);
}

BlockDistribution block_distribution(std::uint64_t master_seed,
                                     std::int64_t replicas, std::int64_t cap,
                                     unsigned workers) {
  if (replicas < 1 || cap < 1) {
    throw std::invalid_argument("block_distribution: replicas and cap must be >= 1");
  }
  struct One {
    std::int64_t m0 = 0;
    bool m10 = false;
    bool censored = false;
  };
  auto rows = map_replicas(master_seed, replicas, workers, [&](std::int64_t r) {
    StepGenerator gen(SeedPair{master_seed, static_cast<std::uint64_t>(r)});
    One o;
    std::int64_t pos = 0;
    bool alpha = false, tau1 = false, block = false;
    for (std::int64_t n = 0; !(alpha && block); ++n) {
      if (n >= cap) {
        o.censored = true;
        break;
      }
      const int s = gen.next();
      const std::int64_t prev = pos;
      pos += s;
      if (s > 0) continue;
      if (pos == 1) {
        if (!alpha) ++o.m0;
        if (!tau1) tau1 = true;
        else block = true;  // second downcrossing into 1 closes the block
      } else if (pos == 0 && prev == 1) {
        alpha = true;
        if (tau1 && !block) {
          o.m10 = true;
          block = true;
        }
      }
    }
    return o;
  });
  BlockDistribution b;
  b.counts.assign(static_cast<std::size_t>(kBlockMaxValue + 1), 0);
  std::vector<double> nz, ten, mean;
  for (const auto& o : rows) {
    if (o.censored) {
      ++b.censored;
      continue;
    }
    ++b.samples;
    ++b.counts[static_cast<std::size_t>(std::min(o.m0, kBlockMaxValue))];
    nz.push_back(o.m0 != 0 ? 1.0 : 0.0);
    ten.push_back(o.m10 ? 1.0 : 0.0);
    mean.push_back(static_cast<double>(o.m0));
  }
  b.censor_rate = static_cast<double>(b.censored) / static_cast<double>(replicas);
  b.flagged = b.censor_rate > 0.01;
  b.p01 = stats::estimate(nz);
  b.p10 = stats::estimate(ten);
  b.mean = stats::estimate(mean);
  return b;
}

std::vector<double> kesten_ratios(std::uint64_t master_seed, std::int64_t seeds,
                                  std::int64_t n, unsigned workers) {
  if (n < 16) throw std::invalid_argument("kesten_ratios: n must be >= 16");
  const double nd = static_cast<double>(n);
  const double norm = std::sqrt(2.0 * nd * std::log(std::log(nd)));
  return map_replicas(master_seed, seeds, workers, [&](std::int64_t r) {
    LeanWalk w(SeedPair{master_seed, static_cast<std::uint64_t>(r)});
    w.advance_to(n);
    std::int64_t best = 0;
    for (std::int64_t x = w.lo(); x <= w.hi(); ++x) {
      best = std::max(best, w.up(x) + w.down(x));
    }
    return static_cast<double>(best) / norm;
  });
}

}  // namespace favedge::embedding
