#include "favedge/exact_oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <thread>

namespace favedge::oracle {

std::string_view to_string(Statistic s) {
  switch (s) {
    case Statistic::favorite_edge_count: return "favorites";
    case Statistic::favorite_down_site_count: return "down-favorites";
    case Statistic::min_abs_favorite_edge: return "min-abs-favorite";
    case Statistic::three_favorite_times: return "f3-count";
    case Statistic::identity_violations: return "identity-violations";
  }
  return "unknown";
}

Statistic parse_statistic(std::string_view name) {
  for (auto s : {Statistic::favorite_edge_count,
                 Statistic::favorite_down_site_count,
                 Statistic::min_abs_favorite_edge,
                 Statistic::three_favorite_times,
                 Statistic::identity_violations}) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown statistic: " + std::string(name));
}

std::uint64_t ExactDistribution::numerator_of(std::int64_t value) const {
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i] == value) return numerators[i];
  }
  return 0;
}

double ExactDistribution::mass(std::int64_t value) const {
  return std::ldexp(static_cast<double>(numerator_of(value)),
                    -denominator_log2);
}

namespace {

// Plain-array path state, deliberately independent of CrossingLedger:
// argmax sets are recomputed by scanning instead of being streamed.
constexpr int kMaxSpan = 2 * kMaxEnumerationHorizon + 4;
constexpr int kOrigin = kMaxEnumerationHorizon + 2;

struct PathState {
  std::array<std::int32_t, kMaxSpan> up{};
  std::array<std::int32_t, kMaxSpan> down{};
  std::array<std::int32_t, kMaxSpan> edge{};
  int pos = 0;
  int lo = 0;
  int hi = 0;
  int f3 = 0;

  int favorite_edge_count() const {
    int best = 0, count = 0;
    for (int x = lo + 1; x <= hi; ++x) {
      const int v = edge[x + kOrigin];
      if (v > best) { best = v; count = 1; }
      else if (v == best) ++count;
    }
    return count;
  }

  int favorite_down_site_count() const {
    int best = -1, count = 0;
    for (int x = lo; x <= hi; ++x) {
      const int v = down[x + kOrigin];
      if (v > best) { best = v; count = 1; }
      else if (v == best) ++count;
    }
    return count;
  }

  int min_abs_favorite_edge() const {
    int best = 0;
    for (int x = lo + 1; x <= hi; ++x) best = std::max(best, edge[x + kOrigin]);
    int m = kMaxSpan;
    for (int x = lo + 1; x <= hi; ++x) {
      if (edge[x + kOrigin] == best) m = std::min(m, std::abs(x));
    }
    return m;
  }

  int identity_violations() const {
    int bad = 0;
    for (int x = lo - 1; x <= hi + 1; ++x) {
      const int u = up[x + kOrigin];
      const int d = down[x - 1 + kOrigin];
      const int ind = (0 < x && x <= pos ? 1 : 0) - (pos < x && x <= 0 ? 1 : 0);
      if (u - d != ind || edge[x + kOrigin] != u + d) ++bad;
    }
    return bad;
  }
};

class Enumerator {
 public:
  Enumerator(int n, Statistic stat) : n_(n), stat_(stat) {}

  void run_from_prefix(std::uint64_t prefix, int prefix_len) {
    PathState s;
    for (int i = 0; i < prefix_len; ++i) {
      push(s, ((prefix >> i) & 1u) ? 1 : -1);
    }
    descend(s, prefix_len);
  }

  std::map<std::int64_t, std::uint64_t>& histogram() { return hist_; }

 private:
  struct Undo {
    int lo, hi, f3;
  };

  Undo push(PathState& s, int step) {
    Undo u{s.lo, s.hi, s.f3};
    const int prev = s.pos;
    const int cur = prev + step;
    const int e = (prev + cur + 1) / 2;
    if (step > 0) ++s.up[cur + kOrigin];
    else ++s.down[cur + kOrigin];
    ++s.edge[e + kOrigin];
    s.pos = cur;
    s.lo = std::min(s.lo, cur);
    s.hi = std::max(s.hi, cur);
    if (stat_ == Statistic::three_favorite_times &&
        s.favorite_edge_count() == 3) {
      ++s.f3;
    }
    return u;
  }

  void pop(PathState& s, int step, const Undo& u) {
    const int cur = s.pos;
    const int prev = cur - step;
    const int e = (prev + cur + 1) / 2;
    if (step > 0) --s.up[cur + kOrigin];
    else --s.down[cur + kOrigin];
    --s.edge[e + kOrigin];
    s.pos = prev;
    s.lo = u.lo;
    s.hi = u.hi;
    s.f3 = u.f3;
  }

  void descend(PathState& s, int depth) {
    if (depth == n_) {
      ++hist_[leaf_value(s)];
      return;
    }
    for (int step : {1, -1}) {
      const Undo u = push(s, step);
      descend(s, depth + 1);
      pop(s, step, u);
    }
  }

  std::int64_t leaf_value(const PathState& s) const {
    switch (stat_) {
      case Statistic::favorite_edge_count: return s.favorite_edge_count();
      case Statistic::favorite_down_site_count:
        return s.favorite_down_site_count();
      case Statistic::min_abs_favorite_edge: return s.min_abs_favorite_edge();
      case Statistic::three_favorite_times: return s.f3;
      case Statistic::identity_violations: return s.identity_violations();
    }
    return 0;
  }

  int n_;
  Statistic stat_;
  std::map<std::int64_t, std::uint64_t> hist_;
};

}  // namespace

ExactDistribution enumerate(int n, Statistic stat, unsigned workers) {
  if (n < 1 || n > kMaxEnumerationHorizon) {
    throw std::invalid_argument("enumerate: horizon must be in [1, 24], got " +
                                std::to_string(n));
  }
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  const int prefix_len = std::min(n, 6);
  const std::uint64_t n_prefixes = std::uint64_t{1} << prefix_len;
  workers = static_cast<unsigned>(
      std::min<std::uint64_t>(workers, n_prefixes));

  std::vector<Enumerator> parts(workers, Enumerator(n, stat));
  auto work = [&](unsigned w) {
    for (std::uint64_t p = w; p < n_prefixes; p += workers) {
      parts[w].run_from_prefix(p, prefix_len);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }

  std::map<std::int64_t, std::uint64_t> merged;
  for (auto& p : parts) {
    for (auto [v, c] : p.histogram()) merged[v] += c;
  }
  ExactDistribution d;
  d.statistic = std::string(to_string(stat));
  d.n = n;
  d.denominator_log2 = n;
  for (auto [v, c] : merged) {
    d.support.push_back(v);
    d.numerators.push_back(c);
  }
  return d;
}

void to_json(nlohmann::json& j, const ExactDistribution& d) {
  j = nlohmann::json{{"statistic", d.statistic},
                     {"n", d.n},
                     {"support", d.support},
                     {"numerators", d.numerators},
                     {"denominator_log2", d.denominator_log2}};
}

void from_json(const nlohmann::json& j, ExactDistribution& d) {
  j.at("statistic").get_to(d.statistic);
  j.at("n").get_to(d.n);
  j.at("support").get_to(d.support);
  j.at("numerators").get_to(d.numerators);
  j.at("denominator_log2").get_to(d.denominator_log2);
}

double StoppedPmf::mass(std::int64_t m) const {
  if (m < 0) return 0.0;
  if (ratio == 0.0) return m == 0 ? 1.0 : 0.0;
  return (1.0 - ratio) * std::pow(ratio, static_cast<double>(m));
}

std::vector<double> StoppedPmf::masses(std::int64_t max_value) const {
  std::vector<double> out;
  for (std::int64_t m = 0; m <= max_value; ++m) out.push_back(mass(m));
  return out;
}

StoppedPmf exact_stopped_pmf(int x, int k, int y) {
  if ((x != 2 && x != 3) || k != 0 || y < -1) {
    throw std::invalid_argument(
        "exact_stopped_pmf: supported combinations are x in {2,3}, k = 0, "
        "y >= -1");
  }
  StoppedPmf p{x, k, y, 0.0};
  // A downcrossing into y >= x-2 needs the walk at x-1 or above, which first
  // happens at the stopping step itself.
  if (y >= x - 2) return p;
  if (x == 3 && y == 0) {
    // Each stay at 1 ends in 1 -> 2 (stop) or 1 -> 0 with probability 1/2.
    p.ratio = 0.5;
  } else if (x == 2 && y == -1) {
    // Each stay at 0 ends in 0 -> 1 (stop) or an excursion to -1.
    p.ratio = 0.5;
  } else if (x == 3 && y == -1) {
    // From 0: left excursion 1/2 (count), right then 1 -> 2 with 1/4
    // (stop), right then back to 0 with 1/4 (no effect); so each decisive
    // move counts with probability 2/3.
    p.ratio = 2.0 / 3.0;
  }
  return p;
}

}  // namespace favedge::oracle
