#include "favedge/branching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/beta.hpp>

#include "favedge/parallel.hpp"

namespace favedge::branching {

std::string_view to_string(KernelKind k) {
  switch (k) {
    case KernelKind::plain: return "plain";
    case KernelKind::immigrant: return "immigrant";
    case KernelKind::shifted_immigrant: return "shifted-immigrant";
  }
  return "unknown";
}

KernelKind parse_kernel(std::string_view name) {
  for (auto k : {KernelKind::plain, KernelKind::immigrant,
                 KernelKind::shifted_immigrant}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown kernel: " + std::string(name));
}

namespace {

constexpr std::int64_t kExactLimit = 60;

// C(n, r) for n <= 60; every partial product fits in 128 bits.
std::uint64_t binomial(std::int64_t n, std::int64_t r) {
  r = std::min(r, n - r);
  unsigned __int128 acc = 1;
  for (std::int64_t t = 0; t < r; ++t) {
    acc = acc * static_cast<unsigned __int128>(n - t) /
          static_cast<unsigned __int128>(t + 1);
  }
  return static_cast<std::uint64_t>(acc);
}

}  // namespace

double plain_kernel_exact(std::int64_t i, std::int64_t j) {
  if (j < 0 || i < 0) return 0.0;
  if (i == 0) return j == 0 ? 1.0 : 0.0;
  if (i + j > kExactLimit) {
    throw std::invalid_argument("plain_kernel_exact: i + j must be <= 60");
  }
  return std::ldexp(static_cast<double>(binomial(i + j - 1, j)),
                    -static_cast<int>(i + j));
}

double plain_kernel_lgamma(std::int64_t i, std::int64_t j) {
  if (j < 0 || i < 0) return 0.0;
  if (i == 0) return j == 0 ? 1.0 : 0.0;
  const long double li = static_cast<long double>(i);
  const long double lj = static_cast<long double>(j);
  const long double lg = std::lgamma(li + lj) - std::lgamma(li) -
                         std::lgamma(lj + 1.0L) -
                         (li + lj) * std::log(2.0L);
  return static_cast<double>(std::exp(lg));
}

double plain_kernel(std::int64_t i, std::int64_t j) {
  if (i + j <= kExactLimit) return plain_kernel_exact(i, j);
  return plain_kernel_lgamma(i, j);
}

double kernel_eval(KernelKind kind, std::int64_t i, std::int64_t j) {
  if (i < 0) return 0.0;
  switch (kind) {
    case KernelKind::plain: return plain_kernel(i, j);
    case KernelKind::immigrant: return plain_kernel(i + 1, j);
    case KernelKind::shifted_immigrant: return plain_kernel(i, j - 1);
  }
  return 0.0;
}

Offspring offspring_of(KernelKind kind, std::int64_t i) noexcept {
  const auto n = static_cast<std::uint64_t>(std::max<std::int64_t>(i, 0));
  switch (kind) {
    case KernelKind::plain: return {n, 0};
    case KernelKind::immigrant: return {n + 1, 0};
    case KernelKind::shifted_immigrant: return {n, 1};
  }
  return {n, 0};
}

namespace {

std::int64_t step_geometric(KernelKind kind, std::int64_t i, CounterRng& rng) {
  const Offspring o = offspring_of(kind, i);
  return static_cast<std::int64_t>(negative_binomial_half(rng, o.parents)) +
         o.shift;
}

std::int64_t step_inverse_cdf(KernelKind kind, std::int64_t i,
                              CounterRng& rng) {
  const Offspring o = offspring_of(kind, i);
  if (o.parents == 0) return o.shift;
  const double u = rng.uniform01();
  const auto r = static_cast<std::int64_t>(o.parents);
  // pi(r, j+1) / pi(r, j) = (r + j) / (2 (j + 1)).
  double p = plain_kernel(r, 0);
  const bool recurrence = p > 0.0;
  double cum = 0.0;
  const std::int64_t mode = r;
  for (std::int64_t j = 0;; ++j) {
    if (!recurrence) p = plain_kernel(r, j);
    cum += p;
    if (cum > u) return j + o.shift;
    if (j > mode && p < 1e-300) return j + o.shift;
    if (recurrence) {
      p *= static_cast<double>(r + j) / (2.0 * static_cast<double>(j + 1));
    }
  }
}

}  // namespace

std::int64_t kernel_sample(KernelKind kind, std::int64_t i, CounterRng& rng,
                           Sampler sampler) {
  if (i < 0) throw std::invalid_argument("kernel_sample: negative state");
  if (sampler == Sampler::inverse_cdf) return step_inverse_cdf(kind, i, rng);
  return step_geometric(kind, i, rng);
}

ChainTrajectory chain_run(KernelKind kind, std::int64_t start,
                          StopCondition stop, CounterRng& rng,
                          std::int64_t budget) {
  if (start < 0) throw std::invalid_argument("chain_run: negative start");
  if (stop.rule == StopRule::hit && kind == KernelKind::plain) {
    throw std::invalid_argument(
        "chain_run: a plain chain may never reach the threshold; use "
        "hit_or_extinct");
  }
  if (stop.rule == StopRule::extinct && kind != KernelKind::plain) {
    throw std::invalid_argument(
        "chain_run: extinction is not certain for immigrant chains");
  }
  ChainTrajectory t;
  t.kind = kind;
  t.start = start;
  t.states.push_back(start);

  auto note = [&](std::int64_t n, std::int64_t z) {
    if (!t.hit_index && z >= stop.threshold &&
        (stop.rule == StopRule::hit || stop.rule == StopRule::hit_or_extinct)) {
      t.hit_index = n;
    }
    if (!t.extinction_index && z == 0) t.extinction_index = n;
  };
  auto done = [&](std::int64_t n) {
    switch (stop.rule) {
      case StopRule::steps: return n >= stop.steps;
      case StopRule::hit: return t.hit_index.has_value();
      case StopRule::extinct: return t.extinction_index.has_value();
      case StopRule::hit_or_extinct:
        return t.hit_index.has_value() || t.extinction_index.has_value();
    }
    return true;
  };

  note(0, start);
  std::int64_t z = start;
  for (std::int64_t n = 0; !done(n); ++n) {
    if (n >= budget) {
      t.censored = true;
      break;
    }
    z = step_geometric(kind, z, rng);
    t.states.push_back(z);
    note(n + 1, z);
  }
  return t;
}

double ExactPmf::mean() const {
  stats::CompensatedSum s;
  for (std::size_t j = 0; j < masses.size(); ++j) {
    s.add(static_cast<double>(j) * masses[j]);
  }
  return s.value();
}

double ExactPmf::second_moment() const {
  stats::CompensatedSum s;
  for (std::size_t j = 0; j < masses.size(); ++j) {
    const double x = static_cast<double>(j);
    s.add(x * x * masses[j]);
  }
  return s.value();
}

double ExactPmf::total() const {
  stats::CompensatedSum s;
  for (double m : masses) s.add(m);
  return s.value();
}

std::vector<ExactPmf> kernel_power_sequence(KernelKind kind,
                                            std::int64_t start,
                                            std::int64_t steps,
                                            std::int64_t cap) {
  if (start < 0 || steps < 0 || cap < start) {
    throw std::invalid_argument(
        "kernel_power: need 0 <= start <= cap and steps >= 0");
  }
  const auto size = static_cast<std::size_t>(cap + 1);
  std::vector<double> matrix(size * size);
  std::vector<double> row_tail(size);
  for (std::size_t i = 0; i < size; ++i) {
    stats::CompensatedSum s;
    for (std::size_t j = 0; j < size; ++j) {
      const double p = kernel_eval(kind, static_cast<std::int64_t>(i),
                                   static_cast<std::int64_t>(j));
      matrix[i * size + j] = p;
      s.add(p);
    }
    row_tail[i] = std::max(0.0, 1.0 - s.value());
  }

  std::vector<ExactPmf> out;
  ExactPmf cur;
  cur.masses.assign(size, 0.0);
  cur.masses[static_cast<std::size_t>(start)] = 1.0;
  cur.start = start;
  out.push_back(cur);
  for (std::int64_t n = 1; n <= steps; ++n) {
    ExactPmf next;
    next.start = start;
    next.steps = n;
    next.masses.assign(size, 0.0);
    std::vector<stats::CompensatedSum> acc(size);
    stats::CompensatedSum lost;
    lost.add(cur.overflow);
    for (std::size_t i = 0; i < size; ++i) {
      const double w = cur.masses[i];
      if (w == 0.0) continue;
      const double* row = &matrix[i * size];
      for (std::size_t j = 0; j < size; ++j) acc[j].add(w * row[j]);
      lost.add(w * row_tail[i]);
    }
    for (std::size_t j = 0; j < size; ++j) next.masses[j] = acc[j].value();
    next.overflow = lost.value();
    next.low_precision = next.overflow > kOverflowTolerance;
    out.push_back(next);
    cur = std::move(next);
  }
  return out;
}

ExactPmf kernel_power(KernelKind kind, std::int64_t start, std::int64_t steps,
                      std::int64_t cap) {
  return kernel_power_sequence(kind, start, steps, cap).back();
}

HittingMoments hitting_moments(std::int64_t k, std::int64_t h,
                               std::int64_t replicas,
                               std::uint64_t master_seed, unsigned workers) {
  if (k < 0 || k >= h) throw std::invalid_argument("hitting_moments: need 0 <= k < h");
  struct One {
    double tau = 0.0, level = 0.0;
    bool censored = false;
  };
  auto rows = map_replicas(master_seed, replicas, workers, [&](std::int64_t r) {
    CounterRng rng(SeedPair{master_seed, static_cast<std::uint64_t>(r)});
    std::int64_t z = k, n = 0;
    while (z < h) {
      if (n >= kDefaultChainBudget) return One{0.0, 0.0, true};
      z = step_geometric(KernelKind::immigrant, z, rng);
      ++n;
    }
    return One{static_cast<double>(n), static_cast<double>(z), false};
  });
  std::vector<double> tau, level, residual;
  HittingMoments m;
  for (const auto& o : rows) {
    if (o.censored) {
      ++m.censored;
      continue;
    }
    tau.push_back(o.tau);
    level.push_back(o.level);
    residual.push_back(o.tau - (o.level - static_cast<double>(k)));
  }
  m.tau = stats::estimate(tau);
  m.level = stats::estimate(level);
  m.residual = stats::estimate(residual);
  return m;
}

stats::Estimate ruin_probability(std::int64_t m, std::int64_t h,
                                 std::int64_t replicas,
                                 std::uint64_t master_seed, unsigned workers) {
  if (m < 0 || m >= h) throw std::invalid_argument("ruin_probability: need 0 <= m < h");
  auto rows = map_replicas(master_seed, replicas, workers, [&](std::int64_t r) {
    CounterRng rng(SeedPair{master_seed, static_cast<std::uint64_t>(r)});
    std::int64_t y = m;
    while (y > 0 && y < h) y = step_geometric(KernelKind::plain, y, rng);
    return y == 0 ? 1.0 : 0.0;
  });
  return stats::estimate(rows);
}

Lemma41Estimate lemma41_statistic(std::int64_t k, std::int64_t h,
                                  std::int64_t replicas,
                                  std::uint64_t master_seed, unsigned workers) {
  if (h <= 4 || k < 0 || 2 * k >= h - 1) {
    throw std::invalid_argument(
        "lemma41_statistic: need h > 4 and 0 <= k < (h-1)/2");
  }
  struct One {
    double direct = 0.0, identity = 0.0;
  };
  const double hd = static_cast<double>(h);
  auto rows = map_replicas(master_seed, replicas, workers, [&](std::int64_t r) {
    CounterRng rng(SeedPair{master_seed, static_cast<std::uint64_t>(r)});
    std::int64_t z = k;
    std::int64_t sum = 0;  // sum of (h - 2 Z_n), exact
    do {
      z = step_geometric(KernelKind::immigrant, z, rng);
      sum += h - 2 * z;
    } while (2 * z < h - 1);
    const double zt = static_cast<double>(z), z0 = static_cast<double>(k);
    return One{static_cast<double>(sum) / hd,
               (2.0 * hd - 1.0 - (zt + z0)) * (zt - z0) / (2.0 * hd)};
  });
  std::vector<double> a, b;
  for (const auto& o : rows) {
    a.push_back(o.direct);
    b.push_back(o.identity);
  }
  return {stats::estimate(a), stats::estimate(b)};
}

MartingaleExpectations martingale_checks(std::int64_t k, std::int64_t n,
                                         std::int64_t cap) {
  if (n < 0) throw std::invalid_argument("martingale_checks: n must be >= 0");
  const auto laws = kernel_power_sequence(KernelKind::immigrant, k, n, cap);
  MartingaleExpectations e;
  const double nd = static_cast<double>(n);
  stats::CompensatedSum m;
  for (std::int64_t s = 1; s <= n; ++s) {
    m.add(laws[static_cast<std::size_t>(s)].mean());
    m.add(-static_cast<double>(s));
  }
  const ExactPmf& last = laws.back();
  const double mean = last.mean();
  const double second = last.second_moment();
  m.add(-nd * mean);
  m.add(nd * nd);
  e.m = m.value();
  stats::CompensatedSum mp;
  mp.add(-0.25 * second);
  mp.add(nd * mean);
  mp.add(-0.5 * nd * nd);
  mp.add(0.25 * nd);
  e.m_prime = mp.value();
  e.overflow = last.overflow;
  e.low_precision = last.low_precision;
  return e;
}

bool in_k_window(std::int64_t k, std::int64_t a, WindowConvention c) {
  if (k < 0 || a < 0) return false;
  const std::int64_t d = a - 2 * k;  // k vs a/2
  const bool open = c == WindowConvention::open;
  // k > (a - 2 sqrt a)/2  <=>  d < 2 sqrt a
  const bool lower = d < 0 || (open ? d * d < 4 * a : d * d <= 4 * a);
  // k < (a - sqrt a)/2  <=>  d > sqrt a
  const bool upper = open ? (d > 0 && d * d > a) : (d >= 0 && d * d >= a);
  return lower && upper;
}

std::vector<std::int64_t> k_window(std::int64_t a, WindowConvention c) {
  std::vector<std::int64_t> out;
  if (a < 0) return out;
  const double ra = std::sqrt(static_cast<double>(a));
  const auto from = std::max<std::int64_t>(
      0, static_cast<std::int64_t>(std::floor((a - 2.0 * ra) / 2.0)) - 1);
  const auto to =
      static_cast<std::int64_t>(std::ceil((a - ra) / 2.0)) + 1;
  for (std::int64_t k = from; k <= to; ++k) {
    if (in_k_window(k, a, c)) out.push_back(k);
  }
  return out;
}

std::int64_t k_window_midpoint(std::int64_t a, WindowConvention c) {
  const auto w = k_window(a, c);
  if (w.empty()) {
    throw std::invalid_argument("k window is empty for a = " +
                                std::to_string(a));
  }
  const double mid =
      (static_cast<double>(a) - 1.5 * std::sqrt(static_cast<double>(a))) / 2.0;
  const auto k = static_cast<std::int64_t>(std::llround(mid));
  return std::clamp(k, w.front(), w.back());
}

KernelBands kernel_bands(std::int64_t h) {
  if (h < 1) throw std::invalid_argument("kernel_bands: h must be >= 1");
  KernelBands b;
  b.h = h;
  const double rh = std::sqrt(static_cast<double>(h));
  const double half_width = 10.0 * rh;
  std::int64_t lo = std::max<std::int64_t>(
      0, static_cast<std::int64_t>(std::floor((h - half_width) / 2.0)));
  std::int64_t hi = static_cast<std::int64_t>(std::ceil((h + half_width) / 2.0));
  auto inside = [&](std::int64_t v) {
    return std::abs(static_cast<double>(2 * v - h)) < half_width;
  };
  double mn = std::numeric_limits<double>::infinity(), mx = 0.0;
  double mn_diag = std::numeric_limits<double>::infinity();
  for (std::int64_t i = lo; i <= hi; ++i) {
    if (!inside(i)) continue;
    for (std::int64_t j = lo; j <= hi; ++j) {
      if (!inside(j)) continue;
      const double v = rh * plain_kernel(i, j);
      mn = std::min(mn, v);
      mx = std::max(mx, v);
      if (i > 0 && std::abs(static_cast<double>(i - j)) <= std::sqrt(2.0 * i)) mn_diag = std::min(mn_diag, v);
    }
  }
  double anti = 0.0;
  for (std::int64_t i = 0; i <= h; ++i) anti = std::max(anti, plain_kernel(i, h - i));
  b.min_scaled = mn;
  b.max_scaled = mx;
  b.min_scaled_near_diagonal = mn_diag;
  b.antidiagonal_max_scaled = rh * anti;
  return b;
}

std::int64_t monotonicity_violations(std::int64_t max_i) {
  std::int64_t bad = 0;
  std::vector<double> col;
  for (std::int64_t j = 0; j + 2 <= max_i; ++j) {
    col.clear();
    for (std::int64_t i = j + 1; i <= max_i; ++i) col.push_back(plain_kernel(i, j));
    for (std::size_t a = 0; a < col.size(); ++a) {
      for (std::size_t b = a + 1; b < col.size(); ++b) {
        if (!(col[a] > col[b])) ++bad;
      }
    }
  }
  return bad;
}

double row_sum_error(KernelKind kind, std::int64_t i) {
  const Offspring o = offspring_of(kind, i);
  if (o.parents == 0) {
    return std::abs(kernel_eval(kind, i, o.shift) - 1.0);
  }
  const double r = static_cast<double>(o.parents);
  // Negative binomial(r, 1/2): mean r, variance 2r.
  const auto last = static_cast<std::int64_t>(r + 40.0 * std::sqrt(2.0 * r) + 50.0);
  stats::CompensatedSum s;
  for (std::int64_t j = 0; j <= last; ++j) s.add(kernel_eval(kind, i, j));
  // P(NB > last - shift) = I_{1/2}-complement in closed form.
  const double tail = boost::math::ibetac(
      r, static_cast<double>(last - o.shift + 1), 0.5);
  s.add(tail);
  return std::abs(s.value() - 1.0);
}

}  // namespace favedge::branching
