#include "favedge/stats.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

namespace favedge::stats {

double Estimate::z_score(double target) const noexcept {
  const double diff = std::abs(mean - target);
  if (se > 0.0) return diff / se;
  return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

Estimate MomentAccumulator::result() const noexcept {
  Estimate e;
  e.count = n_;
  if (n_ == 0) return e;
  const double n = static_cast<double>(n_);
  e.mean = sum_.value() / n;
  if (n_ >= 2) {
    const double var =
        std::max(0.0, (sq_.value() - n * e.mean * e.mean) / (n - 1.0));
    e.se = std::sqrt(var / n);
  }
  return e;
}

Estimate estimate(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  Estimate e;
  e.count = static_cast<std::int64_t>(xs.size());
  if (xs.empty()) return e;
  const double n = static_cast<double>(xs.size());
  e.mean = s.value() / n;
  if (xs.size() >= 2) {
    CompensatedSum ss;
    for (double x : xs) ss.add((x - e.mean) * (x - e.mean));
    e.se = std::sqrt(ss.value() / (n - 1.0) / n);
  }
  return e;
}

FitResult fit(FitModel model, std::span<const double> x,
              std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit: size mismatch");
  if (x.size() < 3) throw std::invalid_argument("fit: need at least 3 points");
  std::vector<double> u, v;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) throw std::invalid_argument("fit: abscissae must be > 0");
    u.push_back(std::log(x[i]));
    if (model == FitModel::log_log) {
      if (!(y[i] > 0.0)) {
        throw std::invalid_argument("fit: log-log ordinates must be > 0");
      }
      v.push_back(std::log(y[i]));
    } else {
      v.push_back(y[i]);
    }
  }
  const double n = static_cast<double>(u.size());
  double mu = 0.0, mv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    mu += u[i];
    mv += v[i];
  }
  mu /= n;
  mv /= n;
  double suu = 0.0, suv = 0.0, svv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    suu += (u[i] - mu) * (u[i] - mu);
    suv += (u[i] - mu) * (v[i] - mv);
    svv += (v[i] - mv) * (v[i] - mv);
  }
  if (suu <= 0.0) throw std::invalid_argument("fit: degenerate abscissae");
  FitResult r;
  r.model = model;
  r.slope = suv / suu;
  r.intercept = mv - r.slope * mu;
  r.correlation = svv > 0.0 ? suv / std::sqrt(suu * svv) : 1.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    r.residuals.push_back(v[i] - (r.intercept + r.slope * u[i]));
  }
  return r;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  const std::size_t n = std::max(p.size(), q.size());
  double tv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = i < p.size() ? p[i] : 0.0;
    const double b = i < q.size() ? q[i] : 0.0;
    tv += std::abs(a - b);
  }
  return 0.5 * tv;
}

std::vector<double> normalise(std::span<const std::int64_t> counts) {
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  std::vector<double> out;
  for (auto c : counts) {
    out.push_back(total > 0.0 ? static_cast<double>(c) / total : 0.0);
  }
  return out;
}

double chi_square_sf(double statistic, int dof) {
  if (dof <= 0) return 1.0;
  if (statistic <= 0.0) return 1.0;
  boost::math::chi_squared_distribution<double> d(dof);
  return boost::math::cdf(boost::math::complement(d, statistic));
}

namespace {

// Groups consecutive indices so each group's expected weight reaches
// `min_weight`; a short final group is merged into its predecessor.
std::vector<std::size_t> pool_boundaries(std::span<const double> weight,
                                         double min_weight) {
  std::vector<std::size_t> ends;
  double acc = 0.0;
  for (std::size_t i = 0; i < weight.size(); ++i) {
    acc += weight[i];
    if (acc >= min_weight) {
      ends.push_back(i + 1);
      acc = 0.0;
    }
  }
  if (ends.empty()) {
    ends.push_back(weight.size());
  } else if (ends.back() != weight.size()) {
    ends.back() = weight.size();
  }
  return ends;
}

}  // namespace

ChiSquareResult chi_square_gof(std::span<const std::int64_t> observed,
                               std::span<const double> probs) {
  double total = 0.0;
  for (auto c : observed) total += static_cast<double>(c);
  const std::size_t k = std::max(observed.size(), probs.size()) + 1;
  std::vector<double> obs(k, 0.0), expct(k, 0.0);
  double covered = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    expct[i] = probs[i] * total;
    covered += probs[i];
  }
  expct[k - 1] = std::max(0.0, 1.0 - covered) * total;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    obs[i] = static_cast<double>(observed[i]);
  }
  const auto ends = pool_boundaries(expct, 5.0);
  ChiSquareResult r;
  std::size_t begin = 0;
  for (auto end : ends) {
    double o = 0.0, e = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      o += obs[i];
      e += expct[i];
    }
    if (e > 0.0) {
      r.statistic += (o - e) * (o - e) / e;
      ++r.cells;
    } else if (o > 0.0) {
      r.statistic = std::numeric_limits<double>::infinity();
      ++r.cells;
    }
    begin = end;
  }
  r.dof = std::max(0, r.cells - 1);
  r.p_value = std::isinf(r.statistic) ? 0.0 : chi_square_sf(r.statistic, r.dof);
  return r;
}

ChiSquareResult chi_square_two_sample(std::span<const std::int64_t> a,
                                      std::span<const std::int64_t> b) {
  const std::size_t k = std::max(a.size(), b.size());
  double na = 0.0, nb = 0.0;
  std::vector<double> ca(k, 0.0), cb(k, 0.0), col(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    ca[i] = i < a.size() ? static_cast<double>(a[i]) : 0.0;
    cb[i] = i < b.size() ? static_cast<double>(b[i]) : 0.0;
    na += ca[i];
    nb += cb[i];
    col[i] = ca[i] + cb[i];
  }
  ChiSquareResult r;
  if (na == 0.0 || nb == 0.0) return r;
  const double n = na + nb;
  // Smallest expected cell in column i is min(na, nb) * col[i] / n.
  std::vector<double> weight(k);
  for (std::size_t i = 0; i < k; ++i) weight[i] = std::min(na, nb) * col[i] / n;
  const auto ends = pool_boundaries(weight, 5.0);
  std::size_t begin = 0;
  for (auto end : ends) {
    double oa = 0.0, ob = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      oa += ca[i];
      ob += cb[i];
    }
    const double c = oa + ob;
    if (c > 0.0) {
      const double ea = na * c / n;
      const double eb = nb * c / n;
      r.statistic += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
      ++r.cells;
    }
    begin = end;
  }
  r.dof = std::max(0, r.cells - 1);
  r.p_value = chi_square_sf(r.statistic, r.dof);
  return r;
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(xs.begin(), xs.end());
  const double h = (static_cast<double>(xs.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

std::vector<std::int64_t> histogram(std::span<const std::int64_t> values,
                                    std::int64_t max_value) {
  std::vector<std::int64_t> h(static_cast<std::size_t>(max_value + 1), 0);
  for (auto v : values) {
    const auto b = std::clamp<std::int64_t>(v, 0, max_value);
    ++h[static_cast<std::size_t>(b)];
  }
  return h;
}

}  // namespace favedge::stats
