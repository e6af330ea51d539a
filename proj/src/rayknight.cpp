#include "favedge/rayknight.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "favedge/branching.hpp"
#include "favedge/parallel.hpp"

namespace favedge::rayknight {

using branching::KernelKind;

Regime regime_of(std::int64_t x) noexcept {
  return x >= 1 ? Regime::right : Regime::left;
}

std::string_view to_string(OriginSeam s) {
  return s == OriginSeam::corrected ? "corrected" : "literal";
}

OriginSeam parse_seam(std::string_view name) {
  if (name == "corrected") return OriginSeam::corrected;
  if (name == "literal") return OriginSeam::literal;
  throw std::invalid_argument("unknown seam convention: " + std::string(name));
}

namespace {

// Kernel generating Delta(y) from its neighbour on the seam side.
KernelKind kernel_below(std::int64_t x, std::int64_t y, OriginSeam seam) {
  if (x >= 1) {
    const std::int64_t last_immigrant = seam == OriginSeam::corrected ? -1 : 0;
    return y >= last_immigrant ? KernelKind::immigrant : KernelKind::plain;
  }
  return KernelKind::plain;
}

KernelKind kernel_above(std::int64_t x, std::int64_t y) {
  if (x <= 0 && y <= -1) return KernelKind::shifted_immigrant;
  return KernelKind::plain;
}

std::int64_t draw(KernelKind kind, std::int64_t from, CounterRng& rng) {
  if (kind == KernelKind::plain && from == 0) return 0;
  return branching::kernel_sample(kind, from, rng);
}

}  // namespace

PatchedProfile sample_patched_profile(std::int64_t x, std::int64_t k,
                                      Window window, CounterRng& rng,
                                      OriginSeam seam) {
  if (k < 0) throw std::invalid_argument("sample_patched_profile: k < 0");
  if (window.hi < window.lo || window.width() > kMaxWindowWidth) {
    throw std::invalid_argument("sample_patched_profile: bad window");
  }
  PatchedProfile p;
  p.x = x;
  p.k = k;
  p.regime = regime_of(x);
  p.seam = seam;
  p.window = window;
  p.values.assign(static_cast<std::size_t>(window.width()), 0);

  const std::int64_t s = x - 1;
  const std::int64_t seam_value =
      (x <= 0 && seam == OriginSeam::corrected) ? k + 1 : k;
  auto store = [&](std::int64_t y, std::int64_t v) {
    if (window.contains(y)) p.values[static_cast<std::size_t>(y - window.lo)] = v;
  };
  store(s, seam_value);

  // Below the seam; the origin dependence only runs downward for x >= 1.
  std::int64_t v = seam_value;
  for (std::int64_t y = s - 1; y >= window.lo; --y) {
    v = draw(kernel_below(x, y, seam), v, rng);
    store(y, v);
  }
  // Above the seam; for x <= 0 the plain part starts from Delta(-1).
  v = seam_value;
  for (std::int64_t y = s + 1; y <= window.hi; ++y) {
    v = draw(kernel_above(x, y), v, rng);
    store(y, v);
  }
  return p;
}

StoppedProfile walk_profile_sampler(std::int64_t external_x, std::int64_t k,
                                    Window window, std::int64_t cap,
                                    SeedPair seeds) {
  if (k < 0) throw std::invalid_argument("walk_profile_sampler: k < 0");
  return stopped_run(seeds, external_x - 1, k + 1, CrossingKind::upcross,
                     window, cap);
}

std::uint64_t chain_side_seed(std::uint64_t master_seed) noexcept {
  return mix64(master_seed ^ 0xc2b2ae3d27d4eb4full);
}

const CoordinateComparison& CompareReport::at(std::int64_t y) const {
  for (const auto& c : coordinates) {
    if (c.y == y) return c;
  }
  throw std::out_of_range("CompareReport: coordinate not in window");
}

namespace {

struct Draw {
  std::vector<std::int64_t> values;
  bool censored = false;
};

void tally(std::vector<std::int64_t>& h, std::int64_t v) {
  if (static_cast<std::int64_t>(h.size()) <= v) {
    h.resize(static_cast<std::size_t>(v + 1), 0);
  }
  ++h[static_cast<std::size_t>(v)];
}

std::int64_t fingerprint_of(const std::vector<std::int64_t>& values) {
  std::int64_t f = 0, base = 1;
  for (auto v : values) {
    f += std::min<std::int64_t>(v, 2) * base;
    base *= 3;
  }
  return f;
}

}  // namespace

CompareReport distribution_compare(const CompareConfig& cfg) {
  if (cfg.replicas < 1) {
    throw std::invalid_argument("distribution_compare: replicas must be >= 1");
  }
  if (cfg.window.hi < cfg.window.lo || cfg.window.width() > kMaxWindowWidth) {
    throw std::invalid_argument("distribution_compare: bad window");
  }
  const std::int64_t x = cfg.external_x - 1;
  const std::uint64_t chain_seed = chain_side_seed(cfg.master_seed);

  auto chain_draw = [&](std::uint64_t seed, std::int64_t r) {
    CounterRng rng(SeedPair{seed, static_cast<std::uint64_t>(r)});
    return Draw{sample_patched_profile(x, cfg.k, cfg.window, rng, cfg.seam).values,
                false};
  };

  auto walk = map_replicas(cfg.master_seed, cfg.replicas, cfg.workers,
                           [&](std::int64_t r) {
    if (cfg.null_check) return chain_draw(cfg.master_seed, r);
    const auto prof = walk_profile_sampler(
        cfg.external_x, cfg.k, cfg.window, cfg.cap,
        SeedPair{cfg.master_seed, static_cast<std::uint64_t>(r)});
    return Draw{prof.down_profile, prof.censored};
  });
  auto chain = map_replicas(chain_seed, cfg.replicas, cfg.workers,
                            [&](std::int64_t r) { return chain_draw(chain_seed, r); });

  CompareReport rep;
  rep.config = cfg;
  const auto width = static_cast<std::size_t>(cfg.window.width());
  rep.coordinates.resize(width);
  for (std::size_t i = 0; i < width; ++i) {
    rep.coordinates[i].y = cfg.window.lo + static_cast<std::int64_t>(i);
  }
  const bool joint = cfg.window.width() <= kMaxFingerprintWidth;
  std::vector<std::int64_t> fw, fc;
  for (const auto& d : walk) {
    if (d.censored) {
      ++rep.walk_censored;
      continue;
    }
    ++rep.walk_samples;
    for (std::size_t i = 0; i < width; ++i) {
      tally(rep.coordinates[i].walk_counts, d.values[i]);
    }
    if (joint) tally(fw, fingerprint_of(d.values));
  }
  for (const auto& d : chain) {
    ++rep.chain_samples;
    for (std::size_t i = 0; i < width; ++i) {
      tally(rep.coordinates[i].chain_counts, d.values[i]);
    }
    if (joint) tally(fc, fingerprint_of(d.values));
  }
  rep.censor_rate =
      static_cast<double>(rep.walk_censored) / static_cast<double>(cfg.replicas);
  rep.invalid = rep.censor_rate > kMaxCensorRate;

  const double tests = static_cast<double>(width);
  for (auto& c : rep.coordinates) {
    c.chi_square = stats::chi_square_two_sample(c.walk_counts, c.chain_counts);
    c.p_bonferroni = std::min(1.0, c.chi_square.p_value * tests);
    const auto pw = stats::normalise(c.walk_counts);
    const auto pc = stats::normalise(c.chain_counts);
    c.tv = stats::total_variation(pw, pc);
    rep.min_p_bonferroni = std::min(rep.min_p_bonferroni, c.p_bonferroni);
    rep.max_tv = std::max(rep.max_tv, c.tv);
  }
  if (joint) rep.fingerprint = stats::chi_square_two_sample(fw, fc);
  return rep;
}

namespace {

nlohmann::json chi_json(const stats::ChiSquareResult& c) {
  return {{"statistic", c.statistic},
          {"dof", c.dof},
          {"p_value", c.p_value},
          {"cells", c.cells}};
}

}  // namespace

nlohmann::json to_json(const CompareReport& r) {
  nlohmann::json coords = nlohmann::json::array();
  for (const auto& c : r.coordinates) {
    coords.push_back({{"y", c.y},
                      {"walk_counts", c.walk_counts},
                      {"chain_counts", c.chain_counts},
                      {"chi_square", chi_json(c.chi_square)},
                      {"p_bonferroni", c.p_bonferroni},
                      {"tv", c.tv}});
  }
  nlohmann::json j = {
      {"statistic", "xi_D(y, T_U(x-1, k+1)) vs patched branching profile"},
      {"x", r.config.external_x},
      {"k", r.config.k},
      {"window", {r.config.window.lo, r.config.window.hi}},
      {"replicas", r.config.replicas},
      {"cap", r.config.cap},
      {"seed", r.config.master_seed},
      {"seam", std::string(to_string(r.config.seam))},
      {"null_check", r.config.null_check},
      {"test", "chi-square two-sample, cells pooled to expected >= 5"},
      {"walk_samples", r.walk_samples},
      {"chain_samples", r.chain_samples},
      {"walk_censored", r.walk_censored},
      {"censor_rate", r.censor_rate},
      {"coordinates", coords},
      {"min_p_bonferroni", r.min_p_bonferroni},
      {"max_tv", r.max_tv},
      {"invalid", r.invalid}};
  if (r.fingerprint) j["fingerprint"] = chi_json(*r.fingerprint);
  return j;
}

}  // namespace favedge::rayknight
