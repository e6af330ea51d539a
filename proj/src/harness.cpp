#include "favedge/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "favedge/branching.hpp"
#include "favedge/embedding.hpp"
#include "favedge/parallel.hpp"
#include "favedge/rayknight.hpp"
#include "favedge/walk.hpp"

namespace favedge::harness {

namespace {

constexpr std::pair<Experiment, std::string_view> kNames[] = {
    {Experiment::count_events, "count-events"},
    {Experiment::hitting, "hitting"},
    {Experiment::lemma41, "lemma41"},
    {Experiment::rayknight, "rayknight"},
    {Experiment::embedding, "embedding"},
    {Experiment::transience, "transience"},
};

template <class T>
T param(const nlohmann::json& p, const char* key, T fallback) {
  if (!p.contains(key)) return fallback;
  return p.at(key).get<T>();
}

std::vector<std::int64_t> default_decades() {
  std::vector<std::int64_t> g;
  for (int i = 0; i <= 12; ++i) {
    g.push_back(static_cast<std::int64_t>(std::llround(std::pow(10.0, 3.0 + i / 4.0))));
  }
  return g;
}

stats::Estimate proportion(std::int64_t hits, std::int64_t total) {
  std::vector<double> xs(static_cast<std::size_t>(total), 0.0);
  std::fill_n(xs.begin(), std::min(hits, total), 1.0);
  return stats::estimate(xs);
}

}  // namespace

std::string_view to_string(Experiment e) {
  for (auto [k, v] : kNames) {
    if (k == e) return v;
  }
  return "?";
}

Experiment parse_experiment(std::string_view name) {
  for (auto [k, v] : kNames) {
    if (v == name) return k;
  }
  throw std::invalid_argument("unknown experiment: " + std::string(name));
}

ReplicaConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (k != "experiment" && k != "master_seed" && k != "replicas" &&
        k != "params" && k != "workers") {
      throw std::invalid_argument("unknown config key: " + k);
    }
  }
  ReplicaConfig c;
  c.experiment = parse_experiment(j.at("experiment").get<std::string>());
  c.master_seed = param<std::uint64_t>(j, "master_seed", c.master_seed);
  c.replicas = param<std::int64_t>(j, "replicas", c.replicas);
  c.workers = param<unsigned>(j, "workers", 0);
  if (j.contains("params")) c.params = j.at("params");
  if (!c.params.is_object()) throw std::invalid_argument("params must be an object");
  if (c.replicas < 2) throw std::invalid_argument("replicas must be >= 2");
  return c;
}

nlohmann::json to_json(const ReplicaConfig& c) {
  return {{"experiment", std::string(to_string(c.experiment))},
          {"master_seed", c.master_seed},
          {"replicas", c.replicas},
          {"params", c.params}};
}

ReplicaConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path);
  return config_from_json(nlohmann::json::parse(in));
}

nlohmann::json to_json(const EstimateRow& r) {
  return {{"statistic", r.statistic}, {"parameters", r.parameters},
          {"estimate", r.estimate},   {"se", r.se},
          {"replicas", r.replicas},   {"seed", r.seed}};
}

EstimateRow row_from_json(const nlohmann::json& j) {
  EstimateRow r;
  r.statistic = j.at("statistic").get<std::string>();
  r.parameters = j.at("parameters");
  r.estimate = j.at("estimate").is_null() ? std::nan("") : j.at("estimate").get<double>();
  r.se = j.at("se").is_null() ? std::nan("") : j.at("se").get<double>();
  r.replicas = j.at("replicas").get<std::int64_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  return r;
}

EstimateRow make_row(std::string statistic, nlohmann::json parameters,
                     const stats::Estimate& e, std::uint64_t seed) {
  return {std::move(statistic), std::move(parameters), e.mean, e.se, e.count, seed};
}

std::vector<events::PathCountReport> count_events_replicas(
    std::uint64_t master_seed, std::int64_t replicas,
    const events::CountConfig& config, unsigned workers) {
  return map_replicas(master_seed, replicas, workers, [&](std::int64_t r) {
    return events::count_path_events(
        SeedPair{master_seed, static_cast<std::uint64_t>(r)}, config);
  });
}

std::vector<CountSummary> summarize_counts(
    const std::vector<events::PathCountReport>& reports,
    const std::vector<std::int64_t>& H_grid) {
  std::vector<events::AuditSummary> audits;
  audits.reserve(reports.size());
  for (const auto& r : reports) audits.push_back(events::audit_containment_disjointness(r));
  std::vector<CountSummary> out;
  for (auto H : H_grid) {
    CountSummary s;
    s.H = H;
    std::vector<double> n, nt, nt2, ex;
    const double ll = std::log(std::log(static_cast<double>(H)));
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const auto& r = reports[i];
      if (H > r.config.H) throw std::invalid_argument("summarize_counts: H beyond the run");
      const auto a = static_cast<double>(r.N_at(H));
      const auto b = static_cast<double>(r.Ntilde_at(H));
      n.push_back(a);
      nt.push_back(b);
      nt2.push_back(b * b);
      ex.push_back(a > ll ? 1.0 : 0.0);
      if (r.censored) ++s.censored;
      const auto& au = audits[i];
      if (!au.order_violations.empty() && au.order_violations.front() <= H) {
        ++s.order_violation_paths;
      }
      for (const auto& e : au.containment_violations) {
        if (e.h <= H) ++s.containment_violations;
      }
      if (!au.disjointness_violations.empty() && au.disjointness_violations.front() <= H) {
        ++s.disjointness_violation_paths;
      }
    }
    s.N = stats::estimate(n);
    s.Ntilde = stats::estimate(nt);
    s.Ntilde_sq = stats::estimate(nt2);
    s.exceed_loglog = stats::estimate(ex);
    out.push_back(s);
  }
  return out;
}

stats::Estimate median_estimate(std::vector<double> xs) {
  stats::Estimate e;
  e.count = static_cast<std::int64_t>(xs.size());
  if (xs.empty()) {
    e.mean = e.se = std::nan("");
    return e;
  }
  std::sort(xs.begin(), xs.end());
  e.mean = stats::quantile(xs, 0.5);
  const double n = static_cast<double>(xs.size());
  const double half = 0.98 * std::sqrt(n);
  const auto lo = static_cast<std::size_t>(std::max(0.0, std::floor(n / 2 - half)));
  const auto hi = static_cast<std::size_t>(std::min(n - 1, std::ceil(n / 2 + half)));
  e.se = (xs[hi] - xs[lo]) / (2 * 1.96);
  return e;
}

std::vector<std::int64_t> dyadic_grid(std::int64_t lo, std::int64_t hi) {
  std::vector<std::int64_t> g;
  for (std::int64_t n = 1; n <= hi && n > 0; n *= 2) {
    if (n >= lo) g.push_back(n);
  }
  return g;
}

TransienceProfile transience_profile(std::uint64_t master_seed,
                                     std::int64_t replicas, double gamma,
                                     const std::vector<std::int64_t>& n_grid,
                                     unsigned workers) {
  if (!(gamma > 11.0)) throw std::invalid_argument("transience_profile: gamma must exceed 11");
  if (n_grid.empty() || !std::is_sorted(n_grid.begin(), n_grid.end()) ||
      n_grid.front() < 3) {
    throw std::invalid_argument("transience_profile: grid must be sorted and >= 3");
  }
  struct One {
    std::vector<double> tilde, u;
    std::int64_t bad = 0;
  };
  auto rows = map_replicas(master_seed, replicas, workers, [&](std::int64_t r) {
    const auto snaps = simulate(SeedPair{master_seed, static_cast<std::uint64_t>(r)},
                                n_grid.back(), n_grid);
    One o;
    for (const auto& s : snaps) {
      const double nd = static_cast<double>(s.state.n);
      const double scale = std::pow(std::log(nd), gamma) / std::sqrt(nd);
      o.tilde.push_back(static_cast<double>(s.min_abs_favorite_edge) * scale);
      o.u.push_back(static_cast<double>(s.min_abs_favorite_down_site) * scale);
      for (auto x : s.favorite_edges) {
        if (!std::binary_search(s.favorite_down_sites.begin(),
                                s.favorite_down_sites.end(), x - 1)) {
          ++o.bad;
          break;
        }
      }
    }
    return o;
  });
  TransienceProfile p;
  p.gamma = gamma;
  p.replicas = replicas;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    std::vector<double> t, u;
    for (const auto& o : rows) {
      t.push_back(o.tilde[i]);
      u.push_back(o.u[i]);
    }
    TransiencePoint pt;
    pt.n = n_grid[i];
    const auto mt = median_estimate(t);
    const auto mu = median_estimate(u);
    pt.median_tilde = mt.mean;
    pt.median_tilde_se = mt.se;
    pt.median_U = mu.mean;
    pt.median_U_se = mu.se;
    pt.p10_tilde = stats::quantile(t, 0.1);
    pt.p10_U = stats::quantile(u, 0.1);
    p.points.push_back(pt);
  }
  for (const auto& o : rows) p.prop24_violations += o.bad;
  p.probes = replicas * static_cast<std::int64_t>(n_grid.size());
  return p;
}

nlohmann::json to_json(const TransienceProfile& p) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& q : p.points) {
    pts.push_back({{"n", q.n},
                   {"median_tilde", q.median_tilde},
                   {"median_tilde_se", q.median_tilde_se},
                   {"p10_tilde", q.p10_tilde},
                   {"median_U", q.median_U},
                   {"median_U_se", q.median_U_se},
                   {"p10_U", q.p10_U}});
  }
  return {{"gamma", p.gamma},
          {"replicas", p.replicas},
          {"probes", p.probes},
          {"prop24_violations", p.prop24_violations},
          {"points", pts}};
}

std::vector<EstimateRow> run_replicas(const ReplicaConfig& c) {
  const auto& p = c.params;
  const std::uint64_t seed = c.master_seed;
  std::vector<EstimateRow> rows;
  switch (c.experiment) {
    case Experiment::count_events: {
      auto grid = param<std::vector<std::int64_t>>(p, "H_grid", {50, 100, 200, 400, 800});
      std::sort(grid.begin(), grid.end());
      events::CountConfig cfg;
      cfg.H = grid.back();
      cfg.h_min_N = param<std::int64_t>(p, "h_min_N", cfg.h_min_N);
      cfg.h_min_tilde = param<std::int64_t>(p, "h_min_tilde", cfg.h_min_tilde);
      cfg.budget = param<std::int64_t>(p, "budget", cfg.budget);
      if (param<std::string>(p, "window", "open") == "closed") {
        cfg.window = branching::WindowConvention::closed;
      }
      const auto reps = count_events_replicas(seed, c.replicas, cfg, c.workers);
      for (const auto& s : summarize_counts(reps, grid)) {
        const nlohmann::json at = {{"H", s.H}};
        rows.push_back(make_row("N", at, s.N, seed));
        rows.push_back(make_row("Ntilde", at, s.Ntilde, seed));
        rows.push_back(make_row("Ntilde_sq", at, s.Ntilde_sq, seed));
        rows.push_back(make_row("P(N>loglogH)", at, s.exceed_loglog, seed));
        rows.push_back(make_row("censor_rate", at, proportion(s.censored, c.replicas), seed));
        rows.push_back(make_row("order_violation_rate", at,
                                proportion(s.order_violation_paths, c.replicas), seed));
      }
      break;
    }
    case Experiment::hitting: {
      const auto k = param<std::int64_t>(p, "k", 0);
      for (auto h : param<std::vector<std::int64_t>>(p, "h_grid", {100, 400, 1600})) {
        const auto m = branching::hitting_moments(k, h, c.replicas, seed, c.workers);
        const nlohmann::json at = {{"k", k}, {"h", h}};
        rows.push_back(make_row("tau", at, m.tau, seed));
        rows.push_back(make_row("Z_tau", at, m.level, seed));
        rows.push_back(make_row("residual", at, m.residual, seed));
        rows.push_back(make_row("censor_rate", at, proportion(m.censored, c.replicas), seed));
      }
      break;
    }
    case Experiment::lemma41: {
      for (auto h : param<std::vector<std::int64_t>>(p, "h_grid", {100, 400, 1600, 6400})) {
        const auto k = p.contains("k") ? p.at("k").get<std::int64_t>()
                                       : branching::k_window_midpoint(h);
        const auto e = branching::lemma41_statistic(k, h, c.replicas, seed, c.workers);
        const nlohmann::json at = {{"k", k}, {"h", h}};
        rows.push_back(make_row("lemma41_direct", at, e.direct, seed));
        rows.push_back(make_row("lemma41_identity", at, e.stopped_identity, seed));
      }
      break;
    }
    case Experiment::rayknight: {
      rayknight::CompareConfig rc;
      rc.external_x = param<std::int64_t>(p, "x", 3);
      rc.k = param<std::int64_t>(p, "k", 0);
      const auto w = param<std::vector<std::int64_t>>(p, "window", {-2, rc.external_x + 3});
      if (w.size() != 2) throw std::invalid_argument("window must be [lo, hi]");
      rc.window = Window{w[0], w[1]};
      rc.replicas = c.replicas;
      rc.cap = param<std::int64_t>(p, "cap", rc.cap);
      rc.master_seed = seed;
      rc.workers = c.workers;
      rc.seam = rayknight::parse_seam(param<std::string>(p, "seam", "corrected"));
      const auto rep = rayknight::distribution_compare(rc);
      for (const auto& co : rep.coordinates) {
        auto mean_of = [](const std::vector<std::int64_t>& counts) {
          std::vector<double> xs;
          for (std::size_t v = 0; v < counts.size(); ++v) {
            xs.insert(xs.end(), static_cast<std::size_t>(counts[v]), static_cast<double>(v));
          }
          return stats::estimate(xs);
        };
        const nlohmann::json at = {{"x", rc.external_x}, {"k", rc.k}, {"y", co.y}};
        rows.push_back(make_row("walk_mean", at, mean_of(co.walk_counts), seed));
        rows.push_back(make_row("chain_mean", at, mean_of(co.chain_counts), seed));
      }
      rows.push_back(make_row("censor_rate", {{"x", rc.external_x}, {"k", rc.k}},
                              proportion(rep.walk_censored, c.replicas), seed));
      break;
    }
    case Experiment::embedding: {
      embedding::EmbeddingOptions o;
      o.m = param<int>(p, "m", o.m);
      o.coarse_steps = param<std::int64_t>(p, "coarse_steps", o.coarse_steps);
      o.n_grid = param<std::vector<std::int64_t>>(p, "n_grid", default_decades());
      o.keep_increments = false;
      std::erase_if(o.n_grid, [&](std::int64_t n) { return n > o.coarse_steps; });
      auto traces = map_replicas(seed, c.replicas, c.workers, [&](std::int64_t r) {
        return embedding::simulate_embedding(SeedPair{seed, static_cast<std::uint64_t>(r)}, o);
      });
      std::vector<double> tau, sig;
      for (const auto& t : traces) {
        tau.push_back(t.tau.mean);
        sig.push_back(t.sigma2);
      }
      rows.push_back(make_row("tau_increment", {{"m", o.m}}, stats::estimate(tau), seed));
      rows.push_back(make_row("tau_variance", {{"m", o.m}}, stats::estimate(sig), seed));
      for (std::size_t i = 0; i < o.n_grid.size(); ++i) {
        std::vector<double> a, b;
        for (const auto& t : traces) {
          a.push_back(t.discrepancy[i].coupled);
          b.push_back(t.discrepancy[i].at_time);
        }
        const nlohmann::json at = {{"m", o.m}, {"n", o.n_grid[i]}};
        rows.push_back(make_row("D_coupled", at, stats::estimate(a), seed));
        rows.push_back(make_row("D_at_time", at, stats::estimate(b), seed));
      }
      const auto block_reps = param<std::int64_t>(p, "block_replicas", 0);
      if (block_reps > 0) {
        const auto b = embedding::block_distribution(seed, block_reps, embedding::kBlockCap, c.workers);
        rows.push_back(make_row("block_p01", {}, b.p01, seed));
        rows.push_back(make_row("block_p10", {}, b.p10, seed));
        rows.push_back(make_row("block_mean", {}, b.mean, seed));
      }
      break;
    }
    case Experiment::transience: {
      const double gamma = param<double>(p, "gamma", 12.0);
      const auto grid = p.contains("n_grid")
                            ? p.at("n_grid").get<std::vector<std::int64_t>>()
                            : dyadic_grid(param<std::int64_t>(p, "n_min", 10'000),
                                          param<std::int64_t>(p, "n_max", 10'000'000));
      const auto tp = transience_profile(seed, c.replicas, gamma, grid, c.workers);
      for (const auto& q : tp.points) {
        const nlohmann::json at = {{"gamma", gamma}, {"n", q.n}};
        rows.push_back({"median_Utilde_scaled", at, q.median_tilde, q.median_tilde_se,
                        c.replicas, seed});
        rows.push_back({"median_U_scaled", at, q.median_U, q.median_U_se, c.replicas, seed});
      }
      rows.push_back(make_row("prop24_violation_rate", {{"gamma", gamma}},
                              proportion(tp.prop24_violations, tp.probes), seed));
      break;
    }
  }
  return rows;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& r : rows) {
    if (r.size() != header.size()) throw std::invalid_argument("write_csv: ragged row");
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_number(r[i]);
    os << '\n';
  }
}

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  if (!std::getline(is, line)) throw std::invalid_argument("read_csv: empty input");
  t.header = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split(line)) {
      double v = 0.0;
      if (cell == "nan") v = std::numeric_limits<double>::quiet_NaN();
      else if (cell == "inf") v = std::numeric_limits<double>::infinity();
      else if (cell == "-inf") v = -std::numeric_limits<double>::infinity();
      else {
        auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (r.ec != std::errc{} || r.ptr != cell.data() + cell.size()) {
          throw std::invalid_argument("read_csv: bad number " + cell);
        }
      }
      row.push_back(v);
    }
    if (row.size() != t.header.size()) throw std::invalid_argument("read_csv: ragged row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace favedge::harness
