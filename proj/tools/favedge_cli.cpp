#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "favedge/branching.hpp"
#include "favedge/embedding.hpp"
#include "favedge/event_counters.hpp"
#include "favedge/exact_oracle.hpp"
#include "favedge/harness.hpp"
#include "favedge/parallel.hpp"
#include "favedge/rayknight.hpp"
#include "favedge/walk.hpp"

namespace {

using nlohmann::json;
using namespace favedge;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kFlagged = 2;

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw UsageError("--out: cannot open " + path);
    }
  }
  std::ostream& os() { return file_ ? *file_ : std::cout; }
  void line(const json& j) { os() << j.dump() << '\n'; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

struct Common {
  std::uint64_t seed = 1;
  std::string out;
  std::string config;
  unsigned workers = 0;
};

void add_common(CLI::App* s, Common& c, bool with_config) {
  s->add_option("--seed", c.seed, "master seed");
  s->add_option("--out", c.out, "output path (default stdout)");
  s->add_option("--workers", c.workers, "worker threads (0 = all cores)");
  if (with_config) s->add_option("--config", c.config, "JSON replica config");
}

Window parse_window(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw UsageError("--window: expected lo:hi, got " + s);
  try {
    std::size_t a = 0, b = 0;
    const std::string lo = s.substr(0, colon), hi = s.substr(colon + 1);
    Window w{std::stoll(lo, &a), std::stoll(hi, &b)};
    if (a != lo.size() || b != hi.size() || w.lo > w.hi) throw std::invalid_argument(s);
    return w;
  } catch (const std::exception&) {
    throw UsageError("--window: expected lo:hi with lo <= hi, got " + s);
  }
}

// Runs a --config file through the harness; the experiment must belong to
// the subcommand. An explicit --seed overrides the file's master seed.
int run_config(const Common& c, bool seed_given,
               std::initializer_list<harness::Experiment> allowed,
               const std::string& sub) {
  auto cfg = harness::load_config(c.config);
  bool ok = false;
  for (auto e : allowed) ok = ok || e == cfg.experiment;
  if (!ok) {
    throw UsageError("--config: experiment " + std::string(to_string(cfg.experiment)) +
                     " does not belong to " + sub);
  }
  if (seed_given) cfg.master_seed = c.seed;
  if (c.workers) cfg.workers = c.workers;
  Sink out(c.out);
  for (const auto& r : harness::run_replicas(cfg)) out.line(harness::to_json(r));
  return kOk;
}

json snapshot_json(const SeedPair& s, const WalkSnapshot& w) {
  return {{"seed", s.master_seed},
          {"stream", s.stream_index},
          {"n", w.state.n},
          {"position", w.state.position},
          {"favorite_edges", w.favorite_edges},
          {"favorite_down_sites", w.favorite_down_sites},
          {"Utilde", w.min_abs_favorite_edge},
          {"U", w.min_abs_favorite_down_site}};
}

// --- report -------------------------------------------------------------

int report(const std::string& in_path, Sink& out) {
  std::ifstream in(in_path, std::ios::binary);
  if (!in) throw UsageError("--in: cannot open " + in_path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw UsageError("--in: empty file");

  if (text[first] != '{') {
    std::istringstream is(text);
    const auto t = harness::read_csv(is);
    json cols = json::array();
    for (std::size_t c = 0; c < t.header.size(); ++c) {
      std::vector<double> xs;
      for (const auto& r : t.rows) xs.push_back(r[c]);
      const auto e = stats::estimate(xs);
      cols.push_back({{"column", t.header[c]}, {"mean", e.mean}, {"se", e.se}});
    }
    out.line({{"kind", "csv"}, {"rows", t.rows.size()}, {"columns", cols}});
    return kOk;
  }

  std::vector<json> records;
  std::istringstream is(text);
  std::string line;
  bool single = false;
  try {
    records.push_back(json::parse(text));
    single = true;
  } catch (const json::parse_error&) {
    while (std::getline(is, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      records.push_back(json::parse(line));
    }
  }
  const json& head = records.front();
  bool flagged = false;
  json summary;
  if (head.contains("statistic") && head.contains("se")) {
    json rows = json::array();
    for (const auto& r : records) rows.push_back(harness::to_json(harness::row_from_json(r)));
    summary = {{"kind", "estimate-rows"}, {"rows", rows}};
  } else if (head.contains("Ntilde")) {
    const auto H = head.at("H").get<std::int64_t>();
    std::vector<double> n, nt;
    std::int64_t censored = 0, order = 0;
    for (const auto& r : records) {
      const auto& N = r.at("N");
      const auto& Nt = r.at("Ntilde");
      n.push_back(N.back().get<double>());
      nt.push_back(Nt.back().get<double>());
      censored += r.at("censored").get<bool>() ? 1 : 0;
      for (std::size_t h = 0; h < N.size(); ++h) {
        if (N[h].get<std::int64_t>() > Nt[h].get<std::int64_t>()) {
          ++order;
          break;
        }
      }
    }
    const auto en = stats::estimate(n), ent = stats::estimate(nt);
    const double rate = static_cast<double>(censored) / static_cast<double>(records.size());
    flagged = rate > rayknight::kMaxCensorRate;
    summary = {{"kind", "count-events"},
               {"paths", records.size()},
               {"H", H},
               {"N", {{"estimate", en.mean}, {"se", en.se}}},
               {"Ntilde", {{"estimate", ent.mean}, {"se", ent.se}}},
               {"paths_with_N_above_Ntilde", order},
               {"censor_rate", rate},
               {"invalid", flagged}};
  } else if (head.contains("coordinates")) {
    flagged = head.at("invalid").get<bool>();
    summary = {{"kind", "rayknight"},
               {"x", head.at("x")},
               {"k", head.at("k")},
               {"min_p_bonferroni", head.at("min_p_bonferroni")},
               {"max_tv", head.at("max_tv")},
               {"censor_rate", head.at("censor_rate")},
               {"invalid", flagged}};
  } else if (head.contains("prop24_violations")) {
    flagged = head.at("prop24_violations").get<std::int64_t>() > 0;
    summary = {{"kind", "transience"}, {"points", head.at("points").size()},
               {"prop24_violations", head.at("prop24_violations")}};
  } else if (head.contains("numerators")) {
    auto d = head.get<oracle::ExactDistribution>();
    summary = {{"kind", "oracle"}, {"statistic", d.statistic}, {"n", d.n},
               {"support", d.support}};
  } else {
    summary = {{"kind", single ? "json" : "json-lines"}, {"records", records.size()}};
    if (head.contains("flagged")) flagged = head.at("flagged").get<bool>();
  }
  out.line(summary);
  return flagged ? kFlagged : kOk;
}

int run(int argc, char** argv) {
  CLI::App app{"Favorite edges of simple random walk: simulation and exact checks"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // simulate
  Common sim_c;
  std::int64_t sim_steps = 1000, sim_replicas = 1;
  std::uint64_t sim_stream = 0;
  std::vector<std::int64_t> sim_probes;
  bool sim_audit = false;
  std::int64_t sim_sweeps = 16;
  auto* sim = app.add_subcommand("simulate", "run walks and snapshot favorites");
  add_common(sim, sim_c, false);
  sim->add_option("--steps", sim_steps)->check(CLI::PositiveNumber);
  sim->add_option("--replicas", sim_replicas)->check(CLI::PositiveNumber);
  sim->add_option("--stream", sim_stream, "first stream index");
  sim->add_option("--probes", sim_probes, "probe times (default: --steps)")->delimiter(',');
  sim->add_flag("--audit", sim_audit, "check the crossing identities at every step");
  sim->add_option("--sweeps", sim_sweeps, "full sweeps per audited run");

  // oracle
  Common or_c;
  int or_n = 3;
  std::string or_stat = "favorites";
  auto* orc = app.add_subcommand("oracle", "exact laws by path enumeration");
  add_common(orc, or_c, false);
  orc->add_option("--n", or_n)->check(CLI::Range(1, oracle::kMaxEnumerationHorizon));
  orc->add_option("--stat", or_stat,
                  "favorites | down-favorites | min-abs-favorite | f3-count | identity-violations");

  // kernels
  Common ke_c;
  std::string ke_kind = "plain", ke_check, ke_sampler = "geometric";
  std::int64_t ke_row = 1, ke_jmax = 20, ke_imax = 200, ke_h = 100, ke_kmax = 5,
               ke_nmax = 6, ke_samples = 100000, ke_cap = 400;
  auto* ker = app.add_subcommand("kernels", "offspring kernels, samplers and exact checks");
  add_common(ker, ke_c, true);
  ker->add_option("--kind", ke_kind, "plain | immigrant | shifted-immigrant");
  ker->add_option("--row", ke_row)->check(CLI::NonNegativeNumber);
  ker->add_option("--j-max", ke_jmax)->check(CLI::NonNegativeNumber);
  ker->add_option("--check", ke_check,
                  "row-sums | bands | martingales | monotonicity | sample");
  ker->add_option("--i-max", ke_imax)->check(CLI::NonNegativeNumber);
  ker->add_option("--height", ke_h, "h for the band check")->check(CLI::PositiveNumber);
  ker->add_option("--k-max", ke_kmax)->check(CLI::NonNegativeNumber);
  ker->add_option("--n-max", ke_nmax)->check(CLI::PositiveNumber);
  ker->add_option("--cap", ke_cap, "state cap for exact kernel powers")->check(CLI::PositiveNumber);
  ker->add_option("--samples", ke_samples)->check(CLI::PositiveNumber);
  ker->add_option("--sampler", ke_sampler, "geometric | inverse-cdf");

  // rayknight-test
  Common rk_c;
  std::int64_t rk_x = 3, rk_k = 0, rk_replicas = 10000, rk_cap = kDefaultStopCap;
  std::string rk_window = "0:0", rk_seam = "corrected";
  bool rk_null = false;
  auto* rk = app.add_subcommand("rayknight-test", "stopped walk profile vs branching construction");
  add_common(rk, rk_c, true);
  rk->add_option("--x", rk_x);
  rk->add_option("--k", rk_k)->check(CLI::NonNegativeNumber);
  rk->add_option("--window", rk_window, "lo:hi");
  rk->add_option("--replicas", rk_replicas)->check(CLI::PositiveNumber);
  rk->add_option("--cap", rk_cap)->check(CLI::PositiveNumber);
  rk->add_option("--seam", rk_seam, "corrected | literal");
  rk->add_flag("--null-check", rk_null, "compare two independent walk samples");

  // count-events
  Common ce_c;
  std::int64_t ce_replicas = 100, ce_H = 200, ce_hminN = 8, ce_hmint = 50,
               ce_budget = 2'000'000'000, ce_overrun = 0;
  std::string ce_window = "open";
  auto* ce = app.add_subcommand("count-events", "triple-favorite event counts per path");
  add_common(ce, ce_c, true);
  ce->add_option("--replicas", ce_replicas)->check(CLI::PositiveNumber);
  ce->add_option("--H", ce_H)->check(CLI::PositiveNumber);
  ce->add_option("--h-min-N", ce_hminN)->check(CLI::PositiveNumber);
  ce->add_option("--h-min-tilde", ce_hmint)->check(CLI::PositiveNumber);
  ce->add_option("--k-window", ce_window, "open | closed");
  ce->add_option("--budget", ce_budget)->check(CLI::PositiveNumber);
  ce->add_option("--overrun", ce_overrun)->check(CLI::NonNegativeNumber);

  // embed
  Common em_c;
  std::string em_mode = "trace", em_format = "json";
  int em_m = 64;
  std::int64_t em_steps = 100000, em_replicas = 1, em_cap = embedding::kBlockCap;
  std::uint64_t em_stream = 0;
  std::vector<std::int64_t> em_grid, em_eta;
  auto* em = app.add_subcommand("embed", "embedded walk in a fine Wiener proxy");
  add_common(em, em_c, true);
  em->add_option("--mode", em_mode, "trace | neighbor | block | kesten");
  em->add_option("--m", em_m)->check(CLI::Range(embedding::kMinResolution, embedding::kMaxResolution));
  em->add_option("--steps", em_steps)->check(CLI::PositiveNumber);
  em->add_option("--stream", em_stream);
  em->add_option("--grid", em_grid)->delimiter(',');
  em->add_option("--eta-times", em_eta)->delimiter(',');
  em->add_option("--replicas", em_replicas)->check(CLI::PositiveNumber);
  em->add_option("--cap", em_cap)->check(CLI::PositiveNumber);
  em->add_option("--format", em_format, "json | csv");

  // transience
  Common tr_c;
  std::int64_t tr_replicas = 200, tr_nmin = 10'000, tr_nmax = 10'000'000;
  double tr_gamma = 12.0;
  std::string tr_format = "json";
  auto* tr = app.add_subcommand("transience", "normalized distance of the favorite edge");
  add_common(tr, tr_c, true);
  tr->add_option("--replicas", tr_replicas)->check(CLI::PositiveNumber);
  tr->add_option("--gamma", tr_gamma);
  tr->add_option("--n-min", tr_nmin)->check(CLI::PositiveNumber);
  tr->add_option("--n-max", tr_nmax)->check(CLI::PositiveNumber);
  tr->add_option("--format", tr_format, "json | csv");

  // report
  Common re_c;
  std::string re_in;
  auto* re = app.add_subcommand("report", "summarize an emitted JSON, JSON-lines or CSV file");
  add_common(re, re_c, false);
  re->add_option("--in", re_in)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  auto seed_given = [](CLI::App* s) { return s->count("--seed") > 0; };
  auto check_format = [](const std::string& f) {
    if (f != "json" && f != "csv") throw UsageError("--format: expected json or csv, got " + f);
  };

  if (*sim) {
    Sink out(sim_c.out);
    if (sim_audit) {
      bool bad = false;
      for (std::int64_t r = 0; r < sim_replicas; ++r) {
        const SeedPair s{sim_c.seed, sim_stream + static_cast<std::uint64_t>(r)};
        const auto a = audited_run(s, sim_steps, sim_sweeps);
        bad = bad || a.identity_violations || a.prop24_violations || a.favorite_set_mismatches;
        out.line({{"seed", s.master_seed},
                  {"stream", s.stream_index},
                  {"steps", a.steps},
                  {"identity_checks", a.identity_checks},
                  {"identity_violations", a.identity_violations},
                  {"prop24_checks", a.prop24_checks},
                  {"prop24_violations", a.prop24_violations},
                  {"full_sweeps", a.full_sweeps},
                  {"favorite_set_mismatches", a.favorite_set_mismatches}});
      }
      return bad ? kFlagged : kOk;
    }
    if (sim_probes.empty()) sim_probes.push_back(sim_steps);
    std::sort(sim_probes.begin(), sim_probes.end());
    if (sim_probes.front() < 1 || sim_probes.back() > sim_steps) {
      throw UsageError("--probes: times must lie in [1, --steps]");
    }
    for (std::int64_t r = 0; r < sim_replicas; ++r) {
      const SeedPair s{sim_c.seed, sim_stream + static_cast<std::uint64_t>(r)};
      for (const auto& w : simulate(s, sim_steps, sim_probes)) out.line(snapshot_json(s, w));
    }
    return kOk;
  }

  if (*orc) {
    const auto d = oracle::enumerate(or_n, oracle::parse_statistic(or_stat), or_c.workers);
    json j = d;
    json fr = json::array(), pr = json::array();
    const auto den = std::uint64_t{1} << d.denominator_log2;
    for (std::size_t i = 0; i < d.support.size(); ++i) {
      fr.push_back(std::to_string(d.numerators[i]) + "/" + std::to_string(den));
      pr.push_back(d.mass(d.support[i]));
    }
    j["fractions"] = fr;
    j["probabilities"] = pr;
    Sink(or_c.out).line(j);
    return kOk;
  }

  if (*ker) {
    if (!ke_c.config.empty()) {
      return run_config(ke_c, seed_given(ker),
                        {harness::Experiment::hitting, harness::Experiment::lemma41}, "kernels");
    }
    Sink out(ke_c.out);
    const auto kind = branching::parse_kernel(ke_kind);
    if (ke_check.empty()) {
      std::vector<double> p;
      for (std::int64_t j = 0; j <= ke_jmax; ++j) p.push_back(branching::kernel_eval(kind, ke_row, j));
      out.line({{"kind", std::string(branching::to_string(kind))},
                {"i", ke_row},
                {"p", p},
                {"row_sum_error", branching::row_sum_error(kind, ke_row)}});
      return kOk;
    }
    if (ke_check == "row-sums") {
      for (auto k : {branching::KernelKind::plain, branching::KernelKind::immigrant,
                     branching::KernelKind::shifted_immigrant}) {
        double worst = 0.0;
        for (std::int64_t i = 0; i <= ke_imax; ++i) {
          worst = std::max(worst, branching::row_sum_error(k, i));
        }
        out.line({{"check", "row-sums"}, {"kind", std::string(branching::to_string(k))},
                  {"i_max", ke_imax}, {"max_error", worst}});
      }
    } else if (ke_check == "bands") {
      const auto b = branching::kernel_bands(ke_h);
      out.line({{"check", "bands"}, {"h", b.h}, {"min_scaled", b.min_scaled},
                {"max_scaled", b.max_scaled},
                {"antidiagonal_max_scaled", b.antidiagonal_max_scaled},
                {"min_scaled_near_diagonal", b.min_scaled_near_diagonal}});
    } else if (ke_check == "martingales") {
      for (std::int64_t k = 0; k <= ke_kmax; ++k) {
        for (std::int64_t n = 1; n <= ke_nmax; ++n) {
          const auto m = branching::martingale_checks(k, n, ke_cap);
          out.line({{"check", "martingales"}, {"k", k}, {"n", n}, {"E_M", m.m},
                    {"E_M_prime", m.m_prime}, {"target_M_prime", -0.25 * double(k * k)},
                    {"overflow", m.overflow}, {"low_precision", m.low_precision}});
        }
      }
    } else if (ke_check == "monotonicity") {
      out.line({{"check", "monotonicity"}, {"i_max", ke_imax},
                {"violations", branching::monotonicity_violations(ke_imax)}});
    } else if (ke_check == "sample") {
      const auto sampler = ke_sampler == "geometric" ? branching::Sampler::sum_of_geometrics
                           : ke_sampler == "inverse-cdf"
                               ? branching::Sampler::inverse_cdf
                               : throw UsageError("--sampler: expected geometric or inverse-cdf");
      const auto draws = map_replicas(ke_c.seed, ke_samples, ke_c.workers, [&](std::int64_t r) {
        CounterRng rng(SeedPair{ke_c.seed, static_cast<std::uint64_t>(r)});
        return branching::kernel_sample(kind, ke_row, rng, sampler);
      });
      std::int64_t top = 0;
      for (auto d : draws) top = std::max(top, d);
      const auto counts = stats::histogram(draws, top);
      std::vector<double> probs;
      for (std::int64_t j = 0; j <= top; ++j) probs.push_back(branching::kernel_eval(kind, ke_row, j));
      const auto chi = stats::chi_square_gof(counts, probs);
      out.line({{"check", "sample"}, {"kind", std::string(branching::to_string(kind))},
                {"i", ke_row}, {"sampler", ke_sampler}, {"samples", ke_samples},
                {"chi_square", chi.statistic}, {"dof", chi.dof}, {"p_value", chi.p_value}});
    } else {
      throw UsageError("--check: unknown check " + ke_check);
    }
    return kOk;
  }

  if (*rk) {
    if (!rk_c.config.empty()) {
      return run_config(rk_c, seed_given(rk), {harness::Experiment::rayknight}, "rayknight-test");
    }
    rayknight::CompareConfig cfg;
    cfg.external_x = rk_x;
    cfg.k = rk_k;
    cfg.window = parse_window(rk_window);
    cfg.replicas = rk_replicas;
    cfg.cap = rk_cap;
    cfg.master_seed = rk_c.seed;
    cfg.workers = rk_c.workers;
    cfg.seam = rayknight::parse_seam(rk_seam);
    cfg.null_check = rk_null;
    const auto rep = rayknight::distribution_compare(cfg);
    Sink(rk_c.out).line(rayknight::to_json(rep));
    return rep.invalid ? kFlagged : kOk;
  }

  if (*ce) {
    if (!ce_c.config.empty()) {
      return run_config(ce_c, seed_given(ce), {harness::Experiment::count_events}, "count-events");
    }
    events::CountConfig cfg;
    cfg.H = ce_H;
    cfg.h_min_N = ce_hminN;
    cfg.h_min_tilde = ce_hmint;
    cfg.budget = ce_budget;
    cfg.overrun_factor = ce_overrun;
    if (ce_window == "closed") cfg.window = branching::WindowConvention::closed;
    else if (ce_window != "open") throw UsageError("--k-window: expected open or closed");
    const auto reps = harness::count_events_replicas(ce_c.seed, ce_replicas, cfg, ce_c.workers);
    Sink out(ce_c.out);
    std::int64_t censored = 0;
    for (const auto& r : reps) {
      censored += r.censored ? 1 : 0;
      out.line(events::to_json(r));
    }
    const double rate = static_cast<double>(censored) / static_cast<double>(ce_replicas);
    return rate > rayknight::kMaxCensorRate ? kFlagged : kOk;
  }

  if (*em) {
    if (!em_c.config.empty()) {
      return run_config(em_c, seed_given(em), {harness::Experiment::embedding}, "embed");
    }
    check_format(em_format);
    Sink out(em_c.out);
    const bool csv = em_format == "csv";
    if (em_mode == "trace") {
      embedding::EmbeddingOptions o;
      o.m = em_m;
      o.coarse_steps = em_steps;
      o.n_grid = em_grid;
      o.eta_times = em_eta;
      o.keep_increments = false;
      std::sort(o.n_grid.begin(), o.n_grid.end());
      std::sort(o.eta_times.begin(), o.eta_times.end());
      const auto t = embedding::simulate_embedding(SeedPair{em_c.seed, em_stream}, o);
      if (csv) {
        std::vector<std::vector<double>> rows;
        for (const auto& d : t.discrepancy) rows.push_back({double(d.n), d.coupled, d.at_time});
        harness::write_csv(out.os(), {"n", "D_coupled", "D_at_time"}, rows);
        return kOk;
      }
      json disc = json::array(), eta = json::array();
      for (const auto& d : t.discrepancy) {
        disc.push_back({{"n", d.n}, {"coupled", d.coupled}, {"at_time", d.at_time}});
      }
      for (const auto& s : t.eta) {
        eta.push_back({{"t", s.t}, {"window", {s.window.lo, s.window.hi}},
                       {"eta", s.eta}, {"eta_right", s.eta_right}});
      }
      out.line({{"seed", em_c.seed}, {"stream", em_stream}, {"m", t.m},
                {"coarse_steps", t.coarse_steps}, {"fine_steps", t.fine_steps},
                {"tau_mean", t.tau.mean}, {"tau_se", t.tau.se}, {"sigma2", t.sigma2},
                {"discrepancy", disc}, {"eta", eta}});
      return kOk;
    }
    if (em_mode == "neighbor") {
      if (em_grid.empty()) throw UsageError("--grid is required for --mode neighbor");
      std::sort(em_grid.begin(), em_grid.end());
      const auto g = embedding::neighbor_gap_curve(em_c.seed, em_replicas, em_grid, em_c.workers);
      if (csv) {
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < g.n.size(); ++i) {
          rows.push_back({double(g.n[i]), g.median_gap.value[i], g.fourth_moment_ratio[i].mean,
                          g.fourth_moment_ratio[i].se});
        }
        harness::write_csv(out.os(), {"n", "median_gap", "fourth_ratio", "fourth_ratio_se"}, rows);
        return kOk;
      }
      json j = {{"seed", em_c.seed}, {"seeds", em_replicas}, {"n", g.n},
                {"median_gap", g.median_gap.value}};
      if (g.median_gap.fit) j["median_gap_slope"] = g.median_gap.fit->slope;
      if (g.fourth_moment_trend) j["fourth_moment_slope"] = g.fourth_moment_trend->slope;
      out.line(j);
      return kOk;
    }
    if (em_mode == "block") {
      const auto b = embedding::block_distribution(em_c.seed, em_replicas, em_cap, em_c.workers);
      if (csv) {
        std::vector<std::vector<double>> rows;
        const auto p = b.pmf();
        for (std::size_t k = 0; k < p.size(); ++k) {
          rows.push_back({double(k), double(b.counts[k]), p[k],
                          embedding::block_pmf(static_cast<std::int64_t>(k))});
        }
        harness::write_csv(out.os(), {"k", "count", "empirical", "exact"}, rows);
      } else {
        out.line({{"seed", em_c.seed}, {"replicas", em_replicas}, {"samples", b.samples},
                  {"censored", b.censored}, {"censor_rate", b.censor_rate},
                  {"flagged", b.flagged}, {"counts", b.counts},
                  {"p01", b.p01.mean}, {"p01_se", b.p01.se},
                  {"p10", b.p10.mean}, {"p10_se", b.p10.se},
                  {"mean", b.mean.mean}, {"mean_se", b.mean.se}});
      }
      return b.flagged ? kFlagged : kOk;
    }
    if (em_mode == "kesten") {
      const auto r = embedding::kesten_ratios(em_c.seed, em_replicas, em_steps, em_c.workers);
      if (csv) {
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < r.size(); ++i) rows.push_back({double(i), r[i]});
        harness::write_csv(out.os(), {"stream", "ratio"}, rows);
      } else {
        out.line({{"seed", em_c.seed}, {"n", em_steps}, {"ratios", r}});
      }
      return kOk;
    }
    throw UsageError("--mode: unknown mode " + em_mode);
  }

  if (*tr) {
    if (!tr_c.config.empty()) {
      return run_config(tr_c, seed_given(tr), {harness::Experiment::transience}, "transience");
    }
    check_format(tr_format);
    const auto grid = harness::dyadic_grid(tr_nmin, tr_nmax);
    const auto p = harness::transience_profile(tr_c.seed, tr_replicas, tr_gamma, grid, tr_c.workers);
    Sink out(tr_c.out);
    if (tr_format == "csv") {
      std::vector<std::vector<double>> rows;
      for (const auto& q : p.points) {
        rows.push_back({double(q.n), q.median_tilde, q.p10_tilde, q.median_U, q.p10_U});
      }
      harness::write_csv(out.os(), {"n", "median_Utilde", "p10_Utilde", "median_U", "p10_U"}, rows);
    } else {
      out.line(harness::to_json(p));
    }
    return p.prop24_violations > 0 ? kFlagged : kOk;
  }

  if (*re) {
    Sink out(re_c.out);
    return report(re_in, out);
  }
  return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const favedge::ReplicaError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}
