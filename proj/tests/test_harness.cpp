#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <sstream>

#include "favedge/harness.hpp"
#include "favedge/parallel.hpp"
#include "favedge/rng.hpp"

using namespace favedge;
using namespace favedge::harness;

TEST_SUITE("stats-harness") {

TEST_CASE("fits are exact on model data") {
  std::vector<double> x, y, z;
  for (double v : {2.0, 5.0, 11.0, 40.0, 1000.0}) {
    x.push_back(v);
    y.push_back(2.0 + 3.0 * std::log(v));
    z.push_back(std::pow(v, 0.25));
  }
  const auto a = stats::fit(stats::FitModel::linear_in_log, x, y);
  CHECK(a.slope == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(a.intercept == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(a.correlation == doctest::Approx(1.0));
  const auto b = stats::fit(stats::FitModel::log_log, x, z);
  CHECK(std::abs(b.slope - 0.25) < 1e-12);
  const std::vector<double> same{3.0, 3.0, 3.0};
  CHECK_THROWS_AS(stats::fit(stats::FitModel::log_log, same, same), std::invalid_argument);
  const std::vector<double> two{1.0, 2.0};
  CHECK_THROWS_AS(stats::fit(stats::FitModel::log_log, two, two), std::invalid_argument);
}

TEST_CASE("a fair sign has mean zero") {
  const auto xs = map_replicas(3, 10'000, 0, [](std::int64_t r) {
    CounterRng rng(SeedPair{3, static_cast<std::uint64_t>(r)});
    return (rng() & 1u) ? 1.0 : -1.0;
  });
  const auto e = stats::estimate(xs);
  CHECK(e.count == 10'000);
  CHECK(e.within(0.0, 3.0));
}

TEST_CASE("replica errors name their stream") {
  try {
    map_replicas(5, 20, 2, [](std::int64_t r) {
      if (r == 13) throw std::runtime_error("boom");
      return r;
    });
    FAIL("no exception");
  } catch (const ReplicaError& e) {
    CHECK(e.stream() == 13);
    CHECK(std::string(e.what()).find("stream 13") != std::string::npos);
  }
}

TEST_CASE("config parsing") {
  const auto c = config_from_json(nlohmann::json::parse(
      R"({"experiment":"hitting","master_seed":4,"replicas":50,"params":{"k":1}})"));
  CHECK(c.experiment == Experiment::hitting);
  CHECK(c.master_seed == 4);
  CHECK(c.replicas == 50);
  CHECK(config_from_json(to_json(c)).params == c.params);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"experiment":"nope"})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(
                      R"({"experiment":"hitting","replicas":1})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(
                      R"({"experiment":"hitting","extra":1})")),
                  std::invalid_argument);
  for (auto e : {Experiment::count_events, Experiment::hitting, Experiment::lemma41,
                 Experiment::rayknight, Experiment::embedding, Experiment::transience}) {
    CHECK(parse_experiment(to_string(e)) == e);
  }
}

TEST_CASE("estimate rows round trip") {
  const auto r = make_row("tau", {{"h", 10}}, stats::Estimate{1.5, 0.25, 40}, 9);
  const auto back = row_from_json(to_json(r));
  CHECK(back.statistic == "tau");
  CHECK(back.estimate == 1.5);
  CHECK(back.se == 0.25);
  CHECK(back.replicas == 40);
  CHECK(back.seed == 9);
  CHECK(back.parameters == r.parameters);
}

TEST_CASE("runs are deterministic and independent of workers") {
  ReplicaConfig c;
  c.experiment = Experiment::hitting;
  c.master_seed = 12;
  c.replicas = 2000;
  c.params = {{"k", 0}, {"h_grid", {5, 20}}};
  auto dump = [](const std::vector<EstimateRow>& rows) {
    std::string s;
    for (const auto& r : rows) s += to_json(r).dump() + "\n";
    return s;
  };
  c.workers = 1;
  const auto a = dump(run_replicas(c));
  c.workers = 4;
  const auto b = dump(run_replicas(c));
  CHECK(a == b);
}

TEST_CASE("subsets of replicas reproduce per-replica output") {
  events::CountConfig cfg;
  cfg.H = 60;
  const auto all = count_events_replicas(7, 30, cfg);
  for (std::uint64_t r : {0u, 13u, 29u}) {
    const auto one = events::count_path_events(SeedPair{7, r}, cfg);
    CHECK(events::to_json(one).dump() == events::to_json(all[r]).dump());
  }
}

TEST_CASE("events exist at H = 100") {
  ReplicaConfig c;
  c.experiment = Experiment::count_events;
  c.master_seed = 7;
  c.replicas = 1000;
  c.params = {{"H_grid", {100}}};
  bool found = false;
  for (const auto& r : run_replicas(c)) {
    if (r.statistic == "N") {
      found = true;
      CHECK(r.estimate > 0.0);
      CHECK(r.se > 0.0);
    }
  }
  CHECK(found);
}

TEST_CASE("count summaries read the smaller H off the same paths") {
  events::CountConfig cfg;
  cfg.H = 100;
  const auto reps = count_events_replicas(11, 200, cfg);
  const auto s = summarize_counts(reps, {50, 100});
  REQUIRE(s.size() == 2);
  CHECK(s[0].N.mean <= s[1].N.mean);
  CHECK(s[0].Ntilde.mean <= s[1].Ntilde.mean);
  CHECK(s[1].containment_violations == 0);
  CHECK_THROWS_AS(summarize_counts(reps, {200}), std::invalid_argument);
}

TEST_CASE("medians") {
  const auto e = median_estimate({5.0, 1.0, 3.0, 2.0, 4.0});
  CHECK(e.mean == 3.0);
  CHECK(e.se >= 0.0);
  CHECK(std::isnan(median_estimate({}).mean));
}

TEST_CASE("dyadic grids") {
  CHECK(dyadic_grid(10'000, 10'000'000).front() == 16384);
  CHECK(dyadic_grid(10'000, 10'000'000).back() == 8388608);
  CHECK(dyadic_grid(10'000, 10'000'000).size() == 10);
}

TEST_CASE("transience profile") {
  CHECK_THROWS_AS(transience_profile(1, 10, 11.0, {16, 32}), std::invalid_argument);
  CHECK_THROWS_AS(transience_profile(1, 10, 12.0, {32, 16}), std::invalid_argument);
  const auto grid = dyadic_grid(16, 1 << 14);
  const auto p = transience_profile(3, 40, 12.0, grid);
  CHECK(p.prop24_violations == 0);
  CHECK(p.probes == 40 * static_cast<std::int64_t>(grid.size()));
  for (const auto& q : p.points) {
    CHECK(q.median_tilde >= 0.0);
    CHECK(q.p10_tilde <= q.median_tilde);
    CHECK(q.p10_U <= q.median_U);
  }
  const auto again = transience_profile(3, 40, 12.0, grid, 1);
  CHECK(to_json(p).dump() == to_json(again).dump());
}

TEST_CASE("csv round trip") {
  std::ostringstream os;
  write_csv(os, {"n", "v"}, {{1.0, 0.1}, {2.0, std::nan("")}, {3.0, 1e-300}});
  std::istringstream is(os.str());
  const auto t = read_csv(is);
  CHECK(t.header == std::vector<std::string>{"n", "v"});
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0][1] == 0.1);
  CHECK(std::isnan(t.rows[1][1]));
  CHECK(t.rows[2][1] == 1e-300);
  std::istringstream bad("a,b\n1,x\n");
  CHECK_THROWS_AS(read_csv(bad), std::invalid_argument);
  std::ostringstream os2;
  CHECK_THROWS_AS(write_csv(os2, {"a"}, {{1.0, 2.0}}), std::invalid_argument);
}

}  // TEST_SUITE
