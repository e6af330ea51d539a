#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "favedge/event_counters.hpp"
#include "favedge/stats.hpp"

namespace favedge::harness {

enum class Experiment { count_events, hitting, lemma41, rayknight, embedding, transience };

std::string_view to_string(Experiment e);
/// Throws std::invalid_argument for unknown names.
Experiment parse_experiment(std::string_view name);

/// {experiment, master_seed, replicas, params{...}}. Stream index of a
/// replica is its index, so any subset reruns identically.
struct ReplicaConfig {
  Experiment experiment = Experiment::count_events;
  std::uint64_t master_seed = 1;
  std::int64_t replicas = 100;
  unsigned workers = 0;
  nlohmann::json params = nlohmann::json::object();
};

ReplicaConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ReplicaConfig& c);
ReplicaConfig load_config(const std::string& path);

struct EstimateRow {
  std::string statistic;
  nlohmann::json parameters = nlohmann::json::object();
  double estimate = 0.0;
  double se = 0.0;
  std::int64_t replicas = 0;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const EstimateRow& r);
EstimateRow row_from_json(const nlohmann::json& j);

EstimateRow make_row(std::string statistic, nlohmann::json parameters,
                     const stats::Estimate& e, std::uint64_t seed);

/// Runs the experiment; any failing replica aborts with a ReplicaError
/// naming its stream.
std::vector<EstimateRow> run_replicas(const ReplicaConfig& config);

/// One path per replica, run to the largest H of the grid. N and Ntilde
/// are cumulative in h, so the smaller H are read off the same paths.
std::vector<events::PathCountReport> count_events_replicas(
    std::uint64_t master_seed, std::int64_t replicas,
    const events::CountConfig& config, unsigned workers = 0);

struct CountSummary {
  std::int64_t H = 0;
  stats::Estimate N;
  stats::Estimate Ntilde;
  stats::Estimate Ntilde_sq;
  stats::Estimate exceed_loglog;  // 1{N_H > log log H}
  std::int64_t order_violation_paths = 0;  // paths with N_H' > Ntilde_H' for some H' <= H
  std::int64_t censored = 0;
  std::int64_t containment_violations = 0;
  std::int64_t disjointness_violation_paths = 0;
};

std::vector<CountSummary> summarize_counts(
    const std::vector<events::PathCountReport>& reports,
    const std::vector<std::int64_t>& H_grid);

/// Sample median with a distribution-free standard error read off the
/// order statistics bracketing a 95% interval.
stats::Estimate median_estimate(std::vector<double> xs);

struct TransiencePoint {
  std::int64_t n = 0;
  double median_tilde = 0.0;  // median of Ũ(n) (log n)^gamma / sqrt n
  double p10_tilde = 0.0;
  double median_U = 0.0;      // same for U(n)
  double p10_U = 0.0;
  double median_tilde_se = 0.0;
  double median_U_se = 0.0;
};

struct TransienceProfile {
  double gamma = 12.0;
  std::int64_t replicas = 0;
  std::vector<TransiencePoint> points;
  /// Probes where some favorite edge x lacks x-1 among the favorite
  /// downcrossing sites.
  std::int64_t prop24_violations = 0;
  std::int64_t probes = 0;
};

/// Dyadic n = 2^a for 2^a in [lo, hi].
std::vector<std::int64_t> dyadic_grid(std::int64_t lo, std::int64_t hi);

/// Throws std::invalid_argument for gamma <= 11 or an unsorted grid.
TransienceProfile transience_profile(std::uint64_t master_seed,
                                     std::int64_t replicas, double gamma,
                                     const std::vector<std::int64_t>& n_grid,
                                     unsigned workers = 0);

nlohmann::json to_json(const TransienceProfile& p);

/// CSV matrix: a header line, then one line per row; numbers use the
/// shortest round-trip form.
void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable read_csv(std::istream& is);

std::string format_number(double x);

}  // namespace favedge::harness
