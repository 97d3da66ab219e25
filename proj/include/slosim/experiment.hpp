#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "slosim/agent.hpp"
#include "slosim/domain.hpp"
#include "slosim/environment.hpp"
#include "slosim/metrics_store.hpp"
#include "slosim/solver.hpp"

// End-to-end experiment harness: wires environment, store, agent, and
// solver into the cycle loop (explore phase, then exploit phase), records a
// Trace, and renders reports.

namespace slosim {

struct ExperimentConfig {
  std::uint64_t seed = 0;
  int cycles_explore = 30;
  int cycles_exploit = 30;
  double budget = kDefaultBudget;
  std::vector<ServiceSpec> specs = default_specs();
  GroundTruthModel truth = GroundTruthModel::defaults();
  SolverSettings solver;
  // When non-empty, run_experiment persists the trace to
  // <out_dir>/trace.jsonl.
  std::string out_dir;

  void validate() const;
  // Fields absent from the JSON keep their defaults.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path);
  nlohmann::json to_json() const;
};

struct TraceEntry {
  std::int64_t cycle = 0;
  Phase phase = Phase::Explore;
  Assignment assignment;
  std::vector<MetricRecord> records;
  std::map<std::string, double> service_fulfillment;
  double global_fulfillment = 0.0;
  CycleDiagnostics diagnostics;
};

struct Trace {
  std::vector<TraceEntry> entries;

  // JSON Lines, one entry per cycle.
  void persist(const std::string& path) const;
  static Trace load(const std::string& path);

  std::vector<double> global_series() const;
};

void to_json(nlohmann::json& j, const TraceEntry& e);
void from_json(const nlohmann::json& j, TraceEntry& e);

// Runs the full protocol: per cycle the agent proposes an assignment, the
// environment applies and steps it, and fulfillment is scored from the
// observed metrics. Deterministic per seed.
Trace run_experiment(const ExperimentConfig& cfg);

// Recomputes every entry's fulfillment from its own records and compares
// with the recorded values. Returns mismatch descriptions (empty = clean).
std::vector<std::string> verify_trace(const Trace& trace,
                                      const std::vector<ServiceSpec>& specs,
                                      double tolerance = 1e-9);

// Per-cycle CSV: cycle, phase, global fulfillment, then per service its
// fulfillment, parameter values, and fit R^2 (blank outside exploit).
std::string report_csv(const Trace& trace);

// Text summary: cycle counts, first-5 and last-10 means, per-phase means,
// and when an oracle value is supplied, the value plus cycles-to-95%.
std::string report_summary(const Trace& trace,
                           std::optional<double> oracle_value = std::nullopt);

// Writes report.csv and summary.txt under out_dir.
void write_report(const Trace& trace, const std::string& out_dir,
                  std::optional<double> oracle_value = std::nullopt);

}  // namespace slosim
