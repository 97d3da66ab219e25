#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "slosim/domain.hpp"
#include "slosim/metrics_store.hpp"
#include "slosim/regression.hpp"
#include "slosim/solver.hpp"

// The scaling agent: tabularize metrics, fit per-service regression models
// over the expert-declared parent variables, and produce either a random
// exploration action or a solver-driven exploitation action each cycle.

namespace slosim {

// Expert-declared variable relations: which adjustable variables drive each
// service's completion. The regression target is always completion.
struct StructuralKnowledge {
  std::map<std::string, std::vector<std::string>> parents;

  static StructuralKnowledge from_specs(const std::vector<ServiceSpec>& specs);
  const std::vector<std::string>& for_service(const std::string& id) const;
};

enum class Phase { Explore, Exploit };

std::string to_string(Phase p);
Phase phase_from_string(const std::string& s);

struct CycleDiagnostics {
  Phase phase = Phase::Explore;
  // Number of successful model fits this cycle (0 in explore phase).
  int fit_count = 0;
  // True when an exploit cycle degraded to exploration because some service
  // lacked enough samples.
  bool fallback = false;
  std::map<std::string, double> r_squared;
  std::map<std::string, std::vector<double>> coefficients;
};

// Uniformly random lattice value per discrete parameter; cores drawn
// uniformly on the simplex {cores >= 0.1, sum = budget}. Always valid.
Assignment explore_action(const std::vector<ServiceSpec>& specs, double budget,
                          std::mt19937_64& rng);

// One control decision. Explore: a random action. Exploit: fit one model
// per service on the full window and delegate to the solver (seeding it
// with the incumbent); if any fit reports insufficient samples, fall back
// to exploration for this cycle. Appends nothing to the store.
Assignment agent_cycle(const MetricStore& store,
                       const std::vector<ServiceSpec>& specs,
                       const StructuralKnowledge& sk, Phase phase,
                       std::mt19937_64& rng, double budget = kDefaultBudget,
                       SolverSettings settings = {},
                       const std::optional<Assignment>& incumbent = std::nullopt,
                       CycleDiagnostics* diagnostics = nullptr);

// Stateful wrapper that carries the incumbent between cycles.
class Agent {
 public:
  Agent(std::vector<ServiceSpec> specs, StructuralKnowledge sk,
        double budget = kDefaultBudget, SolverSettings settings = {});

  Assignment cycle(const MetricStore& store, Phase phase, std::mt19937_64& rng);

  const CycleDiagnostics& last_diagnostics() const { return last_; }
  const std::optional<Assignment>& incumbent() const { return incumbent_; }

 private:
  std::vector<ServiceSpec> specs_;
  StructuralKnowledge sk_;
  double budget_;
  SolverSettings settings_;
  std::optional<Assignment> incumbent_;
  CycleDiagnostics last_;
};

}  // namespace slosim
