#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "slosim/domain.hpp"
#include "slosim/environment.hpp"
#include "slosim/regression.hpp"

// Global optimization step: assemble the per-service completion models,
// SLOs, and parameter bounds into one objective (predicted global
// fulfillment) and maximize it over the joint discrete-continuous space
// under the shared core budget.
//
// Search procedure: random-restart block coordinate ascent. Each restart
// sweeps services round-robin, exhaustively scanning the active service's
// own lattice (coarse-then-fine for lattices beyond coarse_threshold
// points) crossed with candidate core values near the current allocation,
// then attempts pairwise core transfers of core_step between services.
// A final polish pass applies strict-improvement single-variable moves, so
// the returned point is 1-swap locally optimal.

namespace slosim {

struct SolverSettings {
  int restarts = 8;
  int sweep_cap = 20;
  double core_step = 0.25;
  double tolerance = 1e-4;
  // Lattices larger than coarse_threshold points are first scanned at
  // coarse_stride steps, then rescanned at full resolution within
  // fine_window steps of the coarse optimum.
  int coarse_stride = 25;
  int fine_window = 25;
  int coarse_threshold = 100;
  bool polish = true;
  // Previous cycle's assignment; seeds restart 0 and the result is
  // guaranteed not to score below it (never-regress contract).
  std::optional<Assignment> incumbent;
};

using CompletionFn = std::function<double(const std::map<std::string, double>&)>;

namespace detail {

struct SloTerm {
  // Index into the adjustable parameter list, or -1 for completion.
  int param_idx = -1;
  double threshold = 1.0;
  double weight = 1.0;
};

struct CompiledService {
  std::string id;
  // Adjustable parameters in declaration order; state vectors align to this.
  std::vector<ParameterSpec> params;
  std::size_t cores_idx = 0;
  // Predicted completion from a state vector aligned to `params`.
  std::function<double(const double*)> completion;
  std::vector<SloTerm> slos;
  double weight_sum = 0.0;

  double score(const double* vals) const;
};

}  // namespace detail

class ObjectiveSpec {
 public:
  // Throws std::invalid_argument when the assignment is invalid; otherwise
  // the predicted global fulfillment.
  double evaluate(const Assignment& a) const;
  // Same value without validation.
  double value(const Assignment& a) const;
  // Predicted fulfillment of one service; params must contain every
  // adjustable parameter.
  double service_value(const std::string& id,
                       const std::map<std::string, double>& params) const;

  const std::vector<ServiceSpec>& specs() const { return specs_; }
  double budget() const { return budget_; }
  const SolverSettings& settings() const { return settings_; }
  SolverSettings& settings() { return settings_; }
  const std::vector<detail::CompiledService>& compiled() const { return services_; }

 private:
  friend ObjectiveSpec assemble_objective(
      const std::map<std::string, RegressionModel>&,
      const std::vector<ServiceSpec>&, double, SolverSettings);
  friend ObjectiveSpec assemble_objective(
      const std::map<std::string, CompletionFn>&,
      const std::vector<ServiceSpec>&, double, SolverSettings);

  std::vector<ServiceSpec> specs_;
  std::vector<detail::CompiledService> services_;
  double budget_ = kDefaultBudget;
  SolverSettings settings_;
};

// Model parents must match each spec's completion_parents; every non-cores
// adjustable parameter must be discrete (the search enumerates lattices).
ObjectiveSpec assemble_objective(const std::map<std::string, RegressionModel>& models,
                                 const std::vector<ServiceSpec>& specs,
                                 double budget = kDefaultBudget,
                                 SolverSettings settings = {});
// Completion functions in place of fitted models (e.g. the ground truth).
ObjectiveSpec assemble_objective(const std::map<std::string, CompletionFn>& models,
                                 const std::vector<ServiceSpec>& specs,
                                 double budget = kDefaultBudget,
                                 SolverSettings settings = {});

// Uniformly random lattice values; cores uniform on the simplex
// {cores_i >= 0.1, sum = budget}. Always passes validate_assignment.
Assignment random_assignment(const std::vector<ServiceSpec>& specs, double budget,
                             std::mt19937_64& rng);

// Best valid assignment found by the search procedure above. Deterministic
// given the rng state; never scores below the incumbent.
Assignment solve(const ObjectiveSpec& obj, std::mt19937_64& rng);

struct OracleCoarsening {
  // Scan stride per service for data_quality, in value units; services not
  // listed use their full lattice.
  std::map<std::string, double> quality_stride = {{"qr", 50.0}, {"pc", 3.0}};
  double core_step = 0.25;
};

struct OracleResult {
  Assignment assignment;
  double value = 0.0;
};

// Exhaustive search over the coarsened joint lattice using the noise-free
// ground truth: per-service best configurations for every core grid value,
// combined over all compositions of the budget. Testing and calibration
// only; not part of the control loop.
OracleResult oracle_solve(const Environment& env, const OracleCoarsening& c = {});

}  // namespace slosim
