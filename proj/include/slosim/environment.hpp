#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "slosim/domain.hpp"

// Simulated processing environment: a parameterized ground-truth model maps
// each service's configuration to an observed completion rate with optional
// Gaussian noise, and exposes the parameter-adjustment surface agents act on.

namespace slosim {

struct ServiceTruth {
  // Core-seconds per item at the reference quality.
  double base_demand = 1.0;
  double quality_exponent = 2.0;
  double quality_reference = 1.0;
  // Demand multiplier per model-size index; empty for services without a
  // model-size knob. Values >= 1 and non-decreasing in the index.
  std::map<int, double> model_factor;
  // Item arrivals per second.
  double arrival_rate = 1.0;
  // Stddev of the observation noise added to completion.
  double noise_sigma = 0.0;

  bool operator==(const ServiceTruth&) const = default;
};

struct GroundTruthModel {
  std::map<std::string, ServiceTruth> services;

  static GroundTruthModel defaults();
  void validate() const;
  const ServiceTruth& for_service(const std::string& id) const;

  bool operator==(const GroundTruthModel&) const = default;
};

// Noise-free completion for one service: demand D = base * (q/q_ref)^alpha
// * model_factor(m); completion = clamp((cores / D) / lambda, 0, 1).
double true_completion(const ServiceTruth& truth,
                       const std::map<std::string, double>& params);

// Minimum-quality lattice values with an equal core split: the configuration
// an operator would start from before any tuning.
Assignment default_initial_assignment(const std::vector<ServiceSpec>& specs,
                                      double budget = kDefaultBudget);

class Environment {
 public:
  Environment(std::vector<ServiceSpec> specs, GroundTruthModel truth,
              Assignment initial, std::uint64_t seed);
  Environment(std::vector<ServiceSpec> specs, GroundTruthModel truth,
              std::uint64_t seed);

  // Returns violations and leaves the state unchanged when the assignment is
  // invalid; otherwise it becomes the configuration used by subsequent steps.
  std::vector<Violation> apply(const Assignment& a);

  // One observation cycle: per service, all adjustable parameters as-set
  // plus completion = clamp(true + sigma * N(0,1), 0, 1). The cycle index
  // must be strictly greater than the previous one.
  std::vector<MetricRecord> step(std::int64_t cycle);

  double true_completion(const std::string& service,
                         const std::map<std::string, double>& params) const;

  const Assignment& current() const { return current_; }
  const std::vector<ServiceSpec>& specs() const { return specs_; }
  const GroundTruthModel& truth() const { return truth_; }
  std::int64_t last_cycle() const { return last_cycle_; }

 private:
  std::vector<ServiceSpec> specs_;
  GroundTruthModel truth_;
  Assignment current_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> gauss_{0.0, 1.0};
  std::int64_t last_cycle_ = -1;
};

}  // namespace slosim
