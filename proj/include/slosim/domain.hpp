#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

// Shared vocabulary for the autoscaling simulator: parameter specifications,
// SLOs, assignments, and the fulfillment arithmetic every other module uses.

namespace slosim {

inline constexpr double kDefaultBudget = 8.0;
// Operational floor for the cores parameter. Its declared bounds are the open
// interval (0, 8); throughput models divide by demand, so allocations are
// kept away from zero.
inline constexpr double kMinCores = 0.1;
inline constexpr double kBoundTol = 1e-9;
inline constexpr double kLatticeTol = 1e-9;
inline constexpr double kBudgetTol = 1e-9;

inline const std::string kCoresVar = "cores";
inline const std::string kCompletionVar = "completion";

// Normalization scale used when this variable feeds a regression model.
enum class Scale { Linear, Log };

struct ParameterSpec {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  // Discrete parameters carry a step; values must lie on lower + k*step.
  std::optional<double> step;
  // Adjustable parameters form the action space; observed-only variables
  // (completion) never appear in an Assignment.
  bool adjustable = true;
  Scale scale = Scale::Linear;

  bool discrete() const { return step.has_value(); }
  // Number of lattice points for a discrete parameter.
  int lattice_size() const;
  double lattice_value(int k) const;
  // Nearest lattice point, clamped into [lower, upper]. Continuous
  // parameters are only clamped.
  double snap(double v) const;
  bool on_lattice(double v, double tol = kLatticeTol) const;
};

// Only at-least SLOs exist in this domain (value >= threshold).
struct SloSpec {
  std::string variable;
  double threshold = 1.0;
  double weight = 1.0;
};

enum class ServiceKind { QR, CV, PC };

std::string to_string(ServiceKind k);
ServiceKind service_kind_from_string(const std::string& s);

struct ServiceSpec {
  std::string id;
  ServiceKind kind = ServiceKind::QR;
  std::vector<ParameterSpec> parameters;
  std::vector<SloSpec> slos;
  // Structural knowledge: the adjustable variables that drive completion,
  // in the order the regression consumes them.
  std::vector<std::string> completion_parents;

  const ParameterSpec* find_parameter(const std::string& name) const;
  std::vector<const ParameterSpec*> adjustable_parameters() const;
};

// Joint configuration: per-service parameter values plus the core budget
// they share.
struct Assignment {
  std::map<std::string, std::map<std::string, double>> services;
  double budget = kDefaultBudget;

  double get(const std::string& service, const std::string& var) const;
  void set(const std::string& service, const std::string& var, double value);
  bool has(const std::string& service, const std::string& var) const;
  double total_cores() const;

  bool operator==(const Assignment&) const = default;
};

struct MetricRecord {
  std::int64_t cycle = 0;
  std::string service;
  std::map<std::string, double> metrics;

  bool operator==(const MetricRecord&) const = default;
};

enum class ViolationKind {
  OutOfBounds,
  OffLattice,
  BudgetExceeded,
  NonPositiveCores,
  ObservedOnly,
  UnknownService,
  MissingService,
  UnknownVariable,
  MissingVariable,
};

std::string to_string(ViolationKind k);

struct Violation {
  ViolationKind kind;
  std::string service;
  std::string variable;
  double value = 0.0;
  std::string message;
};

// clamp(value / threshold, 0, 1) for an at-least SLO. Throws
// std::invalid_argument when threshold <= 0.
double slo_fulfillment(double value, const SloSpec& slo);

// Weighted mean of per-SLO fulfillment. Throws when an SLO variable is
// missing from metrics (names the variable) or when no SLOs are given.
double service_fulfillment(const std::map<std::string, double>& metrics,
                           const std::vector<SloSpec>& slos);

// Unweighted mean across services. Throws on an empty list.
double global_fulfillment(const std::vector<double>& per_service);

// Returns every violation of the Assignment invariants: bounds, lattice
// membership, budget, the cores floor, observed-only and unknown names.
// An empty result means the assignment is valid.
std::vector<Violation> validate_assignment(const Assignment& a,
                                           const std::vector<ServiceSpec>& specs,
                                           double budget);
std::vector<Violation> validate_assignment(const Assignment& a,
                                           const std::vector<ServiceSpec>& specs);

// Snaps every value to its parameter's lattice (clamping continuous values
// into bounds). Valid assignments are fixed points.
Assignment snap_assignment(const Assignment& a,
                           const std::vector<ServiceSpec>& specs);

// Throws std::invalid_argument when any ServiceSpec invariant is broken
// (bounds ordering, step divisibility, weight range, SLO variables, parents).
void validate_specs(const std::vector<ServiceSpec>& specs);

// The built-in three services: QR decoding, CV object detection, PC lidar
// mapping, with their published bounds, steps, SLO thresholds and weights.
std::vector<ServiceSpec> default_specs();

const ServiceSpec* find_spec(const std::vector<ServiceSpec>& specs,
                             const std::string& id);

}  // namespace slosim
