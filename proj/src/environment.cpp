#include "slosim/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace slosim {

GroundTruthModel GroundTruthModel::defaults() {
  GroundTruthModel m;
  m.services["qr"] = {2.0, 2.0, 1000.0, {}, 1.0, 0.02};
  m.services["cv"] = {1.2, 2.0, 320.0, {{1, 1.0}, {2, 1.6}, {3, 2.4}, {4, 3.4}}, 1.0, 0.02};
  m.services["pc"] = {1.5, 2.0, 60.0, {}, 1.0, 0.02};
  return m;
}

void GroundTruthModel::validate() const {
  for (const auto& [id, t] : services) {
    if (t.base_demand <= 0.0)
      throw std::invalid_argument(id + ": base_demand must be > 0");
    if (t.arrival_rate <= 0.0)
      throw std::invalid_argument(id + ": arrival_rate must be > 0");
    if (t.quality_exponent < 0.0)
      throw std::invalid_argument(id + ": quality_exponent must be >= 0");
    if (t.quality_reference <= 0.0)
      throw std::invalid_argument(id + ": quality_reference must be > 0");
    if (t.noise_sigma < 0.0)
      throw std::invalid_argument(id + ": noise_sigma must be >= 0");
    double prev = 0.0;
    for (const auto& [idx, f] : t.model_factor) {
      if (f < 1.0 || f < prev)
        throw std::invalid_argument(id + ": model factors must be >= 1 and non-decreasing");
      prev = f;
    }
  }
}

const ServiceTruth& GroundTruthModel::for_service(const std::string& id) const {
  auto it = services.find(id);
  if (it == services.end())
    throw std::invalid_argument("no ground truth for service " + id);
  return it->second;
}

double true_completion(const ServiceTruth& truth,
                       const std::map<std::string, double>& params) {
  auto need = [&](const std::string& name) {
    auto it = params.find(name);
    if (it == params.end())
      throw std::invalid_argument("true_completion: missing " + name);
    return it->second;
  };
  double cores = need(kCoresVar);
  double quality = need("data_quality");
  double demand = truth.base_demand *
                  std::pow(quality / truth.quality_reference, truth.quality_exponent);
  if (!truth.model_factor.empty()) {
    int m = static_cast<int>(std::llround(need("model_size")));
    auto it = truth.model_factor.find(m);
    if (it == truth.model_factor.end())
      throw std::invalid_argument("no model factor for model_size " + std::to_string(m));
    demand *= it->second;
  }
  double throughput = cores / demand;
  return std::clamp(throughput / truth.arrival_rate, 0.0, 1.0);
}

Assignment default_initial_assignment(const std::vector<ServiceSpec>& specs,
                                      double budget) {
  Assignment a;
  a.budget = budget;
  double share = budget / static_cast<double>(specs.size());
  for (const auto& s : specs) {
    for (const ParameterSpec* p : s.adjustable_parameters()) {
      if (p->name == kCoresVar)
        a.set(s.id, p->name, share);
      else
        a.set(s.id, p->name, p->lower);
    }
  }
  return a;
}

Environment::Environment(std::vector<ServiceSpec> specs, GroundTruthModel truth,
                         Assignment initial, std::uint64_t seed)
    : specs_(std::move(specs)), truth_(std::move(truth)),
      current_(std::move(initial)), rng_(seed) {
  validate_specs(specs_);
  truth_.validate();
  for (const auto& s : specs_) truth_.for_service(s.id);
  auto violations = validate_assignment(current_, specs_);
  if (!violations.empty())
    throw std::invalid_argument("initial assignment invalid: " + violations.front().message);
}

Environment::Environment(std::vector<ServiceSpec> specs, GroundTruthModel truth,
                         std::uint64_t seed)
    : Environment(specs, truth, default_initial_assignment(specs), seed) {}

std::vector<Violation> Environment::apply(const Assignment& a) {
  auto violations = validate_assignment(a, specs_, current_.budget);
  if (violations.empty()) {
    double budget = current_.budget;
    current_ = a;
    current_.budget = budget;
  }
  return violations;
}

std::vector<MetricRecord> Environment::step(std::int64_t cycle) {
  if (cycle <= last_cycle_)
    throw std::invalid_argument("step cycle " + std::to_string(cycle) +
                                " not after " + std::to_string(last_cycle_));
  last_cycle_ = cycle;
  std::vector<MetricRecord> out;
  out.reserve(specs_.size());
  for (const auto& s : specs_) {
    MetricRecord r;
    r.cycle = cycle;
    r.service = s.id;
    const auto& vars = current_.services.at(s.id);
    for (const ParameterSpec* p : s.adjustable_parameters())
      r.metrics[p->name] = vars.at(p->name);
    const ServiceTruth& t = truth_.for_service(s.id);
    double completion = slosim::true_completion(t, vars);
    double eps = t.noise_sigma * gauss_(rng_);
    r.metrics[kCompletionVar] = std::clamp(completion + eps, 0.0, 1.0);
    out.push_back(std::move(r));
  }
  return out;
}

double Environment::true_completion(const std::string& service,
                                    const std::map<std::string, double>& params) const {
  return slosim::true_completion(truth_.for_service(service), params);
}

}  // namespace slosim
