#include "slosim/agent.hpp"

#include <stdexcept>

namespace slosim {

StructuralKnowledge StructuralKnowledge::from_specs(
    const std::vector<ServiceSpec>& specs) {
  StructuralKnowledge sk;
  for (const auto& s : specs) sk.parents[s.id] = s.completion_parents;
  return sk;
}

const std::vector<std::string>& StructuralKnowledge::for_service(
    const std::string& id) const {
  auto it = parents.find(id);
  if (it == parents.end())
    throw std::invalid_argument("no structural knowledge for service " + id);
  return it->second;
}

std::string to_string(Phase p) {
  return p == Phase::Explore ? "explore" : "exploit";
}

Phase phase_from_string(const std::string& s) {
  if (s == "explore") return Phase::Explore;
  if (s == "exploit") return Phase::Exploit;
  throw std::invalid_argument("unknown phase: " + s);
}

Assignment explore_action(const std::vector<ServiceSpec>& specs, double budget,
                          std::mt19937_64& rng) {
  return random_assignment(specs, budget, rng);
}

Assignment agent_cycle(const MetricStore& store,
                       const std::vector<ServiceSpec>& specs,
                       const StructuralKnowledge& sk, Phase phase,
                       std::mt19937_64& rng, double budget,
                       SolverSettings settings,
                       const std::optional<Assignment>& incumbent,
                       CycleDiagnostics* diagnostics) {
  CycleDiagnostics local;
  CycleDiagnostics& diag = diagnostics ? *diagnostics : local;
  diag = CycleDiagnostics{};
  diag.phase = phase;

  if (phase == Phase::Explore)
    return explore_action(specs, budget, rng);

  std::map<std::string, RegressionModel> models;
  for (const auto& spec : specs) {
    const auto& parents = sk.for_service(spec.id);
    std::vector<std::string> columns = parents;
    columns.push_back(kCompletionVar);
    MetricTable table = store.to_table(spec.id, columns);
    try {
      RegressionModel m = fit(table, spec, parents);
      diag.fit_count += 1;
      diag.r_squared[spec.id] = m.r_squared;
      diag.coefficients[spec.id] = m.coefficients;
      models[spec.id] = std::move(m);
    } catch (const InsufficientSamples&) {
      diag.fallback = true;
      diag.fit_count = 0;
      diag.r_squared.clear();
      diag.coefficients.clear();
      return explore_action(specs, budget, rng);
    }
  }

  settings.incumbent = incumbent;
  ObjectiveSpec obj = assemble_objective(models, specs, budget, settings);
  return solve(obj, rng);
}

Agent::Agent(std::vector<ServiceSpec> specs, StructuralKnowledge sk,
             double budget, SolverSettings settings)
    : specs_(std::move(specs)), sk_(std::move(sk)), budget_(budget),
      settings_(std::move(settings)) {
  validate_specs(specs_);
  for (const auto& s : specs_) sk_.for_service(s.id);
}

Assignment Agent::cycle(const MetricStore& store, Phase phase,
                        std::mt19937_64& rng) {
  Assignment a = agent_cycle(store, specs_, sk_, phase, rng, budget_, settings_,
                             incumbent_, &last_);
  incumbent_ = a;
  return a;
}

}  // namespace slosim
