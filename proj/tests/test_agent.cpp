#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "slosim/agent.hpp"
#include "slosim/environment.hpp"

using namespace slosim;

namespace {

// Fill the store with noise-free observations of random valid assignments.
MetricStore explored_store(const std::vector<ServiceSpec>& specs, int cycles,
                           std::uint64_t seed) {
  GroundTruthModel truth = GroundTruthModel::defaults();
  for (auto& [id, svc] : truth.services) svc.noise_sigma = 0.0;
  Environment env(specs, truth, seed);
  std::mt19937_64 rng(seed);
  MetricStore store;
  for (int c = 0; c < cycles; ++c) {
    Assignment a = explore_action(specs, 8.0, rng);
    REQUIRE(env.apply(a).empty());
    for (const auto& r : env.step(c)) store.append(r);
  }
  return store;
}

}  // namespace

TEST_CASE("structural knowledge mirrors the declared parents") {
  auto specs = default_specs();
  StructuralKnowledge sk = StructuralKnowledge::from_specs(specs);
  CHECK(sk.for_service("qr") == std::vector<std::string>{"cores", "data_quality"});
  CHECK(sk.for_service("cv") ==
        std::vector<std::string>{"cores", "data_quality", "model_size"});
  CHECK_THROWS_AS(sk.for_service("zz"), std::invalid_argument);
}

TEST_CASE("phase names round-trip") {
  CHECK(to_string(Phase::Explore) == "explore");
  CHECK(to_string(Phase::Exploit) == "exploit");
  CHECK(phase_from_string("explore") == Phase::Explore);
  CHECK(phase_from_string("exploit") == Phase::Exploit);
  CHECK_THROWS_AS(phase_from_string("idle"), std::invalid_argument);
}

TEST_CASE("explore_action spreads uniformly over the lattice") {
  auto specs = default_specs();
  std::mt19937_64 rng(42);
  const int n = 1000;
  std::map<double, int> cv_quality_counts;
  for (int i = 0; i < n; ++i) {
    Assignment a = explore_action(specs, 8.0, rng);
    CHECK(validate_assignment(a, specs).empty());
    CHECK(a.total_cores() == doctest::Approx(8.0).epsilon(1e-9));
    cv_quality_counts[a.get("cv", "data_quality")] += 1;
  }
  // All 7 lattice values appear, with frequencies within 3 sigma of uniform.
  REQUIRE(cv_quality_counts.size() == 7);
  double expected = n / 7.0;
  double sigma = std::sqrt(n * (1.0 / 7.0) * (6.0 / 7.0));
  for (const auto& [value, count] : cv_quality_counts) {
    CHECK(std::fmod(value - 128.0, 32.0) == 0.0);
    CHECK(std::abs(count - expected) <= 3.0 * sigma);
  }
}

TEST_CASE("explore_action is reproducible from the seed") {
  auto specs = default_specs();
  std::mt19937_64 a(7), b(7);
  for (int i = 0; i < 20; ++i) CHECK(explore_action(specs, 8.0, a) ==
                                     explore_action(specs, 8.0, b));
}

TEST_CASE("explore cycles never touch the regression") {
  auto specs = default_specs();
  StructuralKnowledge sk = StructuralKnowledge::from_specs(specs);
  MetricStore store = explored_store(specs, 10, 1);
  std::mt19937_64 rng(3);
  CycleDiagnostics diag;
  Assignment a = agent_cycle(store, specs, sk, Phase::Explore, rng, 8.0, {},
                             std::nullopt, &diag);
  CHECK(validate_assignment(a, specs).empty());
  CHECK(diag.phase == Phase::Explore);
  CHECK(diag.fit_count == 0);
  CHECK_FALSE(diag.fallback);
  CHECK(diag.r_squared.empty());
}

TEST_CASE("exploit cycles fit one model per service and defer to the solver") {
  auto specs = default_specs();
  StructuralKnowledge sk = StructuralKnowledge::from_specs(specs);
  MetricStore store = explored_store(specs, 30, 2);
  std::mt19937_64 rng(4);
  CycleDiagnostics diag;
  Assignment a = agent_cycle(store, specs, sk, Phase::Exploit, rng, 8.0, {},
                             std::nullopt, &diag);
  CHECK(validate_assignment(a, specs).empty());
  CHECK(diag.phase == Phase::Exploit);
  CHECK(diag.fit_count == 3);
  CHECK_FALSE(diag.fallback);
  REQUIRE(diag.r_squared.size() == 3);
  for (const auto& [id, r2] : diag.r_squared) CHECK(r2 >= 0.9);
  REQUIRE(diag.coefficients.count("cv") == 1);
  CHECK(diag.coefficients.at("cv").size() == 10);

  // On noise-free training data the chosen point should already be strong.
  GroundTruthModel truth = GroundTruthModel::defaults();
  double total = 0.0;
  for (const auto& spec : specs) {
    auto params = a.services.at(spec.id);
    params["completion"] = true_completion(truth.for_service(spec.id), params);
    total += service_fulfillment(params, spec.slos);
  }
  CHECK(total / 3.0 >= 0.9);
}

TEST_CASE("exploit with an empty or thin store falls back to exploration") {
  auto specs = default_specs();
  StructuralKnowledge sk = StructuralKnowledge::from_specs(specs);
  std::mt19937_64 rng(5);
  CycleDiagnostics diag;

  MetricStore empty;
  Assignment a = agent_cycle(empty, specs, sk, Phase::Exploit, rng, 8.0, {},
                             std::nullopt, &diag);
  CHECK(validate_assignment(a, specs).empty());
  CHECK(diag.fallback);
  CHECK(diag.fit_count == 0);
  CHECK(diag.r_squared.empty());

  // Nine rows: enough for qr/pc (6 features) but not cv (10 features).
  MetricStore thin = explored_store(specs, 9, 6);
  Assignment b = agent_cycle(thin, specs, sk, Phase::Exploit, rng, 8.0, {},
                             std::nullopt, &diag);
  CHECK(validate_assignment(b, specs).empty());
  CHECK(diag.fallback);
  CHECK(diag.fit_count == 0);
}

TEST_CASE("agent decisions are a function of seed, store, and phase") {
  auto specs = default_specs();
  StructuralKnowledge sk = StructuralKnowledge::from_specs(specs);
  MetricStore store = explored_store(specs, 30, 8);
  for (Phase phase : {Phase::Explore, Phase::Exploit}) {
    std::mt19937_64 r1(11), r2(11);
    Assignment a = agent_cycle(store, specs, sk, phase, r1);
    Assignment b = agent_cycle(store, specs, sk, phase, r2);
    CHECK(a == b);
  }
}

TEST_CASE("the stateful agent carries its incumbent forward") {
  auto specs = default_specs();
  MetricStore store = explored_store(specs, 30, 9);
  Agent agent(specs, StructuralKnowledge::from_specs(specs));
  std::mt19937_64 rng(13);

  Assignment first = agent.cycle(store, Phase::Exploit, rng);
  CHECK(agent.incumbent().has_value());
  CHECK(*agent.incumbent() == first);
  CHECK(agent.last_diagnostics().fit_count == 3);

  Assignment second = agent.cycle(store, Phase::Exploit, rng);
  CHECK(*agent.incumbent() == second);

  // With identical data the refit is identical, and the incumbent seed
  // guarantees the second decision scores at least as well.
  std::map<std::string, RegressionModel> models;
  for (const auto& spec : specs) {
    std::vector<std::string> cols = spec.completion_parents;
    cols.push_back("completion");
    models[spec.id] = fit(store.to_table(spec.id, cols), spec);
  }
  ObjectiveSpec obj = assemble_objective(models, specs);
  CHECK(obj.evaluate(second) >= obj.evaluate(first));
}
