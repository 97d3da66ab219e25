#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "slosim/environment.hpp"
#include "slosim/solver.hpp"

using namespace slosim;

namespace {

std::map<std::string, CompletionFn> truth_fns(const GroundTruthModel& truth,
                                              const std::vector<ServiceSpec>& specs) {
  std::map<std::string, CompletionFn> fns;
  for (const auto& spec : specs) {
    ServiceTruth t = truth.for_service(spec.id);
    fns[spec.id] = [t](const std::map<std::string, double>& p) {
      return true_completion(t, p);
    };
  }
  return fns;
}

// One service whose completion is constant, so every assignment ties on
// value and only the tie-break rules pick the result.
std::vector<ServiceSpec> flat_spec() {
  ServiceSpec s;
  s.id = "svc";
  s.kind = ServiceKind::QR;
  s.parameters = {{"cores", 0.0, 8.0, std::nullopt, true, Scale::Log},
                  {"data_quality", 1.0, 10.0, 1.0, true, Scale::Log},
                  {"completion", 0.0, 1.0, std::nullopt, false, Scale::Linear}};
  s.slos = {{"completion", 1.0, 1.0}};
  s.completion_parents = {"cores", "data_quality"};
  return {s};
}

}  // namespace

TEST_CASE("objective evaluates predicted global fulfillment") {
  auto specs = default_specs();
  auto fns = truth_fns(GroundTruthModel::defaults(), specs);
  ObjectiveSpec obj = assemble_objective(fns, specs);

  Assignment baseline = default_initial_assignment(specs);
  CHECK(obj.evaluate(baseline) == doctest::Approx(0.7501322751322751).epsilon(1e-15));
  CHECK(obj.value(baseline) == obj.evaluate(baseline));

  CHECK(obj.service_value("qr", {{"cores", 2.0}, {"data_quality", 1000.0}}) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(obj.service_value("zz", {}), std::invalid_argument);

  Assignment bad = baseline;
  bad.set("cv", "data_quality", 300.0);
  CHECK_THROWS_AS(obj.evaluate(bad), std::invalid_argument);
}

TEST_CASE("assemble_objective rejects inconsistent inputs") {
  auto specs = default_specs();
  auto fns = truth_fns(GroundTruthModel::defaults(), specs);

  CHECK_THROWS_AS(assemble_objective(fns, specs, 0.2), std::invalid_argument);

  auto missing = fns;
  missing.erase("cv");
  CHECK_THROWS_AS(assemble_objective(missing, specs), std::invalid_argument);

  auto continuous = specs;
  continuous[0].parameters[1].step.reset();
  CHECK_THROWS_AS(assemble_objective(fns, continuous), std::invalid_argument);

  // Model parents must line up with the declared completion parents.
  std::map<std::string, RegressionModel> models;
  for (const auto& spec : specs) {
    RegressionModel m;
    m.parents = spec.completion_parents;
    m.norm = norm_bounds(spec, m.parents);
    m.coefficients.assign(feature_count(m.parents.size()), 0.0);
    models[spec.id] = m;
  }
  CHECK_NOTHROW(assemble_objective(models, specs));
  models["qr"].parents = {"data_quality"};
  CHECK_THROWS_AS(assemble_objective(models, specs), std::invalid_argument);
}

TEST_CASE("random_assignment is always valid and spends the whole budget") {
  auto specs = default_specs();
  std::mt19937_64 rng(17);
  for (int i = 0; i < 100; ++i) {
    Assignment a = random_assignment(specs, 8.0, rng);
    CHECK(validate_assignment(a, specs).empty());
    CHECK(a.total_cores() == doctest::Approx(8.0).epsilon(1e-9));
    CHECK(a.get("qr", "cores") >= 0.1);
    CHECK(a.get("cv", "cores") >= 0.1);
    CHECK(a.get("pc", "cores") >= 0.1);
  }
  CHECK_THROWS_AS(random_assignment(specs, 0.25, rng), std::invalid_argument);
}

TEST_CASE("solve with the true surfaces gets within 3% of the oracle") {
  auto specs = default_specs();
  auto truth = GroundTruthModel::defaults();
  Environment env(specs, truth, 0);
  OracleResult oracle = oracle_solve(env);
  REQUIRE(oracle.value > 0.0);

  ObjectiveSpec obj = assemble_objective(truth_fns(truth, specs), specs);
  std::mt19937_64 rng(0);
  Assignment best = solve(obj, rng);
  CHECK(validate_assignment(best, specs).empty());
  CHECK(obj.evaluate(best) >= 0.97 * oracle.value);
}

TEST_CASE("solve respects the budget across 100 seeds") {
  auto specs = default_specs();
  auto fns = truth_fns(GroundTruthModel::defaults(), specs);
  SolverSettings cheap;
  cheap.restarts = 2;
  cheap.sweep_cap = 4;
  ObjectiveSpec obj = assemble_objective(fns, specs, 8.0, cheap);
  for (int seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    Assignment a = solve(obj, rng);
    CHECK(validate_assignment(a, specs).empty());
    CHECK(a.total_cores() <= 8.0 + 1e-9);
  }
}

TEST_CASE("solve is deterministic for a fixed rng state") {
  auto specs = default_specs();
  ObjectiveSpec obj =
      assemble_objective(truth_fns(GroundTruthModel::defaults(), specs), specs);
  std::mt19937_64 r1(123), r2(123);
  Assignment a = solve(obj, r1);
  Assignment b = solve(obj, r2);
  CHECK(a == b);
}

TEST_CASE("solve never regresses below the incumbent") {
  auto specs = default_specs();
  auto truth = GroundTruthModel::defaults();
  ObjectiveSpec plain =
      assemble_objective(truth_fns(truth, specs), specs);

  // Hand the solver an already-optimal incumbent and starve the search.
  Environment env(specs, truth, 0);
  Assignment incumbent = oracle_solve(env).assignment;
  double incumbent_value = plain.evaluate(incumbent);

  SolverSettings starved;
  starved.restarts = 1;
  starved.sweep_cap = 1;
  starved.incumbent = incumbent;
  ObjectiveSpec obj = assemble_objective(truth_fns(truth, specs), specs, 8.0, starved);
  std::mt19937_64 rng(5);
  Assignment result = solve(obj, rng);
  CHECK(plain.evaluate(result) >= incumbent_value);

  SolverSettings invalid = starved;
  invalid.incumbent->set("qr", "cores", 50.0);
  ObjectiveSpec bad = assemble_objective(truth_fns(truth, specs), specs, 8.0, invalid);
  std::mt19937_64 rng2(5);
  CHECK_THROWS_AS(solve(bad, rng2), std::invalid_argument);
}

TEST_CASE("equal-value ties resolve to fewer cores and smaller parameters") {
  auto specs = flat_spec();
  std::map<std::string, CompletionFn> fns{
      {"svc", [](const std::map<std::string, double>&) { return 1.0; }}};
  ObjectiveSpec obj = assemble_objective(fns, specs, 8.0);
  std::mt19937_64 rng(9);
  Assignment a = solve(obj, rng);
  CHECK(a.get("svc", "cores") == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(a.get("svc", "data_quality") == 1.0);
  CHECK(obj.evaluate(a) == 1.0);
}

TEST_CASE("oracle finds the saturating configuration on default truth") {
  auto specs = default_specs();
  Environment env(specs, GroundTruthModel::defaults(), 0);
  OracleResult r = oracle_solve(env);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.value >= 0.95);
  CHECK(validate_assignment(r.assignment, specs).empty());
  // Full value needs every SLO saturated.
  CHECK(r.assignment.get("qr", "data_quality") >= 800.0);
  CHECK(r.assignment.get("cv", "data_quality") >= 288.0);
  CHECK(r.assignment.get("cv", "model_size") >= 3.0);
  CHECK(r.assignment.get("pc", "data_quality") >= 40.0);

  // The oracle value is a true optimum for its own grid: the solver working
  // from truth cannot beat it by more than fine-lattice slack.
  ObjectiveSpec obj =
      assemble_objective(truth_fns(GroundTruthModel::defaults(), specs), specs);
  CHECK(obj.evaluate(r.assignment) == doctest::Approx(r.value).epsilon(1e-12));
}

TEST_CASE("relaxing the budget cannot hurt the oracle") {
  auto specs = default_specs();
  auto truth = GroundTruthModel::defaults();
  Environment tight(specs, truth, 0);
  Environment loose(specs, truth, default_initial_assignment(specs, 24.0), 0);
  loose.current();
  OracleResult a = oracle_solve(tight);
  OracleResult b = oracle_solve(loose);
  CHECK(b.value >= a.value);
  CHECK(b.assignment.total_cores() <= 24.0 + 1e-9);
}

TEST_CASE("oracle rejects an infeasible core grid") {
  auto specs = flat_spec();
  GroundTruthModel truth;
  truth.services["svc"] = {1.0, 2.0, 10.0, {}, 1.0, 0.0};
  Assignment tiny;
  tiny.budget = 0.15;
  tiny.set("svc", "cores", 0.15);
  tiny.set("svc", "data_quality", 1.0);
  Environment env(specs, truth, tiny, 0);
  CHECK_THROWS_AS(oracle_solve(env), std::invalid_argument);
}
