#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "slosim/experiment.hpp"
#include "slosim/json_io.hpp"

using namespace slosim;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_config(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.seed = seed;
  cfg.cycles_explore = 12;
  cfg.cycles_exploit = 6;
  cfg.solver.restarts = 2;
  cfg.solver.sweep_cap = 6;
  return cfg;
}

}  // namespace

TEST_CASE("config defaults survive a partial JSON override") {
  ExperimentConfig cfg = ExperimentConfig::from_json(nlohmann::json::parse(R"({
    "seed": 9,
    "cycles_exploit": 7,
    "truth": {"qr": {"base_demand": 2.4}},
    "solver": {"restarts": 3}
  })"));
  CHECK(cfg.seed == 9);
  CHECK(cfg.cycles_explore == 30);  // untouched default
  CHECK(cfg.cycles_exploit == 7);
  CHECK(cfg.budget == 8.0);
  CHECK(cfg.specs.size() == 3);
  CHECK(cfg.truth.for_service("qr").base_demand == 2.4);
  CHECK(cfg.truth.for_service("qr").noise_sigma == 0.02);  // merged, not replaced
  CHECK(cfg.truth.for_service("cv").base_demand == 1.2);
  CHECK(cfg.solver.restarts == 3);
  CHECK(cfg.solver.core_step == 0.25);

  CHECK_THROWS_AS(
      ExperimentConfig::from_json(nlohmann::json::parse(R"({"cycles_explore": -1})")),
      std::invalid_argument);
  CHECK_THROWS_AS(
      ExperimentConfig::from_json(nlohmann::json::parse(R"({"budget": 0.2})")),
      std::invalid_argument);

  // to_json -> from_json is the identity on the fields that matter.
  ExperimentConfig again = ExperimentConfig::from_json(cfg.to_json());
  CHECK(again.seed == cfg.seed);
  CHECK(again.cycles_exploit == cfg.cycles_exploit);
  CHECK(again.truth == cfg.truth);
}

TEST_CASE("config file loading reports problems") {
  std::string path = temp_path("slosim_cfg.json");
  {
    std::ofstream out(path);
    out << R"({"seed": 5, "cycles_explore": 4, "cycles_exploit": 2})";
  }
  ExperimentConfig cfg = ExperimentConfig::load(path);
  CHECK(cfg.seed == 5);
  std::remove(path.c_str());

  CHECK_THROWS_AS(ExperimentConfig::load(temp_path("slosim_no_cfg.json")),
                  std::runtime_error);
  std::string bad = temp_path("slosim_bad_cfg.json");
  {
    std::ofstream out(bad);
    out << "{nope";
  }
  CHECK_THROWS_AS(ExperimentConfig::load(bad), std::runtime_error);
  std::remove(bad.c_str());
}

TEST_CASE("run_experiment follows the phase schedule and scores every cycle") {
  ExperimentConfig cfg = small_config(3);
  Trace trace = run_experiment(cfg);
  REQUIRE(trace.entries.size() == 18);
  for (int i = 0; i < 18; ++i) {
    const TraceEntry& e = trace.entries[i];
    CHECK(e.cycle == i);
    CHECK(e.phase == (i < 12 ? Phase::Explore : Phase::Exploit));
    CHECK(e.records.size() == 3);
    CHECK(e.service_fulfillment.size() == 3);
    CHECK(e.global_fulfillment >= 0.0);
    CHECK(e.global_fulfillment <= 1.0);
    CHECK(validate_assignment(e.assignment, cfg.specs).empty());
    if (e.phase == Phase::Exploit) {
      CHECK((e.diagnostics.fit_count == 3 || e.diagnostics.fallback));
    } else {
      CHECK(e.diagnostics.fit_count == 0);
    }
  }
  CHECK(verify_trace(trace, cfg.specs).empty());
}

TEST_CASE("same seed, same bytes; different seed, different run") {
  ExperimentConfig cfg = small_config(11);
  cfg.out_dir = temp_path("slosim_run_a");
  Trace a = run_experiment(cfg);
  cfg.out_dir = temp_path("slosim_run_b");
  Trace b = run_experiment(cfg);
  std::string ta = slurp(temp_path("slosim_run_a") + "/trace.jsonl");
  std::string tb = slurp(temp_path("slosim_run_b") + "/trace.jsonl");
  CHECK(ta == tb);
  CHECK(a.global_series() == b.global_series());

  ExperimentConfig other = small_config(12);
  Trace c = run_experiment(other);
  CHECK(a.global_series() != c.global_series());

  std::filesystem::remove_all(temp_path("slosim_run_a"));
  std::filesystem::remove_all(temp_path("slosim_run_b"));
}

TEST_CASE("trace persists and reloads losslessly") {
  ExperimentConfig cfg = small_config(4);
  Trace trace = run_experiment(cfg);
  std::string path = temp_path("slosim_trace.jsonl");
  trace.persist(path);
  Trace loaded = Trace::load(path);
  REQUIRE(loaded.entries.size() == trace.entries.size());
  for (std::size_t i = 0; i < trace.entries.size(); ++i) {
    CHECK(loaded.entries[i].cycle == trace.entries[i].cycle);
    CHECK(loaded.entries[i].phase == trace.entries[i].phase);
    CHECK(loaded.entries[i].assignment == trace.entries[i].assignment);
    CHECK(loaded.entries[i].records == trace.entries[i].records);
    CHECK(loaded.entries[i].global_fulfillment == trace.entries[i].global_fulfillment);
    CHECK(loaded.entries[i].service_fulfillment ==
          trace.entries[i].service_fulfillment);
  }
  // Persisting the reload reproduces the original bytes.
  std::string path2 = temp_path("slosim_trace2.jsonl");
  loaded.persist(path2);
  CHECK(slurp(path) == slurp(path2));
  CHECK(verify_trace(loaded, cfg.specs).empty());
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("trace loading reports the offending line") {
  std::string path = temp_path("slosim_trace_bad.jsonl");
  {
    std::ofstream out(path);
    out << "{broken\n";
  }
  CHECK_THROWS_WITH_AS(Trace::load(path),
                       (path + ":1: malformed trace entry").c_str(),
                       std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("verify_trace flags tampering") {
  ExperimentConfig cfg = small_config(6);
  Trace trace = run_experiment(cfg);
  CHECK(verify_trace(trace, cfg.specs).empty());

  Trace cooked = trace;
  cooked.entries[3].global_fulfillment = 1.0;
  auto problems = verify_trace(cooked, cfg.specs);
  REQUIRE(problems.size() == 1);
  CHECK(problems[0].find("cycle 3") != std::string::npos);

  cooked = trace;
  cooked.entries[5].assignment.set("qr", "data_quality", 4444.0);
  CHECK_FALSE(verify_trace(cooked, cfg.specs).empty());
}

TEST_CASE("report csv has one row per cycle and per-service columns") {
  ExperimentConfig cfg = small_config(7);
  Trace trace = run_experiment(cfg);
  std::string csv = report_csv(trace);
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header ==
        "cycle,phase,global_fulfillment"
        ",cv_fulfillment,cv_cores,cv_data_quality,cv_model_size,cv_r2"
        ",pc_fulfillment,pc_cores,pc_data_quality,pc_r2"
        ",qr_fulfillment,qr_cores,qr_data_quality,qr_r2");
  int rows = 0;
  std::string line;
  while (std::getline(lines, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 18);
  CHECK(csv.find("explore") != std::string::npos);
  CHECK(csv.find("exploit") != std::string::npos);
}

TEST_CASE("summary reports phase means and oracle distance") {
  ExperimentConfig cfg = small_config(8);
  Trace trace = run_experiment(cfg);
  std::string summary = report_summary(trace, 1.0);
  CHECK(summary.find("cycles: 18 (explore 12, exploit 6)") != std::string::npos);
  CHECK(summary.find("explore-phase mean global fulfillment") != std::string::npos);
  CHECK(summary.find("exploit-phase mean global fulfillment") != std::string::npos);
  CHECK(summary.find("oracle value: 1") != std::string::npos);
  CHECK(summary.find("cycles to reach 95% of oracle:") != std::string::npos);

  std::string no_oracle = report_summary(trace);
  CHECK(no_oracle.find("oracle") == std::string::npos);

  std::string dir = temp_path("slosim_report_dir");
  write_report(trace, dir, 1.0);
  CHECK(std::filesystem::exists(dir + "/report.csv"));
  CHECK(std::filesystem::exists(dir + "/summary.txt"));
  std::filesystem::remove_all(dir);
}
