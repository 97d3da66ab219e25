// Command-line entry point for the autoscaling simulator.
//
//   slosim run     execute the experiment, write trace + report
//   slosim oracle  brute-force optimum for a config
//   slosim replay  recompute the report from a trace file
//   slosim serve   HTTP control surface for external agents

#include <chrono>
#include <csignal>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "slosim/experiment.hpp"
#include "slosim/http_server.hpp"
#include "slosim/json_io.hpp"
#include "slosim/solver.hpp"

namespace {

volatile std::sig_atomic_t g_stop = 0;

void handle_signal(int) { g_stop = 1; }

slosim::ExperimentConfig load_config(const std::string& path,
                                     std::optional<std::uint64_t> seed) {
  slosim::ExperimentConfig cfg;
  if (!path.empty()) cfg = slosim::ExperimentConfig::load(path);
  if (seed.has_value()) cfg.seed = *seed;
  return cfg;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            std::string out_dir, bool no_oracle) {
  slosim::ExperimentConfig cfg = load_config(config_path, seed);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (cfg.out_dir.empty()) cfg.out_dir = "out";

  slosim::Trace trace = slosim::run_experiment(cfg);

  std::optional<double> oracle_value;
  if (!no_oracle) {
    slosim::Environment env(cfg.specs, cfg.truth,
                            slosim::default_initial_assignment(cfg.specs, cfg.budget),
                            cfg.seed);
    oracle_value = slosim::oracle_solve(env).value;
  }
  slosim::write_report(trace, cfg.out_dir, oracle_value);
  std::cout << slosim::report_summary(trace, oracle_value);
  std::cout << "trace: " << cfg.out_dir << "/trace.jsonl\n"
            << "report: " << cfg.out_dir << "/report.csv\n";
  return 0;
}

int cmd_oracle(const std::string& config_path, std::optional<std::uint64_t> seed) {
  slosim::ExperimentConfig cfg = load_config(config_path, seed);
  slosim::Environment env(cfg.specs, cfg.truth,
                          slosim::default_initial_assignment(cfg.specs, cfg.budget),
                          cfg.seed);
  slosim::OracleResult result = slosim::oracle_solve(env);
  nlohmann::json j{{"value", result.value}, {"assignment", result.assignment}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_replay(const std::string& trace_path, const std::string& config_path,
               std::string out_dir, std::optional<double> oracle_value) {
  slosim::ExperimentConfig cfg = load_config(config_path, std::nullopt);
  slosim::Trace trace = slosim::Trace::load(trace_path);
  auto problems = slosim::verify_trace(trace, cfg.specs);
  for (const auto& p : problems) std::cerr << "inconsistent trace: " << p << '\n';
  if (!out_dir.empty()) slosim::write_report(trace, out_dir, oracle_value);
  std::cout << slosim::report_summary(trace, oracle_value);
  return problems.empty() ? 0 : 1;
}

int cmd_serve(const std::string& config_path, std::optional<std::uint64_t> seed,
              const std::string& host, int port, int tick_ms) {
  slosim::ExperimentConfig cfg = load_config(config_path, seed);
  slosim::Environment env(cfg.specs, cfg.truth,
                          slosim::default_initial_assignment(cfg.specs, cfg.budget),
                          cfg.seed);
  slosim::MetricStore store;
  slosim::ControlServer server(env, store);
  int bound = server.start(host, port);
  std::cout << "listening on http://" << host << ':' << bound << '\n';
  if (tick_ms > 0)
    std::cout << "stepping every " << tick_ms << " ms\n";
  else
    std::cout << "advance cycles with POST /step\n";

  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  while (!g_stop) {
    if (tick_ms > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(tick_ms));
      if (!g_stop) server.step_once();
    } else {
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
  }
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SLO-driven multi-dimensional autoscaling simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string trace_path;
  std::string host = "127.0.0.1";
  std::optional<std::uint64_t> seed;
  std::optional<double> oracle_value;
  int port = 8080;
  int tick_ms = 0;
  bool no_oracle = false;

  auto* run = app.add_subcommand("run", "execute the experiment, write trace and report");
  run->add_option("--config", config_path, "config file (JSON)");
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("--out", out_dir, "output directory (default: out)");
  run->add_flag("--no-oracle", no_oracle, "skip the oracle comparison in the summary");

  auto* oracle = app.add_subcommand("oracle", "brute-force optimum for a config");
  oracle->add_option("--config", config_path, "config file (JSON)");
  oracle->add_option("--seed", seed, "override the config seed");

  auto* replay = app.add_subcommand("replay", "recompute the report from a trace file");
  replay->add_option("--trace", trace_path, "trace file (JSON Lines)")->required();
  replay->add_option("--config", config_path, "config with the service specs");
  replay->add_option("--out", out_dir, "output directory for the report");
  replay->add_option("--oracle-value", oracle_value, "oracle value for the summary");

  auto* serve = app.add_subcommand("serve", "HTTP control surface");
  serve->add_option("--config", config_path, "config file (JSON)");
  serve->add_option("--seed", seed, "override the config seed");
  serve->add_option("--host", host, "bind address (default 127.0.0.1)");
  serve->add_option("--port", port, "port (default 8080, 0 = auto)");
  serve->add_option("--tick-ms", tick_ms, "step automatically every N ms (0 = manual)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, seed, out_dir, no_oracle);
    if (oracle->parsed()) return cmd_oracle(config_path, seed);
    if (replay->parsed()) return cmd_replay(trace_path, config_path, out_dir, oracle_value);
    if (serve->parsed()) return cmd_serve(config_path, seed, host, port, tick_ms);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
