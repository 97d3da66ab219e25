#include "slosim/experiment.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "slosim/json_io.hpp"

namespace slosim {

namespace {

// Agent decisions and environment noise use distinct streams so that either
// can be replayed in isolation.
constexpr std::uint64_t kAgentStreamSalt = 0x9E3779B97F4A7C15ULL;

// Shortest representation that round-trips the double exactly.
std::string fmt_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double mean(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  double total = 0.0;
  for (std::size_t i = begin; i < end; ++i) total += v[i];
  return total / static_cast<double>(end - begin);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (cycles_explore < 0 || cycles_exploit < 0)
    throw std::invalid_argument("cycle counts must be >= 0");
  validate_specs(specs);
  if (budget <= static_cast<double>(specs.size()) * kMinCores)
    throw std::invalid_argument("budget must exceed services * minimum core share");
  truth.validate();
  for (const auto& s : specs) truth.for_service(s.id);
  if (solver.restarts < 0 || solver.sweep_cap < 1 || solver.core_step <= 0.0 ||
      solver.tolerance < 0.0)
    throw std::invalid_argument("invalid solver settings");
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("cycles_explore"))
    cfg.cycles_explore = j.at("cycles_explore").get<int>();
  if (j.contains("cycles_exploit"))
    cfg.cycles_exploit = j.at("cycles_exploit").get<int>();
  if (j.contains("budget")) cfg.budget = j.at("budget").get<double>();
  if (j.contains("services"))
    cfg.specs = j.at("services").get<std::vector<ServiceSpec>>();
  if (j.contains("truth")) slosim::from_json(j.at("truth"), cfg.truth);
  if (j.contains("solver")) slosim::from_json(j.at("solver"), cfg.solver);
  if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"seed", seed},
          {"cycles_explore", cycles_explore},
          {"cycles_exploit", cycles_exploit},
          {"budget", budget},
          {"services", specs},
          {"truth", truth},
          {"solver", solver},
          {"out_dir", out_dir}};
}

void to_json(nlohmann::json& j, const TraceEntry& e) {
  j = {{"cycle", e.cycle},
       {"phase", to_string(e.phase)},
       {"assignment", e.assignment},
       {"records", e.records},
       {"fulfillment",
        {{"global", e.global_fulfillment}, {"services", e.service_fulfillment}}},
       {"diagnostics", e.diagnostics}};
}

void from_json(const nlohmann::json& j, TraceEntry& e) {
  e.cycle = j.at("cycle").get<std::int64_t>();
  e.phase = phase_from_string(j.at("phase").get<std::string>());
  e.assignment = j.at("assignment").get<Assignment>();
  e.records = j.at("records").get<std::vector<MetricRecord>>();
  const auto& f = j.at("fulfillment");
  e.global_fulfillment = f.at("global").get<double>();
  e.service_fulfillment = f.at("services").get<std::map<std::string, double>>();
  e.diagnostics = j.at("diagnostics").get<CycleDiagnostics>();
}

void Trace::persist(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (const auto& e : entries) {
    nlohmann::json j = e;
    out << j.dump() << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Trace Trace::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Trace trace;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed trace entry");
    try {
      trace.entries.push_back(j.get<TraceEntry>());
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return trace;
}

std::vector<double> Trace::global_series() const {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.global_fulfillment);
  return out;
}

Trace run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  Environment env(cfg.specs, cfg.truth,
                  default_initial_assignment(cfg.specs, cfg.budget), cfg.seed);
  std::mt19937_64 agent_rng(cfg.seed ^ kAgentStreamSalt);
  MetricStore store;
  Agent agent(cfg.specs, StructuralKnowledge::from_specs(cfg.specs), cfg.budget,
              cfg.solver);

  Trace trace;
  int total = cfg.cycles_explore + cfg.cycles_exploit;
  for (int cycle = 0; cycle < total; ++cycle) {
    Phase phase = cycle < cfg.cycles_explore ? Phase::Explore : Phase::Exploit;
    Assignment a = agent.cycle(store, phase, agent_rng);
    auto violations = env.apply(a);
    if (!violations.empty())
      throw std::logic_error("agent produced an invalid assignment: " +
                             violations.front().message);
    auto records = env.step(cycle);
    for (const auto& r : records) store.append(r);

    TraceEntry e;
    e.cycle = cycle;
    e.phase = phase;
    e.assignment = a;
    e.records = records;
    std::vector<double> per_service;
    for (const auto& spec : cfg.specs) {
      const MetricRecord* rec = nullptr;
      for (const auto& r : records)
        if (r.service == spec.id) rec = &r;
      if (rec == nullptr)
        throw std::logic_error("environment produced no record for " + spec.id);
      double f = service_fulfillment(rec->metrics, spec.slos);
      e.service_fulfillment[spec.id] = f;
      per_service.push_back(f);
    }
    e.global_fulfillment = global_fulfillment(per_service);
    e.diagnostics = agent.last_diagnostics();
    trace.entries.push_back(std::move(e));
  }

  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    trace.persist((std::filesystem::path(cfg.out_dir) / "trace.jsonl").string());
  }
  return trace;
}

std::vector<std::string> verify_trace(const Trace& trace,
                                      const std::vector<ServiceSpec>& specs,
                                      double tolerance) {
  std::vector<std::string> problems;
  for (const auto& e : trace.entries) {
    std::vector<double> per_service;
    for (const auto& spec : specs) {
      const MetricRecord* rec = nullptr;
      for (const auto& r : e.records)
        if (r.service == spec.id) rec = &r;
      if (rec == nullptr) {
        problems.push_back("cycle " + std::to_string(e.cycle) + ": no record for " +
                           spec.id);
        continue;
      }
      double f = service_fulfillment(rec->metrics, spec.slos);
      per_service.push_back(f);
      auto it = e.service_fulfillment.find(spec.id);
      if (it == e.service_fulfillment.end() || std::abs(it->second - f) > tolerance)
        problems.push_back("cycle " + std::to_string(e.cycle) + ": " + spec.id +
                           " fulfillment mismatch");
    }
    if (per_service.size() == specs.size()) {
      double g = global_fulfillment(per_service);
      if (std::abs(g - e.global_fulfillment) > tolerance)
        problems.push_back("cycle " + std::to_string(e.cycle) +
                           ": global fulfillment mismatch");
    }
    auto violations = validate_assignment(e.assignment, specs);
    for (const auto& v : violations)
      problems.push_back("cycle " + std::to_string(e.cycle) +
                         ": invalid assignment: " + v.message);
  }
  return problems;
}

std::string report_csv(const Trace& trace) {
  if (trace.entries.empty()) throw std::invalid_argument("empty trace");
  std::ostringstream out;

  std::vector<std::string> services;
  for (const auto& [id, f] : trace.entries.front().service_fulfillment)
    services.push_back(id);
  std::map<std::string, std::vector<std::string>> params;
  for (const auto& id : services)
    for (const auto& [name, v] : trace.entries.front().assignment.services.at(id))
      params[id].push_back(name);

  out << "cycle,phase,global_fulfillment";
  for (const auto& id : services) {
    out << ',' << id << "_fulfillment";
    for (const auto& name : params[id]) out << ',' << id << '_' << name;
    out << ',' << id << "_r2";
  }
  out << '\n';

  for (const auto& e : trace.entries) {
    out << e.cycle << ',' << to_string(e.phase) << ','
        << fmt_double(e.global_fulfillment);
    for (const auto& id : services) {
      out << ',' << fmt_double(e.service_fulfillment.at(id));
      for (const auto& name : params[id])
        out << ',' << fmt_double(e.assignment.services.at(id).at(name));
      auto r2 = e.diagnostics.r_squared.find(id);
      out << ',';
      if (r2 != e.diagnostics.r_squared.end()) out << fmt_double(r2->second);
    }
    out << '\n';
  }
  return out.str();
}

std::string report_summary(const Trace& trace, std::optional<double> oracle_value) {
  if (trace.entries.empty()) throw std::invalid_argument("empty trace");
  std::vector<double> global = trace.global_series();
  std::size_t n = global.size();
  std::size_t explore_count = 0;
  for (const auto& e : trace.entries)
    if (e.phase == Phase::Explore) ++explore_count;
  std::size_t exploit_count = n - explore_count;

  std::ostringstream out;
  out << "cycles: " << n << " (explore " << explore_count << ", exploit "
      << exploit_count << ")\n";
  out << "mean global fulfillment, first " << std::min<std::size_t>(5, n)
      << " cycles: " << fmt_double(mean(global, 0, std::min<std::size_t>(5, n)))
      << '\n';
  out << "mean global fulfillment, last " << std::min<std::size_t>(10, n)
      << " cycles: " << fmt_double(mean(global, n - std::min<std::size_t>(10, n), n))
      << '\n';
  if (explore_count > 0) {
    double total = 0.0;
    for (const auto& e : trace.entries)
      if (e.phase == Phase::Explore) total += e.global_fulfillment;
    out << "explore-phase mean global fulfillment: "
        << fmt_double(total / static_cast<double>(explore_count)) << '\n';
  }
  if (exploit_count > 0) {
    double total = 0.0;
    for (const auto& e : trace.entries)
      if (e.phase == Phase::Exploit) total += e.global_fulfillment;
    out << "exploit-phase mean global fulfillment: "
        << fmt_double(total / static_cast<double>(exploit_count)) << '\n';
  }
  if (oracle_value.has_value()) {
    out << "oracle value: " << fmt_double(*oracle_value) << '\n';
    double target = 0.95 * *oracle_value;
    std::optional<std::size_t> reached;
    for (std::size_t i = 0; i < n; ++i) {
      if (global[i] >= target) {
        reached = i;
        break;
      }
    }
    out << "cycles to reach 95% of oracle: "
        << (reached.has_value() ? std::to_string(*reached) : "never") << '\n';
  }
  return out.str();
}

void write_report(const Trace& trace, const std::string& out_dir,
                  std::optional<double> oracle_value) {
  std::filesystem::create_directories(out_dir);
  auto dir = std::filesystem::path(out_dir);
  {
    std::ofstream out(dir / "report.csv");
    if (!out) throw std::runtime_error("cannot write report.csv");
    out << report_csv(trace);
  }
  {
    std::ofstream out(dir / "summary.txt");
    if (!out) throw std::runtime_error("cannot write summary.txt");
    out << report_summary(trace, oracle_value);
  }
}

}  // namespace slosim
