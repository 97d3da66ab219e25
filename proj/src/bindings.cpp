#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>
#include <sstream>

#include "slosim/agent.hpp"
#include "slosim/domain.hpp"
#include "slosim/environment.hpp"
#include "slosim/experiment.hpp"
#include "slosim/json_io.hpp"
#include "slosim/metrics_store.hpp"
#include "slosim/regression.hpp"
#include "slosim/solver.hpp"

namespace py = pybind11;
using namespace slosim;

namespace {

// Deterministic generator handle shared across bound operations.
struct Rng {
  explicit Rng(std::uint64_t seed) : engine(seed) {}
  std::mt19937_64 engine;
};

std::string dump_json(const nlohmann::json& j, int indent) {
  return j.dump(indent);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "SLO-driven multi-dimensional autoscaling simulator";

  py::register_exception<InsufficientSamples>(m, "InsufficientSamplesError");

  py::enum_<Scale>(m, "Scale")
      .value("LINEAR", Scale::Linear)
      .value("LOG", Scale::Log);

  py::enum_<ServiceKind>(m, "ServiceKind")
      .value("QR", ServiceKind::QR)
      .value("CV", ServiceKind::CV)
      .value("PC", ServiceKind::PC);

  py::enum_<Phase>(m, "Phase")
      .value("EXPLORE", Phase::Explore)
      .value("EXPLOIT", Phase::Exploit);

  py::class_<Rng>(m, "Rng").def(py::init<std::uint64_t>(), py::arg("seed"));

  py::class_<ParameterSpec>(m, "ParameterSpec")
      .def(py::init<>())
      .def_readwrite("name", &ParameterSpec::name)
      .def_readwrite("lower", &ParameterSpec::lower)
      .def_readwrite("upper", &ParameterSpec::upper)
      .def_readwrite("step", &ParameterSpec::step)
      .def_readwrite("adjustable", &ParameterSpec::adjustable)
      .def_readwrite("scale", &ParameterSpec::scale)
      .def("discrete", &ParameterSpec::discrete)
      .def("snap", &ParameterSpec::snap, py::arg("value"))
      .def("lattice_size", &ParameterSpec::lattice_size);

  py::class_<SloSpec>(m, "SloSpec")
      .def(py::init<>())
      .def_readwrite("variable", &SloSpec::variable)
      .def_readwrite("threshold", &SloSpec::threshold)
      .def_readwrite("weight", &SloSpec::weight);

  py::class_<ServiceSpec>(m, "ServiceSpec")
      .def(py::init<>())
      .def_readwrite("id", &ServiceSpec::id)
      .def_readwrite("kind", &ServiceSpec::kind)
      .def_readwrite("parameters", &ServiceSpec::parameters)
      .def_readwrite("slos", &ServiceSpec::slos)
      .def_readwrite("completion_parents", &ServiceSpec::completion_parents);

  py::class_<Assignment>(m, "Assignment")
      .def(py::init<>())
      .def_readwrite("services", &Assignment::services)
      .def_readwrite("budget", &Assignment::budget)
      .def("get", &Assignment::get, py::arg("service"), py::arg("variable"))
      .def("set", &Assignment::set, py::arg("service"), py::arg("variable"),
           py::arg("value"))
      .def("total_cores", &Assignment::total_cores)
      .def("__eq__", [](const Assignment& a, const Assignment& b) { return a == b; });

  py::class_<Violation>(m, "Violation")
      .def_readonly("service", &Violation::service)
      .def_readonly("variable", &Violation::variable)
      .def_readonly("value", &Violation::value)
      .def_readonly("message", &Violation::message)
      .def_property_readonly("kind",
                             [](const Violation& v) { return to_string(v.kind); })
      .def("__repr__", [](const Violation& v) { return "<Violation " + v.message + ">"; });

  py::class_<MetricRecord>(m, "MetricRecord")
      .def(py::init<>())
      .def_readwrite("cycle", &MetricRecord::cycle)
      .def_readwrite("service", &MetricRecord::service)
      .def_readwrite("metrics", &MetricRecord::metrics);

  py::class_<MetricTable>(m, "MetricTable")
      .def_readonly("columns", &MetricTable::columns)
      .def_readonly("cycles", &MetricTable::cycles)
      .def_readonly("rows", &MetricTable::rows)
      .def("row_count", &MetricTable::row_count);

  py::class_<MetricStore>(m, "MetricStore")
      .def(py::init<>())
      .def("append", &MetricStore::append, py::arg("record"))
      .def("to_table",
           [](const MetricStore& s, const std::string& service,
              const std::vector<std::string>& columns, std::optional<std::size_t> last) {
             return s.to_table(service, columns,
                               last ? Window::last(*last) : Window::all());
           },
           py::arg("service"), py::arg("columns"), py::arg("last") = py::none())
      .def("services", &MetricStore::services)
      .def("size", py::overload_cast<>(&MetricStore::size, py::const_))
      .def("persist", &MetricStore::persist, py::arg("path"))
      .def_static("load", &MetricStore::load, py::arg("path"))
      .def("__eq__",
           [](const MetricStore& a, const MetricStore& b) { return a == b; });

  py::class_<ServiceTruth>(m, "ServiceTruth")
      .def(py::init<>())
      .def_readwrite("base_demand", &ServiceTruth::base_demand)
      .def_readwrite("quality_exponent", &ServiceTruth::quality_exponent)
      .def_readwrite("quality_reference", &ServiceTruth::quality_reference)
      .def_readwrite("model_factor", &ServiceTruth::model_factor)
      .def_readwrite("arrival_rate", &ServiceTruth::arrival_rate)
      .def_readwrite("noise_sigma", &ServiceTruth::noise_sigma);

  py::class_<GroundTruthModel>(m, "GroundTruthModel")
      .def(py::init<>())
      .def_readwrite("services", &GroundTruthModel::services)
      .def_static("defaults", &GroundTruthModel::defaults);

  py::class_<Environment>(m, "Environment")
      .def(py::init<std::vector<ServiceSpec>, GroundTruthModel, Assignment,
                    std::uint64_t>(),
           py::arg("specs"), py::arg("truth"), py::arg("initial"), py::arg("seed"))
      .def(py::init<std::vector<ServiceSpec>, GroundTruthModel, std::uint64_t>(),
           py::arg("specs"), py::arg("truth"), py::arg("seed"))
      .def("apply", &Environment::apply, py::arg("assignment"))
      .def("step", &Environment::step, py::arg("cycle"))
      .def("true_completion",
           py::overload_cast<const std::string&, const std::map<std::string, double>&>(
               &Environment::true_completion, py::const_),
           py::arg("service"), py::arg("params"))
      .def_property_readonly("current", &Environment::current)
      .def_property_readonly("last_cycle", &Environment::last_cycle);

  py::class_<RegressionModel>(m, "RegressionModel")
      .def_readonly("parents", &RegressionModel::parents)
      .def_readonly("coefficients", &RegressionModel::coefficients)
      .def_readonly("sample_count", &RegressionModel::sample_count)
      .def_readonly("r_squared", &RegressionModel::r_squared)
      .def("predict", &RegressionModel::predict, py::arg("params"));

  py::class_<SolverSettings>(m, "SolverSettings")
      .def(py::init<>())
      .def_readwrite("restarts", &SolverSettings::restarts)
      .def_readwrite("sweep_cap", &SolverSettings::sweep_cap)
      .def_readwrite("core_step", &SolverSettings::core_step)
      .def_readwrite("tolerance", &SolverSettings::tolerance)
      .def_readwrite("polish", &SolverSettings::polish)
      .def_readwrite("incumbent", &SolverSettings::incumbent);

  py::class_<ObjectiveSpec>(m, "ObjectiveSpec")
      .def("evaluate", &ObjectiveSpec::evaluate, py::arg("assignment"))
      .def("value", &ObjectiveSpec::value, py::arg("assignment"))
      .def("service_value", &ObjectiveSpec::service_value, py::arg("service"),
           py::arg("params"));

  py::class_<StructuralKnowledge>(m, "StructuralKnowledge")
      .def(py::init<>())
      .def_readwrite("parents", &StructuralKnowledge::parents)
      .def_static("from_specs", &StructuralKnowledge::from_specs, py::arg("specs"));

  py::class_<CycleDiagnostics>(m, "CycleDiagnostics")
      .def_readonly("phase", &CycleDiagnostics::phase)
      .def_readonly("fit_count", &CycleDiagnostics::fit_count)
      .def_readonly("fallback", &CycleDiagnostics::fallback)
      .def_readonly("r_squared", &CycleDiagnostics::r_squared)
      .def_readonly("coefficients", &CycleDiagnostics::coefficients);

  py::class_<Agent>(m, "Agent")
      .def(py::init<std::vector<ServiceSpec>, StructuralKnowledge, double,
                    SolverSettings>(),
           py::arg("specs"), py::arg("sk"), py::arg("budget") = kDefaultBudget,
           py::arg("settings") = SolverSettings{})
      .def("cycle",
           [](Agent& a, const MetricStore& store, Phase phase, Rng& rng) {
             return a.cycle(store, phase, rng.engine);
           },
           py::arg("store"), py::arg("phase"), py::arg("rng"))
      .def_property_readonly("last_diagnostics", &Agent::last_diagnostics);

  py::class_<OracleResult>(m, "OracleResult")
      .def_readonly("assignment", &OracleResult::assignment)
      .def_readonly("value", &OracleResult::value);

  py::class_<TraceEntry>(m, "TraceEntry")
      .def_readonly("cycle", &TraceEntry::cycle)
      .def_readonly("phase", &TraceEntry::phase)
      .def_readonly("assignment", &TraceEntry::assignment)
      .def_readonly("records", &TraceEntry::records)
      .def_readonly("service_fulfillment", &TraceEntry::service_fulfillment)
      .def_readonly("global_fulfillment", &TraceEntry::global_fulfillment)
      .def_readonly("diagnostics", &TraceEntry::diagnostics);

  py::class_<Trace>(m, "Trace")
      .def_readonly("entries", &Trace::entries)
      .def("persist", &Trace::persist, py::arg("path"))
      .def_static("load", &Trace::load, py::arg("path"))
      .def("global_series", &Trace::global_series);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("cycles_explore", &ExperimentConfig::cycles_explore)
      .def_readwrite("cycles_exploit", &ExperimentConfig::cycles_exploit)
      .def_readwrite("budget", &ExperimentConfig::budget)
      .def_readwrite("specs", &ExperimentConfig::specs)
      .def_readwrite("truth", &ExperimentConfig::truth)
      .def_readwrite("solver", &ExperimentConfig::solver)
      .def_readwrite("out_dir", &ExperimentConfig::out_dir)
      .def_static("load", &ExperimentConfig::load, py::arg("path"))
      .def_static("from_json_str",
                  [](const std::string& text) {
                    return ExperimentConfig::from_json(nlohmann::json::parse(text));
                  },
                  py::arg("text"))
      .def("to_json_str",
           [](const ExperimentConfig& cfg) { return dump_json(cfg.to_json(), 2); });

  m.def("default_specs", &default_specs);
  m.def("default_initial_assignment", &default_initial_assignment, py::arg("specs"),
        py::arg("budget") = kDefaultBudget);
  m.def("slo_fulfillment", &slo_fulfillment, py::arg("value"), py::arg("slo"));
  m.def("service_fulfillment", &service_fulfillment, py::arg("metrics"),
        py::arg("slos"));
  m.def("global_fulfillment", &global_fulfillment, py::arg("per_service"));
  m.def("validate_assignment",
        py::overload_cast<const Assignment&, const std::vector<ServiceSpec>&, double>(
            &validate_assignment),
        py::arg("assignment"), py::arg("specs"), py::arg("budget"));
  m.def("validate_assignment",
        py::overload_cast<const Assignment&, const std::vector<ServiceSpec>&>(
            &validate_assignment),
        py::arg("assignment"), py::arg("specs"));
  m.def("snap_assignment", &snap_assignment, py::arg("assignment"), py::arg("specs"));
  m.def("true_completion",
        py::overload_cast<const ServiceTruth&, const std::map<std::string, double>&>(
            &true_completion),
        py::arg("truth"), py::arg("params"));
  m.def("fit",
        py::overload_cast<const MetricTable&, const ServiceSpec&,
                          const std::vector<std::string>&>(&fit),
        py::arg("table"), py::arg("spec"), py::arg("parents"));
  m.def("fit", py::overload_cast<const MetricTable&, const ServiceSpec&>(&fit),
        py::arg("table"), py::arg("spec"));
  m.def("predict",
        py::overload_cast<const RegressionModel&, const std::map<std::string, double>&>(
            &predict),
        py::arg("model"), py::arg("params"));
  m.def("explore_action",
        [](const std::vector<ServiceSpec>& specs, double budget, Rng& rng) {
          return explore_action(specs, budget, rng.engine);
        },
        py::arg("specs"), py::arg("budget"), py::arg("rng"));
  m.def("assemble_objective",
        py::overload_cast<const std::map<std::string, RegressionModel>&,
                          const std::vector<ServiceSpec>&, double, SolverSettings>(
            &assemble_objective),
        py::arg("models"), py::arg("specs"), py::arg("budget") = kDefaultBudget,
        py::arg("settings") = SolverSettings{});
  m.def("assemble_objective_fns",
        [](const std::map<std::string, std::function<double(
               const std::map<std::string, double>&)>>& models,
           const std::vector<ServiceSpec>& specs, double budget,
           SolverSettings settings) {
          std::map<std::string, CompletionFn> fns(models.begin(), models.end());
          return assemble_objective(fns, specs, budget, settings);
        },
        py::arg("models"), py::arg("specs"), py::arg("budget") = kDefaultBudget,
        py::arg("settings") = SolverSettings{});
  m.def("solve",
        [](const ObjectiveSpec& obj, Rng& rng) { return solve(obj, rng.engine); },
        py::arg("objective"), py::arg("rng"));
  m.def("oracle_solve",
        [](const Environment& env) { return oracle_solve(env); }, py::arg("env"));
  m.def("agent_cycle",
        [](const MetricStore& store, const std::vector<ServiceSpec>& specs,
           const StructuralKnowledge& sk, Phase phase, Rng& rng, double budget,
           SolverSettings settings, std::optional<Assignment> incumbent) {
          CycleDiagnostics diag;
          Assignment a = agent_cycle(store, specs, sk, phase, rng.engine, budget,
                                     settings, incumbent, &diag);
          return py::make_tuple(a, diag);
        },
        py::arg("store"), py::arg("specs"), py::arg("sk"), py::arg("phase"),
        py::arg("rng"), py::arg("budget") = kDefaultBudget,
        py::arg("settings") = SolverSettings{}, py::arg("incumbent") = py::none());
  m.def("run_experiment", &run_experiment, py::arg("config"));
  m.def("verify_trace", &verify_trace, py::arg("trace"), py::arg("specs"),
        py::arg("tolerance") = 1e-9);
  m.def("report_csv", &report_csv, py::arg("trace"));
  m.def("report_summary", &report_summary, py::arg("trace"),
        py::arg("oracle_value") = py::none());
}
