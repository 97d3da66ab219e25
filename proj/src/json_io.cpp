#include "slosim/json_io.hpp"

#include <stdexcept>

namespace slosim {

namespace {

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void to_json(nlohmann::json& j, const ParameterSpec& p) {
  j = {{"name", p.name},
       {"lower", p.lower},
       {"upper", p.upper},
       {"adjustable", p.adjustable},
       {"scale", p.scale == Scale::Log ? "log" : "linear"}};
  if (p.discrete()) j["step"] = *p.step;
}

void from_json(const nlohmann::json& j, ParameterSpec& p) {
  p = ParameterSpec{};
  p.name = j.at("name").get<std::string>();
  p.lower = j.at("lower").get<double>();
  p.upper = j.at("upper").get<double>();
  if (j.contains("step") && !j.at("step").is_null())
    p.step = j.at("step").get<double>();
  maybe(j, "adjustable", p.adjustable);
  if (j.contains("scale")) {
    std::string s = j.at("scale").get<std::string>();
    if (s == "log")
      p.scale = Scale::Log;
    else if (s == "linear")
      p.scale = Scale::Linear;
    else
      throw std::invalid_argument("unknown scale: " + s);
  }
}

void to_json(nlohmann::json& j, const SloSpec& s) {
  j = {{"variable", s.variable}, {"threshold", s.threshold}, {"weight", s.weight}};
}

void from_json(const nlohmann::json& j, SloSpec& s) {
  s.variable = j.at("variable").get<std::string>();
  s.threshold = j.at("threshold").get<double>();
  s.weight = j.at("weight").get<double>();
}

void to_json(nlohmann::json& j, const ServiceSpec& s) {
  j = {{"id", s.id},
       {"kind", to_string(s.kind)},
       {"parameters", s.parameters},
       {"slos", s.slos},
       {"completion_parents", s.completion_parents}};
}

void from_json(const nlohmann::json& j, ServiceSpec& s) {
  s.id = j.at("id").get<std::string>();
  s.kind = service_kind_from_string(j.at("kind").get<std::string>());
  s.parameters = j.at("parameters").get<std::vector<ParameterSpec>>();
  s.slos = j.at("slos").get<std::vector<SloSpec>>();
  s.completion_parents = j.at("completion_parents").get<std::vector<std::string>>();
}

void to_json(nlohmann::json& j, const Assignment& a) {
  j = {{"budget", a.budget}, {"services", a.services}};
}

void from_json(const nlohmann::json& j, Assignment& a) {
  a = Assignment{};
  maybe(j, "budget", a.budget);
  a.services =
      j.at("services").get<std::map<std::string, std::map<std::string, double>>>();
}

void to_json(nlohmann::json& j, const MetricRecord& r) {
  j = {{"cycle", r.cycle}, {"service", r.service}, {"metrics", r.metrics}};
}

void from_json(const nlohmann::json& j, MetricRecord& r) {
  r.cycle = j.at("cycle").get<std::int64_t>();
  r.service = j.at("service").get<std::string>();
  r.metrics = j.at("metrics").get<std::map<std::string, double>>();
}

void to_json(nlohmann::json& j, const Violation& v) {
  j = {{"kind", to_string(v.kind)},
       {"service", v.service},
       {"variable", v.variable},
       {"value", v.value},
       {"message", v.message}};
}

void to_json(nlohmann::json& j, const ServiceTruth& t) {
  j = {{"base_demand", t.base_demand},
       {"quality_exponent", t.quality_exponent},
       {"quality_reference", t.quality_reference},
       {"arrival_rate", t.arrival_rate},
       {"noise_sigma", t.noise_sigma}};
  if (!t.model_factor.empty()) {
    nlohmann::json mf = nlohmann::json::object();
    for (const auto& [idx, f] : t.model_factor) mf[std::to_string(idx)] = f;
    j["model_factor"] = mf;
  }
}

void from_json(const nlohmann::json& j, ServiceTruth& t) {
  maybe(j, "base_demand", t.base_demand);
  maybe(j, "quality_exponent", t.quality_exponent);
  maybe(j, "quality_reference", t.quality_reference);
  maybe(j, "arrival_rate", t.arrival_rate);
  maybe(j, "noise_sigma", t.noise_sigma);
  if (j.contains("model_factor")) {
    t.model_factor.clear();
    for (const auto& [key, value] : j.at("model_factor").items())
      t.model_factor[std::stoi(key)] = value.get<double>();
  }
}

void to_json(nlohmann::json& j, const GroundTruthModel& m) {
  j = nlohmann::json::object();
  for (const auto& [id, t] : m.services) j[id] = t;
}

void from_json(const nlohmann::json& j, GroundTruthModel& m) {
  // Per-service overrides merge onto the existing entry (or defaults), so a
  // config can perturb one constant without restating the rest.
  for (const auto& [id, value] : j.items()) {
    ServiceTruth base = m.services.count(id) ? m.services.at(id) : ServiceTruth{};
    from_json(value, base);
    m.services[id] = base;
  }
}

void to_json(nlohmann::json& j, const SolverSettings& s) {
  j = {{"restarts", s.restarts},
       {"sweep_cap", s.sweep_cap},
       {"core_step", s.core_step},
       {"tolerance", s.tolerance},
       {"coarse_stride", s.coarse_stride},
       {"fine_window", s.fine_window},
       {"coarse_threshold", s.coarse_threshold},
       {"polish", s.polish}};
}

void from_json(const nlohmann::json& j, SolverSettings& s) {
  maybe(j, "restarts", s.restarts);
  maybe(j, "sweep_cap", s.sweep_cap);
  maybe(j, "core_step", s.core_step);
  maybe(j, "tolerance", s.tolerance);
  maybe(j, "coarse_stride", s.coarse_stride);
  maybe(j, "fine_window", s.fine_window);
  maybe(j, "coarse_threshold", s.coarse_threshold);
  maybe(j, "polish", s.polish);
}

void to_json(nlohmann::json& j, const CycleDiagnostics& d) {
  j = {{"phase", to_string(d.phase)},
       {"fit_count", d.fit_count},
       {"fallback", d.fallback},
       {"r_squared", d.r_squared},
       {"coefficients", d.coefficients}};
}

void from_json(const nlohmann::json& j, CycleDiagnostics& d) {
  d = CycleDiagnostics{};
  d.phase = phase_from_string(j.at("phase").get<std::string>());
  maybe(j, "fit_count", d.fit_count);
  maybe(j, "fallback", d.fallback);
  maybe(j, "r_squared", d.r_squared);
  maybe(j, "coefficients", d.coefficients);
}

}  // namespace slosim
