#include "slosim/domain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace slosim {

int ParameterSpec::lattice_size() const {
  if (!discrete()) return 0;
  return static_cast<int>(std::llround((upper - lower) / *step)) + 1;
}

double ParameterSpec::lattice_value(int k) const { return lower + k * *step; }

double ParameterSpec::snap(double v) const {
  double clamped = std::clamp(v, lower, upper);
  if (!discrete()) return clamped;
  long long k = std::llround((clamped - lower) / *step);
  k = std::clamp(k, 0LL, static_cast<long long>(lattice_size() - 1));
  return lattice_value(static_cast<int>(k));
}

bool ParameterSpec::on_lattice(double v, double tol) const {
  if (!discrete()) return true;
  return std::abs(v - snap(v)) <= tol;
}

std::string to_string(ServiceKind k) {
  switch (k) {
    case ServiceKind::QR: return "QR";
    case ServiceKind::CV: return "CV";
    case ServiceKind::PC: return "PC";
  }
  return "?";
}

ServiceKind service_kind_from_string(const std::string& s) {
  if (s == "QR") return ServiceKind::QR;
  if (s == "CV") return ServiceKind::CV;
  if (s == "PC") return ServiceKind::PC;
  throw std::invalid_argument("unknown service kind: " + s);
}

const ParameterSpec* ServiceSpec::find_parameter(const std::string& name) const {
  for (const auto& p : parameters)
    if (p.name == name) return &p;
  return nullptr;
}

std::vector<const ParameterSpec*> ServiceSpec::adjustable_parameters() const {
  std::vector<const ParameterSpec*> out;
  for (const auto& p : parameters)
    if (p.adjustable) out.push_back(&p);
  return out;
}

double Assignment::get(const std::string& service, const std::string& var) const {
  auto s = services.find(service);
  if (s == services.end())
    throw std::invalid_argument("assignment has no service: " + service);
  auto v = s->second.find(var);
  if (v == s->second.end())
    throw std::invalid_argument("assignment has no value for " + service + "." + var);
  return v->second;
}

void Assignment::set(const std::string& service, const std::string& var, double value) {
  services[service][var] = value;
}

bool Assignment::has(const std::string& service, const std::string& var) const {
  auto s = services.find(service);
  return s != services.end() && s->second.count(var) > 0;
}

double Assignment::total_cores() const {
  double total = 0.0;
  for (const auto& [id, vars] : services) {
    auto it = vars.find(kCoresVar);
    if (it != vars.end()) total += it->second;
  }
  return total;
}

std::string to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::OutOfBounds: return "out-of-bounds";
    case ViolationKind::OffLattice: return "off-lattice";
    case ViolationKind::BudgetExceeded: return "budget-exceeded";
    case ViolationKind::NonPositiveCores: return "non-positive-cores";
    case ViolationKind::ObservedOnly: return "observed-only";
    case ViolationKind::UnknownService: return "unknown-service";
    case ViolationKind::MissingService: return "missing-service";
    case ViolationKind::UnknownVariable: return "unknown-variable";
    case ViolationKind::MissingVariable: return "missing-variable";
  }
  return "?";
}

double slo_fulfillment(double value, const SloSpec& slo) {
  if (slo.threshold <= 0.0)
    throw std::invalid_argument("invalid SLO on " + slo.variable +
                                ": threshold must be positive");
  return std::clamp(value / slo.threshold, 0.0, 1.0);
}

double service_fulfillment(const std::map<std::string, double>& metrics,
                           const std::vector<SloSpec>& slos) {
  if (slos.empty()) throw std::invalid_argument("service has no SLOs");
  double num = 0.0, den = 0.0;
  for (const auto& slo : slos) {
    auto it = metrics.find(slo.variable);
    if (it == metrics.end())
      throw std::invalid_argument("incomplete metrics: missing " + slo.variable);
    num += slo.weight * slo_fulfillment(it->second, slo);
    den += slo.weight;
  }
  if (den <= 0.0) throw std::invalid_argument("SLO weights sum to zero");
  return num / den;
}

double global_fulfillment(const std::vector<double>& per_service) {
  if (per_service.empty())
    throw std::invalid_argument("global fulfillment of zero services");
  double total = 0.0;
  for (double v : per_service) total += v;
  return total / static_cast<double>(per_service.size());
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::vector<Violation> validate_assignment(const Assignment& a,
                                           const std::vector<ServiceSpec>& specs,
                                           double budget) {
  std::vector<Violation> out;
  for (const auto& [id, vars] : a.services) {
    const ServiceSpec* spec = find_spec(specs, id);
    if (spec == nullptr) {
      out.push_back({ViolationKind::UnknownService, id, "", 0.0,
                     "assignment names unknown service " + id});
      continue;
    }
    for (const auto& [name, value] : vars) {
      const ParameterSpec* p = spec->find_parameter(name);
      if (p == nullptr) {
        out.push_back({ViolationKind::UnknownVariable, id, name, value,
                       id + "." + name + " is not a declared parameter"});
        continue;
      }
      if (!p->adjustable) {
        out.push_back({ViolationKind::ObservedOnly, id, name, value,
                       id + "." + name + " is observed-only and cannot be set"});
        continue;
      }
      if (name == kCoresVar && value < kMinCores - kBoundTol) {
        out.push_back({ViolationKind::NonPositiveCores, id, name, value,
                       id + ".cores = " + fmt(value) + " below the minimum " +
                           fmt(kMinCores)});
        continue;
      }
      if (value < p->lower - kBoundTol || value > p->upper + kBoundTol) {
        out.push_back({ViolationKind::OutOfBounds, id, name, value,
                       id + "." + name + " = " + fmt(value) + " outside [" +
                           fmt(p->lower) + ", " + fmt(p->upper) + "]"});
        continue;
      }
      if (!p->on_lattice(value)) {
        out.push_back({ViolationKind::OffLattice, id, name, value,
                       id + "." + name + " = " + fmt(value) +
                           " is not on the lattice " + fmt(p->lower) + " + k*" +
                           fmt(*p->step)});
      }
    }
    // A configured service must set every adjustable parameter.
    for (const ParameterSpec* p : spec->adjustable_parameters()) {
      if (vars.count(p->name) == 0)
        out.push_back({ViolationKind::MissingVariable, id, p->name, 0.0,
                       id + "." + p->name + " is not set"});
    }
  }
  for (const auto& spec : specs) {
    if (a.services.count(spec.id) == 0)
      out.push_back({ViolationKind::MissingService, spec.id, "", 0.0,
                     "assignment does not configure service " + spec.id});
  }
  double total = a.total_cores();
  if (total > budget + kBudgetTol)
    out.push_back({ViolationKind::BudgetExceeded, "", kCoresVar, total,
                   "core total " + fmt(total) + " exceeds budget " + fmt(budget)});
  return out;
}

std::vector<Violation> validate_assignment(const Assignment& a,
                                           const std::vector<ServiceSpec>& specs) {
  return validate_assignment(a, specs, a.budget);
}

Assignment snap_assignment(const Assignment& a,
                           const std::vector<ServiceSpec>& specs) {
  Assignment out = a;
  for (auto& [id, vars] : out.services) {
    const ServiceSpec* spec = find_spec(specs, id);
    if (spec == nullptr) continue;
    for (auto& [name, value] : vars) {
      const ParameterSpec* p = spec->find_parameter(name);
      if (p != nullptr && p->adjustable) value = p->snap(value);
    }
  }
  return out;
}

void validate_specs(const std::vector<ServiceSpec>& specs) {
  if (specs.empty()) throw std::invalid_argument("no service specs");
  for (const auto& s : specs) {
    if (s.id.empty()) throw std::invalid_argument("service with empty id");
    for (const auto& p : s.parameters) {
      if (!(p.lower < p.upper))
        throw std::invalid_argument(s.id + "." + p.name + ": lower must be < upper");
      if (p.discrete()) {
        if (*p.step <= 0.0)
          throw std::invalid_argument(s.id + "." + p.name + ": step must be > 0");
        double k = (p.upper - p.lower) / *p.step;
        if (std::abs(k - std::llround(k)) > 1e-9)
          throw std::invalid_argument(s.id + "." + p.name +
                                      ": range is not a multiple of step");
      }
    }
    const ParameterSpec* cores = s.find_parameter(kCoresVar);
    if (cores == nullptr || !cores->adjustable || cores->discrete())
      throw std::invalid_argument(s.id + ": needs a continuous adjustable cores parameter");
    const ParameterSpec* comp = s.find_parameter(kCompletionVar);
    if (comp == nullptr || comp->adjustable)
      throw std::invalid_argument(s.id + ": completion must be declared observed-only");
    if (comp->lower != 0.0 || comp->upper != 1.0)
      throw std::invalid_argument(s.id + ": completion bounds must be [0, 1]");
    for (const auto& slo : s.slos) {
      if (slo.weight <= 0.0 || slo.weight > 1.0)
        throw std::invalid_argument(s.id + " SLO " + slo.variable +
                                    ": weight must be in (0, 1]");
      const ParameterSpec* v = s.find_parameter(slo.variable);
      if (v == nullptr)
        throw std::invalid_argument(s.id + " SLO names unknown variable " + slo.variable);
      if (slo.threshold < v->lower - kBoundTol || slo.threshold > v->upper + kBoundTol)
        throw std::invalid_argument(s.id + " SLO " + slo.variable +
                                    ": threshold outside variable bounds");
    }
    for (const auto& parent : s.completion_parents) {
      const ParameterSpec* p = s.find_parameter(parent);
      if (p == nullptr || !p->adjustable)
        throw std::invalid_argument(s.id + ": completion parent " + parent +
                                    " is not an adjustable parameter");
    }
    if (s.completion_parents.empty())
      throw std::invalid_argument(s.id + ": completion has no declared parents");
  }
}

std::vector<ServiceSpec> default_specs() {
  ParameterSpec cores{kCoresVar, 0.0, 8.0, std::nullopt, true, Scale::Log};
  ParameterSpec completion{kCompletionVar, 0.0, 1.0, std::nullopt, false, Scale::Linear};

  ServiceSpec qr;
  qr.id = "qr";
  qr.kind = ServiceKind::QR;
  qr.parameters = {cores,
                   {"data_quality", 100.0, 1000.0, 1.0, true, Scale::Log},
                   completion};
  qr.slos = {{"data_quality", 800.0, 0.5}, {kCompletionVar, 1.0, 1.0}};
  qr.completion_parents = {kCoresVar, "data_quality"};

  ServiceSpec cv;
  cv.id = "cv";
  cv.kind = ServiceKind::CV;
  cv.parameters = {cores,
                   {"data_quality", 128.0, 320.0, 32.0, true, Scale::Log},
                   {"model_size", 1.0, 4.0, 1.0, true, Scale::Linear},
                   completion};
  cv.slos = {{"data_quality", 288.0, 0.2},
             {"model_size", 3.0, 0.2},
             {kCompletionVar, 1.0, 1.0}};
  cv.completion_parents = {kCoresVar, "data_quality", "model_size"};

  ServiceSpec pc;
  pc.id = "pc";
  pc.kind = ServiceKind::PC;
  pc.parameters = {cores,
                   {"data_quality", 6.0, 60.0, 1.0, true, Scale::Log},
                   completion};
  pc.slos = {{"data_quality", 40.0, 0.5}, {kCompletionVar, 1.0, 1.0}};
  pc.completion_parents = {kCoresVar, "data_quality"};

  return {qr, cv, pc};
}

const ServiceSpec* find_spec(const std::vector<ServiceSpec>& specs,
                             const std::string& id) {
  for (const auto& s : specs)
    if (s.id == id) return &s;
  return nullptr;
}

}  // namespace slosim
