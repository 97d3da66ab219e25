#pragma once

#include <json.hpp>

#include "slosim/agent.hpp"
#include "slosim/domain.hpp"
#include "slosim/environment.hpp"
#include "slosim/solver.hpp"

// JSON conversions (nlohmann ADL style) for the wire and file formats:
// config files, trace entries, metric records, HTTP bodies. Keys are
// serialized in lexicographic order, so equal values always produce equal
// bytes.

namespace slosim {

void to_json(nlohmann::json& j, const ParameterSpec& p);
void from_json(const nlohmann::json& j, ParameterSpec& p);

void to_json(nlohmann::json& j, const SloSpec& s);
void from_json(const nlohmann::json& j, SloSpec& s);

void to_json(nlohmann::json& j, const ServiceSpec& s);
void from_json(const nlohmann::json& j, ServiceSpec& s);

void to_json(nlohmann::json& j, const Assignment& a);
void from_json(const nlohmann::json& j, Assignment& a);

void to_json(nlohmann::json& j, const MetricRecord& r);
void from_json(const nlohmann::json& j, MetricRecord& r);

void to_json(nlohmann::json& j, const Violation& v);

void to_json(nlohmann::json& j, const ServiceTruth& t);
void from_json(const nlohmann::json& j, ServiceTruth& t);

void to_json(nlohmann::json& j, const GroundTruthModel& m);
void from_json(const nlohmann::json& j, GroundTruthModel& m);

void to_json(nlohmann::json& j, const SolverSettings& s);
void from_json(const nlohmann::json& j, SolverSettings& s);

void to_json(nlohmann::json& j, const CycleDiagnostics& d);
void from_json(const nlohmann::json& j, CycleDiagnostics& d);

}  // namespace slosim
