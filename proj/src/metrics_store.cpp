#include "slosim/metrics_store.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace slosim {

void MetricStore::append(const MetricRecord& record) {
  auto& list = records_[record.service];
  if (!list.empty() && record.cycle < list.back().cycle)
    throw std::invalid_argument(
        "out-of-order append for " + record.service + ": cycle " +
        std::to_string(record.cycle) + " after " + std::to_string(list.back().cycle));
  list.push_back(record);
}

MetricTable MetricStore::to_table(const std::string& service,
                                  const std::vector<std::string>& columns,
                                  const Window& window) const {
  MetricTable table;
  table.columns = columns;
  auto it = records_.find(service);
  if (it == records_.end() || it->second.empty()) return table;
  const auto& list = it->second;

  std::size_t count = window.is_all ? list.size() : std::min(window.n, list.size());
  std::size_t start = list.size() - count;
  for (std::size_t i = start; i < list.size(); ++i) {
    const MetricRecord& r = list[i];
    std::vector<double> row;
    row.reserve(columns.size());
    for (const auto& col : columns) {
      auto v = r.metrics.find(col);
      if (v == r.metrics.end())
        throw std::invalid_argument("unknown column " + col + " for service " + service);
      row.push_back(v->second);
    }
    table.cycles.push_back(r.cycle);
    table.rows.push_back(std::move(row));
  }
  return table;
}

const std::vector<MetricRecord>& MetricStore::records_for(
    const std::string& service) const {
  static const std::vector<MetricRecord> kEmpty;
  auto it = records_.find(service);
  return it == records_.end() ? kEmpty : it->second;
}

std::vector<std::string> MetricStore::services() const {
  std::vector<std::string> out;
  for (const auto& [id, list] : records_)
    if (!list.empty()) out.push_back(id);
  return out;
}

std::size_t MetricStore::size() const {
  std::size_t total = 0;
  for (const auto& [id, list] : records_) total += list.size();
  return total;
}

std::size_t MetricStore::size(const std::string& service) const {
  auto it = records_.find(service);
  return it == records_.end() ? 0 : it->second.size();
}

void MetricStore::persist(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  // Interleave services by cycle so the file reads chronologically and a
  // reload appends in an order every per-service precondition accepts.
  std::vector<const MetricRecord*> all;
  for (const auto& [id, list] : records_)
    for (const auto& r : list) all.push_back(&r);
  std::stable_sort(all.begin(), all.end(),
                   [](const MetricRecord* a, const MetricRecord* b) {
                     return a->cycle < b->cycle;
                   });
  for (const MetricRecord* r : all) {
    nlohmann::json j{{"cycle", r->cycle}, {"service", r->service}, {"metrics", r->metrics}};
    out << j.dump() << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

MetricStore MetricStore::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  MetricStore store;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("cycle") ||
        !j.contains("service") || !j.contains("metrics"))
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed metric record");
    MetricRecord r;
    try {
      r.cycle = j.at("cycle").get<std::int64_t>();
      r.service = j.at("service").get<std::string>();
      r.metrics = j.at("metrics").get<std::map<std::string, double>>();
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    store.append(r);
  }
  return store;
}

}  // namespace slosim
