#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "slosim/domain.hpp"

// Append-only time-series storage of MetricRecords with windowed tabular
// export for regression training, plus JSON Lines persistence.

namespace slosim {

struct MetricTable {
  std::vector<std::string> columns;
  std::vector<std::int64_t> cycles;
  // rows[i][j] is the value of columns[j] at cycles[i]; rows are sorted by
  // cycle ascending.
  std::vector<std::vector<double>> rows;

  std::size_t row_count() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
};

struct Window {
  bool is_all = true;
  std::size_t n = 0;

  static Window all() { return {true, 0}; }
  static Window last(std::size_t n) { return {false, n}; }
};

class MetricStore {
 public:
  // Rejects records older than the service's latest timestamp; equal
  // timestamps are allowed.
  void append(const MetricRecord& record);

  // Rectangular table with exactly the requested columns in the requested
  // order. An empty store yields an empty table; a column absent from the
  // service's records is an error naming it.
  MetricTable to_table(const std::string& service,
                       const std::vector<std::string>& columns,
                       const Window& window = Window::all()) const;

  const std::vector<MetricRecord>& records_for(const std::string& service) const;
  std::vector<std::string> services() const;
  std::size_t size() const;
  std::size_t size(const std::string& service) const;
  bool empty() const { return size() == 0; }

  // One record per line: {"cycle": <int>, "service": "<id>", "metrics": {...}}.
  void persist(const std::string& path) const;
  static MetricStore load(const std::string& path);

  bool operator==(const MetricStore&) const = default;

 private:
  std::map<std::string, std::vector<MetricRecord>> records_;
};

}  // namespace slosim
