#pragma once

// Writers for run artifacts: per-step CSV, flat metrics file, comparison
// table. Numbers use the shortest round-trip representation so identical
// logs give identical bytes.

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "aphi/metrics.hpp"
#include "aphi/sim_engine.hpp"

namespace aphi {

/// Column names in output order.
const std::vector<std::string>& csv_columns();

void write_csv(std::ostream& out, const SimLog& log);

/// `key = value` lines: run identity first, then metrics_fields().
void write_metrics(std::ostream& out, const SimLog& log,
                   const MetricsReport& report);

struct ComparisonEntry {
  std::string label;
  MetricsReport report;
};

/// One row per metric, one column per controller variant.
void write_comparison(std::ostream& out,
                      const std::vector<ComparisonEntry>& entries);

std::string format_number(double v);

}  // namespace aphi
