#include "aphi/log_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>

namespace aphi {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c{"t"};
    for (const char* prefix : {"q", "qd", "qt", "T", "dhat", "h"})
      for (int i = 1; i <= 6; ++i) c.push_back(prefix + std::to_string(i));
    for (const char* name : {"qp_status", "fc_x", "fc_y", "fc_z", "cart_x", "cart_v"})
      c.emplace_back(name);
    return c;
  }();
  return cols;
}

void write_csv(std::ostream& out, const SimLog& log) {
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i)
    out << (i ? "," : "") << cols[i];
  out << '\n';
  std::string line;
  auto put = [&line](double v) {
    line += ',';
    line += format_number(v);
  };
  for (const LogRow& r : log.rows) {
    line = format_number(r.t);
    for (const Vec6* v : {&r.q, &r.q_d, &r.q_t, &r.thrust.T, &r.d_hat, &r.h})
      for (int i = 0; i < 6; ++i) put((*v)[i]);
    line += ',';
    line += to_string(r.status);
    for (int i = 0; i < 3; ++i) put(r.contact_force[i]);
    put(r.cart.x);
    put(r.cart.v);
    line += '\n';
    out << line;
  }
}

void write_metrics(std::ostream& out, const SimLog& log,
                   const MetricsReport& report) {
  out << "scenario = " << log.scenario << '\n'
      << "controller = " << to_string(log.controller) << '\n'
      << "seed = " << log.seed << '\n'
      << "dt = " << format_number(log.dt) << '\n';
  for (const auto& [k, v] : metrics_fields(report)) out << k << " = " << v << '\n';
  for (const auto& w : log.warnings) out << "warning = " << w << '\n';
}

void write_comparison(std::ostream& out,
                      const std::vector<ComparisonEntry>& entries) {
  if (entries.empty()) return;
  std::vector<std::vector<std::pair<std::string, std::string>>> cols;
  for (const auto& e : entries) cols.push_back(metrics_fields(e.report));

  // Rows follow the first column's keys; later columns may lack abort_reason.
  std::vector<std::string> keys;
  for (const auto& col : cols)
    for (const auto& [k, v] : col)
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);

  auto lookup = [](const auto& col, const std::string& key) -> std::string {
    for (const auto& [k, v] : col)
      if (k == key) return v;
    return "-";
  };

  std::size_t key_w = std::string("metric").size();
  for (const auto& k : keys) key_w = std::max(key_w, k.size());
  std::vector<std::size_t> widths;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    std::size_t w = entries[c].label.size();
    for (const auto& k : keys) w = std::max(w, lookup(cols[c], k).size());
    widths.push_back(w);
  }

  out << std::left << std::setw(static_cast<int>(key_w)) << "metric";
  for (std::size_t c = 0; c < cols.size(); ++c)
    out << "  " << std::setw(static_cast<int>(widths[c])) << entries[c].label;
  out << '\n';
  for (const auto& k : keys) {
    out << std::setw(static_cast<int>(key_w)) << k;
    for (std::size_t c = 0; c < cols.size(); ++c)
      out << "  " << std::setw(static_cast<int>(widths[c])) << lookup(cols[c], k);
    out << '\n';
  }
  out << std::right;
}

}  // namespace aphi
