#include "eilscond/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "eilscond/errors.hpp"

namespace eilscond::report {

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != columns.size())
    throw InvalidArgument("report: row has " + std::to_string(row.size()) + " cells, header has " +
                          std::to_string(columns.size()));
  rows.push_back(std::move(row));
}

std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void Table::write_csv(std::ostream& out) const {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_escape(cells[i]);
    out << '\n';
  };
  line(columns);
  for (const auto& r : rows) line(r);
}

void Table::write_aligned(std::ostream& out) const {
  std::vector<std::size_t> width(columns.size());
  for (std::size_t i = 0; i < columns.size(); ++i) width[i] = columns[i].size();
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << "  ";
      out << std::string(width[i] - cells[i].size(), ' ') << cells[i];
    }
    out << '\n';
  };
  line(columns);
  for (const auto& r : rows) line(r);
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

std::string fixed4(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace eilscond::report
