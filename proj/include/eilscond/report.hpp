#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace eilscond::report {

/// A header plus string cells; rendered as CSV or as an aligned text table.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  void write_csv(std::ostream& out) const;
  void write_aligned(std::ostream& out) const;
};

/// %.6e formatting; NaN prints as "nan".
std::string num(double v);
/// %.4f formatting for ratios.
std::string fixed4(double v);

/// RFC 4180 quoting when the cell contains a comma, quote or newline.
std::string csv_escape(const std::string& cell);

}  // namespace eilscond::report
