#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "eilscond/errors.hpp"
#include "eilscond/io.hpp"

namespace eilscond::io {

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = char(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string format_matrix_market(const MatrixXd& a, const std::string& comment) {
  if (!a.allFinite()) throw IoError("matrix market: refusing to write non-finite values");
  std::ostringstream out;
  out << "%%MatrixMarket matrix array real general\n";
  if (!comment.empty()) {
    std::istringstream lines(comment);
    std::string line;
    while (std::getline(lines, line)) out << "% " << line << '\n';
  }
  out << a.rows() << ' ' << a.cols() << '\n';
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) out << format_value(a(i, j)) << '\n';
  return out.str();
}

MatrixXd parse_matrix_market(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("matrix market: empty input");
  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") throw IoError("matrix market: missing %%MatrixMarket banner");
  if (lower(object) != "matrix" || lower(format) != "array" || lower(field) != "real" ||
      lower(symmetry) != "general")
    throw IoError("matrix market: only 'matrix array real general' is supported, got '" + line + "'");

  while (std::getline(in, line)) {
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '%') continue;
    break;
  }
  long long rows = -1, cols = -1;
  {
    std::istringstream dims(line);
    if (!(dims >> rows >> cols) || rows < 0 || cols < 0) throw IoError("matrix market: bad size line '" + line + "'");
  }
  MatrixXd a(rows, cols);
  for (long long j = 0; j < cols; ++j) {
    for (long long i = 0; i < rows; ++i) {
      std::string tok;
      if (!(in >> tok)) throw IoError("matrix market: fewer entries than rows*cols");
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        throw IoError("matrix market: unparsable entry '" + tok + "'");
      }
      if (used != tok.size()) throw IoError("matrix market: unparsable entry '" + tok + "'");
      if (!std::isfinite(v)) throw IoError("matrix market: non-finite entry '" + tok + "'");
      a(i, j) = v;
    }
  }
  std::string extra;
  if (in >> extra) throw IoError("matrix market: more entries than rows*cols");
  return a;
}

void write_matrix_market(const std::filesystem::path& path, const MatrixXd& a, const std::string& comment) {
  const std::string text = format_matrix_market(a, comment);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

MatrixXd read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_matrix_market(buf.str());
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

VectorXd read_vector(const std::filesystem::path& path) {
  const MatrixXd a = read_matrix_market(path);
  if (a.cols() != 1 && a.rows() != 1 && a.size() != 0)
    throw IoError(path.string() + ": expected a vector, got " + std::to_string(a.rows()) + "x" +
                  std::to_string(a.cols()));
  return Eigen::Map<const VectorXd>(a.data(), a.size());
}

}  // namespace eilscond::io
