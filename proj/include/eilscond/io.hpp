#pragma once

// Matrix Market (array, real, general) files and on-disk problem bundles.

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "eilscond/densela.hpp"
#include "eilscond/problem.hpp"

namespace eilscond::io {

/// Column-major "%%MatrixMarket matrix array real general", 17 significant digits.
std::string format_matrix_market(const MatrixXd& a, const std::string& comment = "");
MatrixXd parse_matrix_market(const std::string& text);

void write_matrix_market(const std::filesystem::path& path, const MatrixXd& a, const std::string& comment = "");
MatrixXd read_matrix_market(const std::filesystem::path& path);
VectorXd read_vector(const std::filesystem::path& path);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// A problem directory: manifest.txt plus A.mtx, B.mtx, b.mtx, d.mtx (W.mtx optional).
/// The manifest is flat key=value text; sha256.<file> lines guard every data file.
struct Bundle {
  EilsProblem<double> problem;
  std::optional<MatrixXd> W;
  std::map<std::string, std::string> meta;  // generator spec, seed, achieved conditioning
};

void save_bundle(const std::filesystem::path& dir, const Bundle& bundle);

struct LoadOptions {
  bool verify_checksums = true;
  bool validate = true;  // throw AssumptionViolated if the problem fails validate()
};

Bundle load_bundle(const std::filesystem::path& dir, const LoadOptions& opts = {});

std::map<std::string, std::string> read_manifest(const std::filesystem::path& path);

}  // namespace eilscond::io
