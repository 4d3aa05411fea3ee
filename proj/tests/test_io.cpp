#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "eilscond/io.hpp"
#include "test_util.hpp"

using namespace eilscond;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("eilscond_test_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("Matrix Market round trip is bit exact") {
  std::mt19937_64 gen(1);
  MatrixXd a = test::randn(4, 3, gen);
  a(0, 0) = 1e-300;
  a(1, 2) = -0.0;
  a(3, 1) = 1.0 / 3.0;
  const MatrixXd back = io::parse_matrix_market(io::format_matrix_market(a, "a comment"));
  CHECK(back == a);
  CHECK(io::parse_matrix_market(io::format_matrix_market(MatrixXd(0, 3))).cols() == 3);
  const std::string text = io::format_matrix_market(a);
  CHECK(text.rfind("%%MatrixMarket matrix array real general", 0) == 0);
}

TEST_CASE("Matrix Market parse errors") {
  CHECK_THROWS_AS(io::parse_matrix_market("garbage\n1 1\n1\n"), IoError);
  CHECK_THROWS_AS(io::parse_matrix_market("%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 1\n"), IoError);
  CHECK_THROWS_AS(io::parse_matrix_market("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n"), IoError);
  CHECK_THROWS_AS(io::parse_matrix_market("%%MatrixMarket matrix array real general\n1 1\nnan\n"), IoError);
  CHECK_THROWS_AS(io::format_matrix_market(MatrixXd::Constant(1, 1, std::numeric_limits<double>::infinity())),
                  IoError);
  CHECK_THROWS_AS(io::read_matrix_market("/nonexistent/eilscond/a.mtx"), IoError);
}

TEST_CASE("vectors must be single columns") {
  const fs::path dir = scratch("vec");
  io::write_matrix_market(dir / "v.mtx", VectorXd::Ones(3));
  CHECK(io::read_vector(dir / "v.mtx").size() == 3);
  io::write_matrix_market(dir / "m.mtx", MatrixXd::Ones(3, 2));
  CHECK_THROWS_AS(io::read_vector(dir / "m.mtx"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("sha256 of known content") {
  const fs::path dir = scratch("sha");
  std::ofstream(dir / "abc.txt", std::ios::binary) << "abc";
  CHECK(io::sha256_file(dir / "abc.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  fs::remove_all(dir);
}

TEST_CASE("bundle save and load") {
  const fs::path dir = scratch("bundle");
  io::Bundle b;
  b.problem = test::small_problem(7).problem;
  b.meta["seed"] = "7";
  io::save_bundle(dir, b);
  for (const char* f : {"A.mtx", "B.mtx", "b.mtx", "d.mtx", "manifest.txt"}) CHECK(fs::exists(dir / f));
  CHECK_FALSE(fs::exists(dir / "W.mtx"));

  const io::Bundle back = io::load_bundle(dir);
  CHECK(back.problem.A == b.problem.A);
  CHECK(back.problem.B == b.problem.B);
  CHECK(back.problem.b == b.problem.b);
  CHECK(back.problem.d == b.problem.d);
  CHECK(back.problem.J.p == b.problem.J.p);
  CHECK(back.problem.J.q == b.problem.J.q);
  CHECK(back.meta.at("seed") == "7");
  CHECK_FALSE(back.W.has_value());

  SUBCASE("corrupted data is detected") {
    MatrixXd A = b.problem.A;
    A(0, 0) += 1;
    io::write_matrix_market(dir / "A.mtx", A);
    CHECK_THROWS_AS(io::load_bundle(dir), IoError);
    io::LoadOptions lax;
    lax.verify_checksums = false;
    CHECK(io::load_bundle(dir, lax).problem.A == A);
  }
  SUBCASE("missing file") {
    fs::remove(dir / "d.mtx");
    CHECK_THROWS_AS(io::load_bundle(dir), IoError);
  }
  fs::remove_all(dir);
}

TEST_CASE("bundle with a weight matrix and an invalid problem") {
  const fs::path dir = scratch("bundle_w");
  io::Bundle b;
  b.problem = test::small_problem(8).problem;
  b.W = MatrixXd::Identity(b.problem.m(), b.problem.m());
  io::save_bundle(dir, b);
  CHECK(io::load_bundle(dir).W.value() == *b.W);

  io::Bundle bad;
  bad.problem = b.problem;
  bad.problem.B.row(1) = bad.problem.B.row(0);
  bad.problem.d(1) = bad.problem.d(0);
  io::save_bundle(dir, bad);
  CHECK_THROWS_AS(io::load_bundle(dir), AssumptionViolated);
  io::LoadOptions lax;
  lax.validate = false;
  CHECK_NOTHROW(io::load_bundle(dir, lax));
  fs::remove_all(dir);
}
