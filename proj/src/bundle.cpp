#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "eilscond/errors.hpp"
#include "eilscond/io.hpp"

namespace eilscond::io {

namespace fs = std::filesystem;

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw IoError("sha256: init failed");
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0 && EVP_DigestUpdate(ctx.get(), buf.data(), std::size_t(in.gcount())) != 1)
      throw IoError("sha256: update failed");
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) throw IoError("sha256: final failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::map<std::string, std::string> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0)
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

namespace {

const char* const kDataFiles[] = {"A.mtx", "B.mtx", "b.mtx", "d.mtx"};

long long get_int(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw IoError("manifest: missing key '" + key + "'");
  try {
    std::size_t used = 0;
    const long long v = std::stoll(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw IoError("manifest: key '" + key + "' is not an integer");
  }
}

}  // namespace

void save_bundle(const fs::path& dir, const Bundle& bundle) {
  const EilsProblem<double>& p = bundle.problem;
  p.check_shapes();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());

  write_matrix_market(dir / "A.mtx", p.A);
  write_matrix_market(dir / "B.mtx", p.B);
  write_matrix_market(dir / "b.mtx", MatrixXd(p.b));
  write_matrix_market(dir / "d.mtx", MatrixXd(p.d));
  if (bundle.W) write_matrix_market(dir / "W.mtx", *bundle.W);

  std::ostringstream man;
  man << "# eilscond problem bundle\n";
  man << "format=eilscond-bundle-1\n";
  man << "m=" << p.m() << "\nn=" << p.n() << "\ns=" << p.s() << "\np=" << p.J.p << "\nq=" << p.J.q << '\n';
  for (const auto& [k, v] : bundle.meta) {
    if (k.find('=') != std::string::npos || k.find('\n') != std::string::npos || v.find('\n') != std::string::npos)
      throw IoError("manifest: metadata key/value may not contain '=' in keys or newlines");
    static const char* reserved[] = {"format", "m", "n", "s", "p", "q"};
    bool clash = k.rfind("sha256.", 0) == 0;
    for (const char* r : reserved) clash = clash || k == r;
    if (clash) throw IoError("manifest: metadata key '" + k + "' is reserved");
    man << k << '=' << v << '\n';
  }
  for (const char* f : kDataFiles) man << "sha256." << f << '=' << sha256_file(dir / f) << '\n';
  if (bundle.W) man << "sha256.W.mtx=" << sha256_file(dir / "W.mtx") << '\n';

  std::ofstream out(dir / "manifest.txt");
  if (!out) throw IoError("cannot write manifest in '" + dir.string() + "'");
  out << man.str();
  if (!out) throw IoError("manifest write failed");
}

Bundle load_bundle(const fs::path& dir, const LoadOptions& opts) {
  const auto kv = read_manifest(dir / "manifest.txt");
  Bundle bundle;

  std::vector<std::string> files(std::begin(kDataFiles), std::end(kDataFiles));
  const bool has_w = kv.count("sha256.W.mtx") > 0;
  if (has_w) files.push_back("W.mtx");
  if (opts.verify_checksums) {
    for (const auto& f : files) {
      const auto it = kv.find("sha256." + f);
      if (it == kv.end()) throw IoError("manifest: no checksum for " + f);
      const std::string actual = sha256_file(dir / f);
      if (actual != it->second) throw IoError("checksum mismatch for " + (dir / f).string());
    }
  }

  EilsProblem<double>& p = bundle.problem;
  p.A = read_matrix_market(dir / "A.mtx");
  p.B = read_matrix_market(dir / "B.mtx");
  p.b = read_vector(dir / "b.mtx");
  p.d = read_vector(dir / "d.mtx");
  if (has_w) bundle.W = read_matrix_market(dir / "W.mtx");
  p.J = SignatureMatrix{get_int(kv, "p"), get_int(kv, "q")};
  if (get_int(kv, "m") != p.m() || get_int(kv, "n") != p.n() || get_int(kv, "s") != p.s())
    throw IoError("manifest dimensions disagree with the data files");
  try {
    p.check_shapes();
  } catch (const ShapeMismatch& e) {
    throw IoError(std::string("bundle: ") + e.what());
  }

  for (const auto& [k, v] : kv) {
    if (k.rfind("sha256.", 0) == 0) continue;
    if (k == "format" || k == "m" || k == "n" || k == "s" || k == "p" || k == "q") continue;
    bundle.meta[k] = v;
  }

  if (opts.validate) {
    const auto rep = validate(p);
    if (!rep.passed) throw AssumptionViolated("bundle '" + dir.string() + "' fails validation: " + rep.reason);
  }
  return bundle;
}

}  // namespace eilscond::io
