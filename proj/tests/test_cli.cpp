#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = ctscheme::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("ctscheme-cli-" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("compute and query") {
  TempDir tmp;
  auto r = run({"compute", "--kind", "scaling", "--seq", "catalan", "-p", "3", "-r", "1"});
  CHECK(r.code == 0);
  CHECK(r.out == "scaling 3-scheme with 3 states modulo 3\n");

  const auto m52 = tmp.file("motzkin-5-2.json");
  r = run({"compute", "--kind", "scaling", "--seq", "motzkin", "-p", "5", "-r", "2", "-o", m52});
  CHECK(r.code == 0);
  CHECK(r.out == "scaling 5-scheme with 54 states modulo 5^2\n");
  CHECK(run({"nth", "--scheme", m52, "--index", "10^100"}).out == "12\n");

  const auto m23 = tmp.file("motzkin-2-3.json");
  CHECK(run({"compute", "--kind", "scaling", "--seq", "motzkin", "-p", "2", "-r", "3", "-o", m23}).code == 0);
  CHECK(run({"values", "--scheme", m23, "--impossible"}).out == "{0}\n");
  CHECK(run({"values", "--scheme", m23}).out == "{1, 2, 3, 4, 5, 6, 7}\n");

  const auto v = tmp.file("v.json");
  r = run({"valuation", "--scheme", m23, "-o", v});
  CHECK(r.out == "automatic 2-scheme with 10 states modulo 2^3\nvaluations {0, 1, 2}\n");
  CHECK(run({"values", "--scheme", v}).out == "{1, 2, 4}\n");
  CHECK(run({"first", "--scheme", v, "--value", "4"}).out == "3\n");
  CHECK(run({"first", "--scheme", m23, "--value", "0"}).out == "none\n");

  // 7^2 divides M(23), so the top valuation is only known to be at least 2.
  const auto m72 = tmp.file("motzkin-7-2.json");
  CHECK(run({"compute", "--kind", "scaling", "--seq", "motzkin", "-p", "7", "-r", "2", "-o", m72}).code == 0);
  const auto vout = run({"valuation", "--scheme", m72}).out;
  CHECK(vout.substr(vout.find('\n') + 1) == "valuations {0, 1, >=2}\n");

  const auto ap = tmp.file("apery.json");
  r = run({"compute", "--kind", "automatic", "--seq", "apery3", "-p", "2", "-r", "3", "-o", ap});
  CHECK(r.code == 0);
  const auto apm = tmp.file("apery-min.json");
  CHECK(run({"minimize", "--scheme", ap, "-o", apm}).out == "automatic 2-scheme with 3 states modulo 2^3\n");
  CHECK(run({"values", "--scheme", apm}).out == "{1, 5}\n");

  const auto dot = run({"dot", "--scheme", apm});
  CHECK(dot.code == 0);
  CHECK(dot.out.rfind("digraph scheme {", 0) == 0);
  const auto dotfile = tmp.file("a.dot");
  CHECK(run({"dot", "--scheme", apm, "-o", dotfile}).out.empty());
  CHECK(slurp(dotfile) == dot.out);
}

TEST_CASE("custom polynomials and reduction") {
  TempDir tmp;
  auto r = run({"compute", "--kind", "linear", "--poly", "1/x+2+x", "--weight", "1-x", "-p", "3"});
  CHECK(r.out == "linear 3-scheme with 2 states modulo 3\n");
  r = run({"compute", "--kind", "scaling", "--seq", "motzkin", "-p", "13", "-r", "2", "--reduce"});
  CHECK(r.out == "scaling 13-scheme with 48 states modulo 13^2\n");
  r = run({"compute", "--kind", "automatic", "--poly", "(1+x)*(1+y)/(x*y)", "--vars", "x,y", "-p", "2",
           "-r", "2", "--no-symmetry"});
  CHECK(r.code == 0);
}

TEST_CASE("deterministic output files") {
  TempDir tmp;
  const auto a = tmp.file("a.json"), b = tmp.file("b.json");
  for (const auto& f : {a, b}) {
    run({"compute", "--kind", "linear", "--seq", "motzkin", "-p", "3", "-r", "2", "-o", f});
  }
  CHECK(slurp(a) == slurp(b));
  CHECK(!slurp(a).empty());
}

TEST_CASE("crt, census, scan") {
  CHECK(run({"crt", "19:32", "2187:3125"}).out == "27187 modulo 100000\n");
  CHECK(run({"crt", "3:8", "62:125"}).out == "187 modulo 1000\n");
  auto r = run({"crt", "1:4", "1:6"});
  CHECK(r.code == 1);
  CHECK(r.err.find("NonCoprimeModuli") != std::string::npos);

  r = run({"census", "--seq", "catalan", "-p", "2", "--rmax", "4"});
  CHECK(r.code == 0);
  CHECK(r.out.find("4   5         1") != std::string::npos);

  r = run({"scan", "--seq", "motzkin", "-r", "2", "--primes", "2..13", "--witness", "--jobs", "2"});
  CHECK(r.code == 0);
  std::istringstream lines(r.out);
  std::vector<std::string> rows;
  for (std::string l; std::getline(lines, l);) rows.push_back(l);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].find("\"prime\":2,\"zero_attained\":true,\"witness\":3") != std::string::npos);
  CHECK(rows[2].find("\"prime\":5,\"zero_attained\":false,\"witness\":null") != std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"compute", "--kind", "scaling", "--seq", "nope", "-p", "2"}).code == 1);
  CHECK(run({"compute", "--kind", "affine", "--seq", "catalan", "-p", "2"}).code == 1);
  CHECK(run({"compute", "--kind", "linear", "--seq", "catalan", "-p", "4"}).code == 1);
  CHECK(run({"compute", "--kind", "linear", "--poly", "1/(1+x)", "-p", "3"}).code == 1);
  CHECK(run({"compute", "--kind", "linear", "-p", "3"}).code == 1);
  CHECK(run({"nth", "--scheme", "/nonexistent/x.json", "--index", "3"}).code == 1);
  CHECK(run({"scan", "--seq", "motzkin", "--primes", "10"}).code == 1);

  auto r = run({"compute", "--kind", "automatic", "--seq", "motzkin", "-p", "2", "-r", "6", "--max-states", "10"});
  CHECK(r.code == 2);
  CHECK(r.err.find("StateCapExceeded") != std::string::npos);
  CHECK(r.out.empty());

  TempDir tmp;
  const auto f = tmp.file("m.json");
  run({"compute", "--kind", "scaling", "--seq", "motzkin", "-p", "7", "-r", "2", "-o", f});
  CHECK(run({"first", "--scheme", f, "--value", "0", "--max-digits", "1"}).code == 2);
  const auto lin = tmp.file("lin.json");
  run({"compute", "--kind", "linear", "--seq", "motzkin", "-p", "7", "-r", "2", "-o", lin});
  CHECK(run({"values", "--scheme", lin, "--cap", "3"}).code == 2);
  CHECK(run({"dot", "--scheme", lin}).code == 1);

  std::ofstream(tmp.file("bad.json")) << R"({"format":"ctscheme-v1","kind":"affine"})";
  r = run({"nth", "--scheme", tmp.file("bad.json"), "--index", "1"});
  CHECK(r.code == 1);
  CHECK(r.err.find("FormatError") != std::string::npos);
}
