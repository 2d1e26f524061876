#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli/run.hpp"

namespace {

int run_cli(std::initializer_list<const char*> args) {
  std::vector<const char*> argv = {"homfrac"};
  argv.insert(argv.end(), args.begin(), args.end());
  return homfrac::cli::run(static_cast<int>(argv.size()), const_cast<char**>(argv.data()));
}

nlohmann::json read_json(const char* path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  nlohmann::json j;
  in >> j;
  return j;
}

}  // namespace

TEST_CASE("validate accepts builtins and rejects broken specs with exit 2") {
  CHECK(run_cli({"validate", "--group", "heisenberg:1", "--out", "v1.json"}) == 0);
  auto doc = read_json("v1.json");
  CHECK(doc["pass"] == true);
  std::remove("v1.json");

  {
    std::ofstream bad("bad_group.json");
    bad << R"({"name":"bad","n":2,"weights":[1,1],"brackets":[{"i":1,"j":2,"k":1,"c":1.0}]})";
  }
  CHECK(run_cli({"validate", "--group", "bad_group.json", "--out", "v2.json"}) == 2);
  auto doc2 = read_json("v2.json");
  CHECK(doc2["pass"] == false);
  bool grading_named = false;
  for (const auto& issue : doc2["issues"])
    if (issue["check"] == "grading") grading_named = true;
  CHECK(grading_named);
  std::remove("bad_group.json");
  std::remove("v2.json");
}

TEST_CASE("unknown arguments exit with the config code") {
  CHECK(run_cli({"no-such-command"}) == 2);
  CHECK(run_cli({"constants", "--group", "martian"}) == 2);
}

TEST_CASE("hedberg emits the pinned bracket value") {
  CHECK(run_cli({"hedberg", "--Q", "4", "--s", "0.5", "--out", "hed.json"}) == 0);
  auto doc = read_json("hed.json");
  CHECK(std::abs(doc["bracket"].get<double>() - 1.754765) < 1e-3);
  std::remove("hed.json");
}

TEST_CASE("constants reports the homogeneous dimension with error fields") {
  CHECK(run_cli({"constants", "--group", "heisenberg:1", "--gauge", "koranyi", "--samples",
                 "20000", "--seed", "7", "--out", "cons.json"}) == 0);
  auto doc = read_json("cons.json");
  CHECK(doc["Q"].get<double>() == 4.0);
  CHECK(doc["sigma_Q"].contains("std_err"));
  CHECK(doc["cross_checks"].contains("sigma_exterior_kernel"));
  std::remove("cons.json");
}

TEST_CASE("gauge-check writes the report fields") {
  CHECK(run_cli({"gauge-check", "--group", "heisenberg:1", "--gauge", "koranyi", "--samples",
                 "5000", "--seed", "3", "--out", "gc.json"}) == 0);
  auto doc = read_json("gc.json");
  CHECK(doc["triangle_max_violation"].get<double>() <= 1e-10);
  std::remove("gc.json");
}

TEST_CASE("fracop writes a CSV row per point") {
  {
    std::ofstream pts("pts.csv");
    pts << "0,0,0\n0.3,0.2,0.1\n";
  }
  CHECK(run_cli({"fracop", "--group", "heisenberg:1", "--gauge", "koranyi", "--s", "0.5",
                 "--field", "compact_bump:R=1", "--points", "pts.csv", "--samples", "5000",
                 "--out", "fr.csv"}) == 0);
  std::ifstream in("fr.csv");
  std::string header, row1, row2;
  std::getline(in, header);
  std::getline(in, row1);
  std::getline(in, row2);
  CHECK(header == "point,value,std_err,tail_bound");
  CHECK_FALSE(row1.empty());
  CHECK_FALSE(row2.empty());
  std::remove("pts.csv");
  std::remove("fr.csv");
}

TEST_CASE("counterexample sweep is deterministic CSV") {
  CHECK(run_cli({"counterexample", "--k", "1,256", "--eta", "0.01", "--out", "ce.csv"}) == 0);
  std::ifstream in("ce.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "k,eta,ratio");
  double k, eta, ratio;
  char comma;
  in >> k >> comma >> eta >> comma >> ratio;
  CHECK(k == 1.0);
  std::remove("ce.csv");
}

TEST_CASE("identical argv and seed reproduce identical output bytes") {
  auto read_all = [](const char* p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  CHECK(run_cli({"constants", "--group", "heisenberg:1", "--gauge", "koranyi", "--samples",
                 "10000", "--seed", "42", "--out", "r1.json"}) == 0);
  CHECK(run_cli({"constants", "--group", "heisenberg:1", "--gauge", "koranyi", "--samples",
                 "10000", "--seed", "42", "--threads", "3", "--out", "r2.json"}) == 0);
  CHECK(read_all("r1.json") == read_all("r2.json"));
  std::remove("r1.json");
  std::remove("r2.json");
}

TEST_CASE("report runs a single fast criterion") {
  CHECK(run_cli({"report", "--only", "16", "--out", "rep.json"}) == 0);
  auto doc = read_json("rep.json");
  CHECK(doc["criteria"].size() == 1);
  CHECK(doc["criteria"][0]["id"] == 16);
  CHECK(doc["criteria"][0]["pass"] == true);
  std::remove("rep.json");
}
