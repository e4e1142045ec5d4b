#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using costcode::cli::run;

namespace {

const std::string kData = COSTCODE_DATA_DIR;

std::string data(const std::string& name) { return kData + "/" + name; }

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "costcode_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

} // namespace

TEST_CASE("every operation is reachable from exactly one subcommand") {
  const auto paths = costcode::cli::subcommand_paths();
  const std::set<std::string> known(paths.begin(), paths.end());
  CHECK(known.size() == paths.size());
  std::set<std::string> ops, used;
  for (const auto& entry : costcode::cli::command_table()) {
    CHECK_MESSAGE(ops.insert(entry.operation).second, entry.operation);
    CHECK_MESSAGE(known.count(entry.subcommand) == 1, entry.subcommand);
    used.insert(entry.subcommand);
  }
  for (const auto& p : paths) CHECK_MESSAGE(used.count(p) == 1, p);
  for (const char* op : {"solve_cost_capacity", "symbol_measure", "validate_conditional_model",
                         "log_prob", "entropy", "varentropy", "sample_self_info",
                         "enumerate_support", "gaussian_cdf", "gaussian_quantile",
                         "first_order_spectrum", "second_order_spectrum",
                         "strong_converse_diagnostic", "build_exact_code", "encode", "decode",
                         "kraft_sum", "overflow", "first_order_threshold",
                         "second_order_threshold", "vl_to_fl", "fl_to_vl", "lemma_bounds"}) {
    CHECK_MESSAGE(ops.count(op) == 1, op);
  }
}

TEST_CASE("capacity on unit costs") {
  const auto r = call({"capacity", "--costs", data("unit.json")});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["alpha_c"] == 1.0);
}

TEST_CASE("threshold second at eps = 0.5 is zero") {
  const auto r = call({"threshold", "second", "--source", data("bern025.json"), "--costs",
                       data("c12.json"), "--eps", "0.5"});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["value"] == 0.0);
}

TEST_CASE("spectrum output is byte-identical across runs and worker counts") {
  const std::vector<std::string> args{"spectrum", "second", "--source", data("mixed.json"),
                                      "--costs", data("unit.json"), "--n", "10000",
                                      "--samples", "100000", "--seed", "7", "--a", "1",
                                      "--grid", "-1:1:9", "--method", "monte-carlo"};
  const auto a = call(args);
  REQUIRE(a.code == 0);
  CHECK(call(args).out == a.out);
  auto threaded = args;
  threaded.insert(threaded.end(), {"--workers", "3"});
  CHECK(call(threaded).out == a.out);
}

TEST_CASE("error exit codes and JSON on stderr") {
  const auto bad = scratch("bad.json");
  write(bad, "{not json");
  auto r = call({"capacity", "--costs", bad.string()});
  CHECK(r.code == 2);
  const auto j = nlohmann::json::parse(r.err);
  CHECK(j["error"] == "config_error");
  CHECK(j["exit_code"] == 2);
  CHECK(r.out.empty());

  r = call({"capacity", "--costs", data("conditional_bad.json")});
  CHECK(r.code == 2);
  CHECK(r.err.find("non-constant conditional capacity") != std::string::npos);

  CHECK(call({"capacity", "--costs", data("conditional.json")}).code == 0);
  CHECK(call({"capacity"}).code == 2);
  CHECK(call({"frobnicate"}).code == 2);
  CHECK(call({"threshold", "first", "--source", data("mixed.json"), "--costs",
              data("unit.json"), "--eps", "0.4"})
            .code == 2);
  CHECK(call({"capacity", "--costs", "/nonexistent/costs.json"}).code == 2);

  const auto tiny = scratch("tiny.json");
  write(tiny, R"({"type":"iid","pmf":[0.9999999999999,1e-13]})");
  r = call({"code", "build", "--source", tiny.string(), "--costs", data("c12.json"), "--n", "3",
            "--precision", "64", "--max-precision", "64"});
  CHECK(r.code == 3);
  CHECK(nlohmann::json::parse(r.err)["error"] == "numeric_error");
}

TEST_CASE("code build, encode, decode and kraft") {
  const auto table = scratch("table.csv");
  const auto report = scratch("report.json");
  auto r = call({"code", "build", "--source", data("bern03.json"), "--costs", data("c12.json"),
                 "--n", "4", "-o", table.string(), "--report", report.string()});
  REQUIRE(r.code == 0);
  std::ifstream in(report);
  const auto rep = nlohmann::json::parse(in);
  CHECK(rep["max_cost_minus_certified_bound"].get<double>() <= 1e-9);
  CHECK(rep["kraft_sum"].get<double>() <= 1.0 + 1e-9);

  r = call({"code", "encode", "--table", table.string(), "--costs", data("c12.json"), "--x",
            "0110"});
  REQUIRE(r.code == 0);
  std::string word = r.out;
  word.pop_back();
  r = call({"code", "decode", "--table", table.string(), "--costs", data("c12.json"), "--w", word});
  REQUIRE(r.code == 0);
  CHECK(r.out == "0110\n");
  r = call({"code", "kraft", "--table", table.string(), "--costs", data("c12.json")});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["kraft_sum"].get<double>() <= 1.0);
}

TEST_CASE("overflow, equivalence and lemma-bounds subcommands") {
  auto r = call({"overflow", "--source", data("bern025.json"), "--costs", data("unit.json"),
                 "--n", "6", "--R", "0.8,1.2,2.0"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("eta,probability,stderr,method\n", 0) == 0);
  r = call({"overflow", "--source", data("bern025.json"), "--costs", data("unit.json"), "--n",
            "1000", "--a", "0.8112781244591328", "--L", "0", "--method", "surrogate-mc",
            "--samples", "1000"});
  CHECK(r.code == 0);
  CHECK(r.out.find("surrogate-mc") != std::string::npos);
  CHECK(call({"overflow", "--source", data("bern025.json"), "--costs", data("unit.json"), "--n",
              "6"})
            .code == 2);

  r = call({"equiv", "vl2fl", "--source", data("bern03.json"), "--costs", data("c12.json"),
            "--n", "5", "--eta", "8"});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["size_bound_holds"] == true);
  r = call({"equiv", "fl2vl", "--source", data("bern03.json"), "--costs", data("c12.json"),
            "--n", "5", "--eta", "8"});
  REQUIRE(r.code == 0);
  const auto fl = nlohmann::json::parse(r.out);
  CHECK(fl["certificate_holds"] == true);
  CHECK(fl["overflow_at_certificate"].get<double>() <= fl["fixed_length_error"].get<double>());

  r = call({"lemma-bounds", "--source", data("bern025.json"), "--costs", data("unit.json"),
            "--n", "8", "--eta", "7.2", "--z", "0.01"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("7.2,0.01,") != std::string::npos);
}

TEST_CASE("source, gaussian and diagnostic subcommands") {
  auto r = call({"source", "info", "--source", data("bern05.json"), "--costs", data("unit.json"),
                 "--log-base", "4"});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["entropy"].get<double>() == doctest::Approx(0.5));
  r = call({"source", "enumerate", "--source", data("bern05.json"), "--n", "2"});
  CHECK(r.out == "sequence,probability\n00,0.25\n01,0.25\n10,0.25\n11,0.25\n");
  r = call({"gaussian", "quantile", "--p", "0.5"});
  CHECK(r.out == "p,quantile\n0.5,0\n");
  r = call({"diagnose", "strong-converse", "--source", data("mixed.json"), "--costs",
            data("unit.json"), "--n-list", "1000,10000", "--samples", "20000"});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["verdict"] == "two-peak");
  CHECK(call({"--help"}).code == 0);
}
