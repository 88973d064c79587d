#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ldiverted/cli.hpp"

namespace {

int run_cli(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::vector<const char*> argv{"ldiverted"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream captured;
  std::streambuf* old = std::cout.rdbuf(captured.rdbuf());
  int code = ldiverted::cli_main(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old);
  if (out) *out = captured.str();
  return code;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("cli: gen-data, anonymize, estimate round trip") {
  REQUIRE(run_cli({"gen-data", "--n", "2000", "--seed", "3", "--out", "cli_d.csv"}) == 0);
  REQUIRE(run_cli({"anonymize", "--input", "cli_d.csv", "--schema", "census",
                   "--l-prime", "5", "--seed", "7", "--out", "cli_dprime.csv"}) == 0);
  CHECK(slurp("cli_dprime.json").find("\"l_prime\": 5") != std::string::npos);

  std::string out;
  REQUIRE(run_cli({"estimate", "--input", "cli_dprime.csv", "--schema", "census",
                   "--sa-value", "occupation=occ1"},
                  &out) == 0);
  double estimate = std::stod(out);
  CHECK(estimate >= 0.0);
  CHECK(estimate < 2000.0);

  std::ofstream q("cli_queries.jsonl");
  q << R"({"nsa":{"sex":"female"},"sa":{"occupation":"occ1"}})" << "\n";
  q << R"({"nsa":{"sex":"male","marital":"marital1"},"sa":{"occupation":"occ2"}})"
    << "\n";
  q.close();
  REQUIRE(run_cli({"estimate", "--input", "cli_dprime.csv", "--schema", "census",
                   "--queries", "cli_queries.jsonl"},
                  &out) == 0);
  CHECK(out.find("query,estimate,iterations,converged") == 0);

  REQUIRE(run_cli({"estimate", "--input", "cli_dprime.csv", "--schema", "census",
                   "--queries", "cli_queries.jsonl", "--json"},
                  &out) == 0);
  CHECK(out.find("\"estimate\"") != std::string::npos);
}

TEST_CASE("cli: anatomy publication and estimation") {
  REQUIRE(run_cli({"gen-data", "--n", "1000", "--seed", "4", "--out", "cli_an_d.csv"}) ==
          0);
  REQUIRE(run_cli({"anonymize", "--input", "cli_an_d.csv", "--schema", "census",
                   "--mechanism", "anatomy", "--l-prime", "5", "--seed", "2", "--out",
                   "cli_anatomy"}) == 0);
  CHECK(slurp("cli_anatomy_nsa.csv").find("group_id,citizenship") == 0);
  CHECK(slurp("cli_anatomy_sa.csv").find("group_id,occupation,count") == 0);

  std::string out;
  REQUIRE(run_cli({"estimate", "--mechanism", "anatomy", "--input", "cli_anatomy",
                   "--schema", "census", "--sa-value", "occ1"},
                  &out) == 0);
  // Whole-domain counts are exact under anatomy: compare against the source.
  double est = std::stod(out);
  CHECK(est > 0.0);
  std::string data = slurp("cli_an_d.csv");
  std::size_t count = 0, pos = 0;
  while ((pos = data.find(",occ1\n", pos)) != std::string::npos) {
    ++count;
    pos += 5;
  }
  CHECK(est == doctest::Approx(static_cast<double>(count)));
}

TEST_CASE("cli: mechanism config json drives anonymize") {
  REQUIRE(run_cli({"gen-data", "--n", "500", "--seed", "6", "--out", "cli_cfg_d.csv"}) ==
          0);
  std::ofstream cfg("cli_cfg.json");
  cfg << R"({"mechanism":"a_prime","l_prime":4,"seed":11})";
  cfg.close();
  REQUIRE(run_cli({"anonymize", "--input", "cli_cfg_d.csv", "--schema", "census",
                   "--config", "cli_cfg.json", "--out", "cli_cfg_out.csv"}) == 0);
  CHECK(slurp("cli_cfg_out.json").find("\"l_prime\": 4") != std::string::npos);
}

TEST_CASE("cli: guarantees prints both threshold forms") {
  std::string out;
  REQUIRE(run_cli({"guarantees", "--l-prime", "10", "--eps", "0.2", "--te", "0.02"},
                  &out) == 0);
  CHECK(out.find("t_f_real=11.1803") != std::string::npos);
  CHECK(out.find("t_f_reported=11") != std::string::npos);

  REQUIRE(run_cli({"guarantees", "--l-prime", "10", "--eps", "0.3", "--f-min", "1",
                   "--f-max", "20", "--out", "cli_guarantees.csv"}) == 0);
  std::string table = slurp("cli_guarantees.csv");
  CHECK(table.find("f_s,chebyshev_bound,exact_tail") == 0);
}

TEST_CASE("cli: benchmark writes the report") {
  REQUIRE(run_cli({"benchmark", "--n", "2000", "--pool-size", "100", "--l-prime-grid",
                   "2", "--mechanisms", "a_prime,laplace", "--seeds", "1", "--out",
                   "cli_report.csv"}) == 0);
  std::string report = slurp("cli_report.csv");
  CHECK(report.find("a_prime,l_prime=2") != std::string::npos);
  CHECK(report.find("laplace,eps=0.01") != std::string::npos);
}

TEST_CASE("cli: exit codes for usage, data and infeasible errors") {
  CHECK(run_cli({"no-such-command"}) == 2);
  CHECK(run_cli({"estimate", "--input", "x.csv", "--schema", "census"}) == 2);
  CHECK(run_cli({"anonymize", "--input", "does_not_exist.csv", "--schema", "census",
                 "--out", "y.csv"}) == 3);

  // Tiny skewed table: one value dominates, no deletion budget fixes it.
  std::ofstream bad("cli_bad.csv");
  bad << "sex,occupation\n";
  for (int i = 0; i < 9; ++i) bad << "female,occ1\n";
  bad << "female,occ2\n";
  bad.close();
  std::ofstream schema("cli_schema.json");
  schema << R"({"attributes":[{"name":"sex","domain":["female","male"]},
                {"name":"occupation","domain":["occ1","occ2"]}],
                "sensitive":["occupation"]})";
  schema.close();
  CHECK(run_cli({"anonymize", "--input", "cli_bad.csv", "--schema", "cli_schema.json",
                 "--l-prime", "2", "--out", "cli_bad_out.csv"}) == 4);
}
