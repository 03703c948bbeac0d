#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "islab/commands.hpp"

using namespace islab;
namespace fs = std::filesystem;

namespace {

const char* kBasic = R"({
  "version": 1,
  "name": "basic",
  "source": {"kind": "iid", "pmf": [0.89, 0.11]},
  "channel": {"kind": "bsc", "crossover": 0.05},
  "input": {"kind": "uniform"},
  "n_grid": [4, 8, 16],
  "gamma": {"kind": "power", "scale": 1.0, "exponent": 0.75},
  "rate": {"kind": "constant", "value": 0.42},
  "code": {"n": 4, "kind": "both", "samples": 2},
  "oracle": {"n": 2},
  "budgets": {"enumeration": 2000000},
  "seed": 11
})";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& leaf) {
  auto dir = fs::temp_directory_path() / ("islab_scenario_test_" + leaf);
  fs::remove_all(dir);
  return dir;
}

// Expects a ScenarioError and returns it.
ScenarioError parse_error(const std::string& text) {
  try {
    parse_scenario(text, "t.json");
  } catch (const ScenarioError& e) {
    return e;
  }
  FAIL("no ScenarioError raised");
  return ScenarioError("", 0, "", "");
}

}  // namespace

TEST_SUITE("scenario") {
  TEST_CASE("parses a complete scenario") {
    const auto sc = parse_scenario(kBasic);
    CHECK(sc.name == "basic");
    CHECK(sc.n_grid == std::vector<int>{4, 8, 16});
    CHECK(sc.gamma.kind() == GammaSchedule::Kind::Power);
    CHECK(sc.gamma.exponent() == 0.75);
    REQUIRE(sc.rate);
    CHECK(sc.rate->at(0, 4) == 0.42);
    CHECK(sc.code_n == std::vector<int>{4});
    CHECK(sc.code_kind == "both");
    CHECK(sc.samples == 2);
    CHECK(sc.oracle_n == std::vector<int>{2});
    CHECK(sc.limits.enumeration == 2000000);
    CHECK(sc.seed == 11);
    CHECK(sc.candidates.size() == 1);
    CHECK(sc.checks == std::vector<std::string>{"direct", "strict_domination", "domination"});
    CHECK(sc.source.pmf(1) == std::vector<double>{0.89, 0.11});
  }

  TEST_CASE("encoder inputs default to the direct and converse checks") {
    const auto sc = parse_scenario(R"({"version": 1, "source": {"kind": "avg_max_gap", "alpha": 0.2},
      "channel": {"kind": "avg_max_gap"}, "input": {"kind": "avg_max_gap"}, "n_grid": [1]})");
    CHECK(sc.checks == std::vector<std::string>{"direct", "converse"});
    CHECK(sc.candidates.empty());
  }

  TEST_CASE("errors carry the line and key path") {
    const auto e = parse_error(R"({
  "version": 1,
  "source": {
    "kind": "mixed",
    "components": [{"kind": "iid", "pmf": [0.5, 0.5]}, {"kind": "iid", "pmf": [0.9, 0.1]}],
    "weights": [0.5, 0.4]
  },
  "channel": {"kind": "bsc", "crossover": 0.1},
  "input": {"kind": "uniform"},
  "n_grid": [2]
})");
    CHECK(e.line() == 6);
    CHECK(e.path() == "source.weights");
    CHECK(std::string(e.what()).find("t.json:6: source.weights:") == 0);
  }

  TEST_CASE("nested array paths") {
    const auto e = parse_error(R"({"version": 1,
 "source": {"kind": "iid", "pmf": [0.5, 0.5]},
 "channel": {"kind": "dmc", "matrix": [[0.9, 0.1], [0.2, 0.9]]},
 "input": {"kind": "uniform"}, "n_grid": [2]})");
    CHECK(e.line() == 3);
    CHECK(e.path().rfind("channel.matrix", 0) == 0);
  }

  TEST_CASE("rejects unknown keys, bad versions and bad grids") {
    const auto unknown = parse_error(R"({"version": 1, "sorce": {}})");
    CHECK(unknown.path() == "sorce");
    CHECK(std::string(unknown.what()).find("unknown key") != std::string::npos);

    const auto version = parse_error(R"({"version": 2})");
    CHECK(version.path() == "version");

    const auto grid = parse_error(R"({"version": 1, "source": {"kind": "iid", "pmf": [0.5, 0.5]},
      "channel": {"kind": "bsc", "crossover": 0.1}, "input": {"kind": "uniform"}, "n_grid": [4, 4]})");
    CHECK(grid.path() == "n_grid[1]");
    CHECK(grid.line() == 2);

    CHECK_THROWS_AS(parse_scenario("{ not json"), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(R"({"version": 1, "source": {"kind": "iid", "pmf": [0.5, 0.5]},
      "channel": {"kind": "bsc", "crossover": 0.1}, "input": {"kind": "uniform", "letters": 3}, "n_grid": [2]})"),
                    ScenarioError);
  }

  TEST_CASE("hash is stable under formatting and changes with content") {
    std::string compact = kBasic;
    std::erase(compact, '\n');
    CHECK(parse_scenario(kBasic).hash == parse_scenario(compact).hash);
    std::string other = kBasic;
    other.replace(other.find("0.05"), 4, "0.06");
    CHECK(parse_scenario(kBasic).hash != parse_scenario(other).hash);
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  }

  TEST_CASE("number formatting") {
    CHECK(format_number(0.2) == "0.20000000000000001");
    CHECK(format_number(1.0) == "1");
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(std::stod(format_number(std::log(3.0))) == std::log(3.0));
  }

  TEST_CASE("overrides") {
    auto sc = parse_scenario(kBasic);
    CommandOptions o;
    o.n = 6;
    o.eps = 0.3;
    o.budget = 99;
    o.seed = 5;
    apply_overrides(sc, o);
    CHECK(sc.n_grid == std::vector<int>{6});
    CHECK(sc.code_n == std::vector<int>{6});
    CHECK(sc.oracle_n == std::vector<int>{6});
    CHECK(sc.eps_level == 0.3);
    CHECK(sc.limits.enumeration == 99);
    CHECK(sc.seed == 5);

    auto g = parse_scenario(kBasic);
    CommandOptions go;
    go.gamma = 0.2;
    apply_overrides(g, go);
    CHECK(g.gamma.kind() == GammaSchedule::Kind::Constant);
    CHECK(g.gamma.at(0, 4) == 0.2);
  }

  TEST_CASE("commands are deterministic and start with the provenance line") {
    const auto sc = parse_scenario(kBasic);
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(sc.hash));
    for (const auto& command : {"spectrum", "bounds", "code", "oracle", "check"}) {
      CommandOptions a, b;
      a.out_dir = scratch(std::string(command) + "_a").string();
      b.out_dir = scratch(std::string(command) + "_b").string();
      const auto files_a = run_command(command, sc, a);
      const auto files_b = run_command(command, sc, b);
      REQUIRE(files_a.size() == files_b.size());
      REQUIRE_FALSE(files_a.empty());
      for (std::size_t i = 0; i < files_a.size(); ++i) {
        CHECK(fs::path(files_a[i]).filename() == fs::path(files_b[i]).filename());
        const auto text = slurp(files_a[i]);
        CHECK(text == slurp(files_b[i]));
        if (fs::path(files_a[i]).extension() == ".csv") {
          const std::string head = std::string("# islab ") + command + " scenario=basic hash=" + hash;
          CHECK(text.rfind(head, 0) == 0);
        }
      }
      fs::remove_all(a.out_dir);
      fs::remove_all(b.out_dir);
    }
    CHECK_THROWS_AS(run_command("nope", sc, CommandOptions{}), ValidationError);
  }

  TEST_CASE("budget overrides surface as BudgetExceeded") {
    auto sc = parse_scenario(kBasic);
    CommandOptions o;
    o.budget = 10;
    o.out_dir = scratch("budget").string();
    apply_overrides(sc, o);
    CHECK_THROWS_AS(run_command("code", sc, o), BudgetExceeded);
    fs::remove_all(o.out_dir);
  }
}
