#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "collusion/error.hpp"
#include "collusion/families.hpp"
#include "collusion/io/config.hpp"
#include "collusion/io/formats.hpp"
#include "collusion/io/json_codec.hpp"
#include "collusion/io/run.hpp"
#include "collusion/repeated_game.hpp"
#include "doctest.h"

using namespace collusion;
using namespace collusion::io;
namespace fs = std::filesystem;

namespace {

struct ScratchDir {
  fs::path path;
  explicit ScratchDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("collusion-" + tag + "-" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("DIMACS parsing") {
  const Cnf cnf = parse_dimacs("c comment\np cnf 3 1\n1 2 -3 0\n");
  CHECK(cnf.num_vars == 3);
  REQUIRE(cnf.clauses.size() == 1);
  CHECK(cnf.clauses[0] == Clause{1, 2, -3});

  CHECK_THROWS_WITH_AS(parse_dimacs("p cnf 3 1\n1 5 0\n"), doctest::Contains("line 2"), ValidationError);
  CHECK_THROWS_AS(parse_dimacs("p cnf 3 1\n1 2 -3\n"), ValidationError);
  CHECK_THROWS_AS(parse_dimacs("p cnf x 1\n1 0\n"), ValidationError);
  CHECK_THROWS_AS(parse_dimacs("1 2 0\n"), ValidationError);

  const Cnf empty = parse_dimacs("p cnf 2 2\n1 2 0\n0\n");
  REQUIRE(empty.clauses.size() == 2);
  CHECK(empty.clauses[1].empty());

  const Cnf again = parse_dimacs(write_dimacs(cnf));
  CHECK(again.num_vars == cnf.num_vars);
  CHECK(again.clauses == cnf.clauses);
}

TEST_CASE("weighted DIMACS parsing") {
  const WeightedCnf w = parse_wcnf("p wcnf 2 2\n3 1 2 0\n2 -1 0\n");
  CHECK(w.num_vars == 2);
  CHECK(w.clauses == std::vector<Clause>{{1, 2}, {-1}});
  CHECK(w.weights == std::vector<double>{3.0, 2.0});
  CHECK_THROWS_AS(parse_wcnf("p wcnf 2 1\n3 1 4 0\n"), ValidationError);
}

TEST_CASE("edge list parsing") {
  const Graph k3 = parse_graph("0 1\n1 2\n0 2\n");
  CHECK(k3 == complete_graph(3));
  const Graph dup = parse_graph("0 1\n1 0\n0 1\n");
  CHECK(dup.edges().size() == 1);
  CHECK_THROWS_AS(parse_graph("3 3\n"), ValidationError);
  CHECK_THROWS_AS(parse_graph("0 -1\n"), ValidationError);
  const Graph padded = parse_graph("# vertices 5\n0 1\n");
  CHECK(padded.num_vertices() == 5);
  CHECK(parse_graph(write_graph(padded)) == padded);
}

TEST_CASE("CSV rendering") {
  CHECK(format_csv_value(1.0 / 3.0) == "0.333333333333");
  CHECK(format_csv_value(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_csv_value(std::int64_t{-4}) == "-4");
  CHECK(format_csv_value(std::string("a,b")) == "\"a,b\"");

  CsvTable empty({"capacity", "mean_markup", "detection_accuracy"});
  CHECK(empty.str() == "capacity,mean_markup,detection_accuracy\n");
  CsvTable t({"x", "y"});
  t.add_row({std::uint64_t{1}, 2.5});
  CHECK(t.str() == "x,y\n1,2.5\n");
  CHECK_THROWS_AS(t.add_row({1.0}), ValidationError);
}

TEST_CASE("SHA-256 digests") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("game documents round-trip") {
  for (const MarketGame& g : {duopoly_game(), oligopoly_game(), sat_market(SatMarketParams{6, 12}, 3).game}) {
    const auto doc = game_to_json(g);
    const MarketGame back = game_from_json(Json::parse(doc.dump()));
    CHECK(game_to_json(back).dump() == doc.dump());
  }
  const auto inst = reduce_vc_to_opp(complete_graph(4), 2);
  const auto doc = instance_to_json(inst);
  CHECK(instance_to_json(instance_from_json(Json::parse(doc.dump()))).dump() == doc.dump());
}

TEST_CASE("game documents report bad fields by path") {
  auto doc = Json::parse(game_to_json(duopoly_game()).dump());
  doc["discount"] = 1.2;
  CHECK_THROWS_WITH_AS(game_from_json(doc), doctest::Contains("discount outside (0,1)"), ValidationError);
  doc["discount"] = 0.9;
  doc["colour"] = "red";
  CHECK_THROWS_WITH_AS(game_from_json(doc), doctest::Contains("colour"), ValidationError);
  CHECK_THROWS_AS(parse_json("{", "broken"), ValidationError);
}

TEST_CASE("budgets") {
  CHECK(budget_from_json(Json("unlimited"), "b").is_unlimited());
  CHECK(*budget_from_json(Json(12), "b").max_nodes == 12);
  CHECK_THROWS_AS(budget_from_json(Json(-1), "b"), ValidationError);
  CHECK_THROWS_AS(budget_from_json(Json("lots"), "b"), ValidationError);
}

TEST_CASE("minimal simulate config gets its defaults") {
  const auto c = parse_config(R"({"schema_version": 1, "command": "simulate", "seed": 5, "game": {"preset": "duopoly"}})");
  CHECK(c.command == Command::kSimulate);
  CHECK(c.seed == 5);
  CHECK(c.simulation.horizon == 200);
  CHECK(c.simulation.punishment_length == 10);
  CHECK(c.solver.tol == 1e-8);
  const auto echoed = config_to_json(c);
  CHECK(echoed["simulation"]["horizon"] == 200);
  CHECK(echoed["simulation"]["punishment_length"] == 10);
  CHECK(echoed["solver"]["tol"] == 1e-8);
}

TEST_CASE("config round-trip") {
  const std::string text = R"({"schema_version": 1, "command": "sweep-capacity", "seed": 9,
    "game": {"preset": "sat_market", "num_vars": 8},
    "sweep": {"capacities": [0, 50, "unlimited"], "episodes": 4},
    "simulation": {"horizon": 60, "punishment_length": "grim"}})";
  const auto first = parse_config(text);
  CHECK(first.simulation.punishment_length == kGrim);
  const std::string once = serialize_config(first);
  const std::string twice = serialize_config(parse_config(once));
  CHECK(once == twice);
  const auto second = parse_config(once);
  CHECK(second.sweep.capacities == first.sweep.capacities);
  CHECK(second.game.sat.num_vars == 8);
}

TEST_CASE("config validation errors") {
  CHECK_THROWS_WITH_AS(
      parse_config(R"({"schema_version": 1, "command": "simulate", "game": {"preset": "duopoly", "discount": 1.2}})"),
      doctest::Contains("discount outside (0,1)"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"schema_version": 1, "command": "simulate", "bogus": 1})"),
                       doctest::Contains("bogus: unknown field"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"schema_version": 1, "command": "simulate", "seed": "x",
                                        "game": {"preset": "duopoly"}})"),
                       doctest::Contains("seed"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"schema_version": 1, "command": "simulate"})"),
                       doctest::Contains("game: missing required field"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"schema_version": 2, "command": "simulate"})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"schema_version": 1, "command": "dance"})"), ValidationError);
}

TEST_CASE("run records match the emitted files") {
  ScratchDir scratch("io");
  ExperimentConfig c = parse_config(R"({"schema_version": 1, "command": "simulate", "seed": 3,
    "game": {"preset": "duopoly"}, "simulation": {"horizon": 30}})");
  c.output_dir = scratch.path.string();
  std::ostringstream log;
  const auto record = run_experiment(c, log);
  CHECK(record.exit_code == 0);
  CHECK(fs::exists(record.directory / "trace.csv"));
  CHECK(fs::exists(record.directory / "run.record"));
  const Json rec = Json::parse(read_file(record.directory / "run.record"));
  CHECK(rec["engine_version"] == kEngineVersion);
  CHECK(rec["command"] == "simulate");
  REQUIRE(!rec["artifacts"].empty());
  for (const auto& a : rec["artifacts"])
    CHECK(sha256_file(record.directory / a["file"].get<std::string>()) == a["sha256"].get<std::string>());

  const auto again = run_experiment(c, log);
  CHECK(again.directory != record.directory);
  for (std::size_t k = 0; k < record.artifacts.size(); ++k) CHECK(again.artifacts[k].sha256 == record.artifacts[k].sha256);

  c.svg = true;
  const auto with_svg = run_experiment(c, log);
  CHECK(fs::exists(with_svg.directory / "trace.svg"));
  CHECK(sha256_file(with_svg.directory / "trace.csv") == sha256_file(record.directory / "trace.csv"));
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ValidationError("x")) == 1);
  CHECK(exit_code_for(SolverError("x")) == 2);
  CHECK(exit_code_for(std::runtime_error("x")) == 2);
}
