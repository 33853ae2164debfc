#pragma once

// Experiment configuration documents (JSON). Parsing is strict: unknown
// fields, type mismatches and missing required fields are reported with their
// dotted path. Serializing a parsed config writes every default explicitly.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "collusion/complexity.hpp"
#include "collusion/families.hpp"
#include "collusion/io/json_reader.hpp"
#include "collusion/market.hpp"

namespace collusion::io {

inline constexpr int kSchemaVersion = 1;

enum class Command {
  kValidate,
  kEquilibrium,
  kReduce,
  kDecide,
  kSimulate,
  kSweepCapacity,
  kSweepTransparency,
  kExampleDuopoly
};

std::string to_string(Command command);
Command command_from_string(const std::string& name);  // throws ValidationError

enum class GamePreset { kNone, kDuopoly, kOligopoly, kSatMarket, kInline };

struct GameSpec {
  GamePreset preset = GamePreset::kNone;
  DuopolyParams duopoly;
  OligopolyParams oligopoly;
  SatMarketParams sat;
  std::uint64_t instance_seed = 0;  // formula seed for sat_market
  MarketGame inline_game;
};

// The game a spec describes; sat_market uses instance_seed.
MarketGame build_game(const GameSpec& spec);

struct SolverConfig {
  std::string method = "closed_form";  // closed_form | ascent | grid
  double tol = 1e-8;
  std::size_t max_iter = 10000;
  double grid_step = 0.01;
  double grid_lower = 0.0;
  double grid_upper = 20.0;
};

struct PolicyConfig {
  std::string type = "trigger";  // trigger | myopic | deviator
  std::optional<CapacityBudget> capacity;  // trigger; default from the simulation
  std::optional<std::size_t> punishment_length;
  std::optional<std::string> detection;
  std::optional<double> alpha;
  std::optional<std::vector<double>> price;  // deviator; best response when unset
  std::size_t start = 1;
  std::size_t duration = 1;
};

struct TesterConfig {
  std::size_t firm = 0;
  std::optional<std::vector<double>> price;
  double probe_rate = 0.2;
  bool collapse_if_undetected = true;
};

struct SimulationConfig {
  std::size_t horizon = 200;
  std::size_t punishment_length = 10;  // kGrim is written as "grim"
  CapacityBudget capacity = CapacityBudget::unlimited();
  std::string detection = "budgeted";  // budgeted | oracle | bernoulli
  double alpha = 1.0;
  std::vector<PolicyConfig> policies;  // empty: every firm runs the trigger
  std::optional<TesterConfig> tester;
};

struct SweepConfig {
  std::vector<CapacityBudget> capacities{CapacityBudget::nodes(0),    CapacityBudget::nodes(10),
                                         CapacityBudget::nodes(100),  CapacityBudget::nodes(1000),
                                         CapacityBudget::nodes(10000), CapacityBudget::unlimited()};
  std::size_t episodes = 30;
  double probe_rate = 0.2;
  std::size_t tester_firm = 0;
  bool redraw_instances = true;  // sat_market only: new formula every episode
  double eps_low = 0.05;
  double eps_high = 0.95;
};

struct TransparencyConfig {
  std::vector<double> variances{0.0025, 0.01, 0.04, 0.16, 0.64};
  CapacityBudget budget = CapacityBudget::nodes(100);
  std::size_t episodes = 30;
  double z = 2.0;
  std::size_t observations = 200;
  std::size_t trials = 400;
};

struct ReduceConfig {
  std::string source = "3sat";  // 3sat | maxwsat | vc
  std::string input;            // DIMACS, weighted DIMACS or edge list
  std::size_t k = 0;            // vc
  std::optional<double> target;  // maxwsat; default: total weight / m
  bool decide = false;
  CapacityBudget budget = CapacityBudget::unlimited();
};

struct DecideConfig {
  std::string instance;  // JSON instance file
  CapacityBudget budget = CapacityBudget::unlimited();
};

struct DuopolyConfig {
  double coarse_step = 0.01;
  double fine_step = 0.001;
  double window = 0.02;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  Command command = Command::kExampleDuopoly;
  std::uint64_t seed = 0;
  std::string output_dir = "runs";
  bool svg = false;
  GameSpec game;
  SolverConfig solver;
  SimulationConfig simulation;
  SweepConfig sweep;
  TransparencyConfig transparency;
  ReduceConfig reduce;
  DecideConfig decide;
  DuopolyConfig duopoly;
};

// Relative "game_file" paths resolve against base_dir; the loaded game is
// stored inline.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".");
ExperimentConfig config_from_json(const Json& value, const std::filesystem::path& base_dir = ".");
OrderedJson config_to_json(const ExperimentConfig& config);
std::string serialize_config(const ExperimentConfig& config);

}  // namespace collusion::io
