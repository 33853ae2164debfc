// Command-line entry point. Each subcommand reads an optional JSON config and
// applies flag overrides on top of it before running.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "collusion/error.hpp"
#include "collusion/io/config.hpp"
#include "collusion/io/formats.hpp"
#include "collusion/io/json_codec.hpp"
#include "collusion/io/run.hpp"
#include "collusion/parallel.hpp"

namespace {

using collusion::io::Json;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t threads = 1;
  bool svg = false;

  std::string game_file;
  std::string preset;
  std::string method;
  std::optional<std::size_t> horizon;
  std::string capacity;
  std::optional<std::size_t> episodes;

  std::string sat, wcnf, graph;
  std::optional<std::size_t> k;
  std::optional<double> target;
  bool decide = false;
  std::string budget;
  std::string instance;
};

Json budget_json(const std::string& text) {
  if (text == "unlimited") return "unlimited";
  std::size_t pos = 0;
  unsigned long long n = 0;
  try {
    n = std::stoull(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != text.size() || text.empty() || text[0] == '-')
    throw collusion::ValidationError("budget must be a node count or 'unlimited', got '" + text + "'");
  return n;
}

Json build_document(const std::string& command, const Flags& f) {
  Json doc = Json::object();
  if (!f.config.empty()) doc = collusion::io::parse_json(collusion::io::read_file(f.config), f.config);
  if (!doc.is_object()) throw collusion::ValidationError(f.config + ": expected a JSON object");
  if (!doc.contains("schema_version")) doc["schema_version"] = collusion::io::kSchemaVersion;
  if (doc.contains("command") && doc["command"] != command)
    throw collusion::ValidationError("command: config says '" + doc["command"].dump() + "' but the subcommand is '" +
                                     command + "'");
  doc["command"] = command;
  if (f.seed) doc["seed"] = *f.seed;
  if (!f.out.empty()) doc["output_dir"] = f.out;
  if (f.svg) doc["svg"] = true;
  if (!f.game_file.empty()) {
    doc.erase("game");
    doc["game_file"] = f.game_file;
  }
  if (!f.preset.empty()) {
    doc.erase("game_file");
    doc["game"] = Json{{"preset", f.preset}};
  }
  if (!f.method.empty()) doc["solver"]["method"] = f.method;
  if (f.horizon) doc["simulation"]["horizon"] = *f.horizon;
  if (!f.capacity.empty()) doc["simulation"]["capacity"] = budget_json(f.capacity);
  if (f.episodes) {
    if (command == "sweep-transparency")
      doc["transparency"]["episodes"] = *f.episodes;
    else
      doc["sweep"]["episodes"] = *f.episodes;
  }
  auto reduce_input = [&](const std::string& source, const std::string& path) {
    doc["reduce"]["source"] = source;
    doc["reduce"]["input"] = path;
  };
  if (!f.sat.empty()) reduce_input("3sat", f.sat);
  if (!f.wcnf.empty()) reduce_input("maxwsat", f.wcnf);
  if (!f.graph.empty()) reduce_input("vc", f.graph);
  if (f.k) doc["reduce"]["k"] = *f.k;
  if (f.target) doc["reduce"]["target"] = *f.target;
  if (f.decide) doc["reduce"]["decide"] = true;
  if (!f.budget.empty()) {
    if (command == "decide") doc["decide"]["budget"] = budget_json(f.budget);
    if (command == "reduce") doc["reduce"]["budget"] = budget_json(f.budget);
    if (command == "sweep-transparency") doc["transparency"]["budget"] = budget_json(f.budget);
  }
  if (!f.instance.empty()) doc["decide"]["instance"] = f.instance;
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Repeated-market collusion laboratory: equilibria, detection problems, reductions and sweeps"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config, "JSON experiment config");
  app.add_option("--seed", f.seed, "root random seed");
  app.add_option("--out", f.out, "output directory (default: runs)");
  app.add_option("--threads", f.threads, "worker threads, 0 for all cores; never changes outputs")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--svg", f.svg, "also render curves as SVG");

  auto* validate = app.add_subcommand("validate", "check a game for violations");
  auto* equilibrium = app.add_subcommand("equilibrium", "competitive and collusive prices per state");
  auto* reduce = app.add_subcommand("reduce", "build a decision instance from a SAT formula or graph");
  auto* decide = app.add_subcommand("decide", "decide a stored instance under a node budget");
  auto* simulate = app.add_subcommand("simulate", "run the repeated game");
  auto* sweep_capacity = app.add_subcommand("sweep-capacity", "markup against detection capacity");
  auto* sweep_transparency = app.add_subcommand("sweep-transparency", "ambiguity and detection against noise");
  auto* example = app.add_subcommand("example-duopoly", "worked two-state duopoly");

  for (auto* sub : {validate, equilibrium, simulate, sweep_capacity, sweep_transparency}) {
    sub->add_option("--game", f.game_file, "game JSON file");
    sub->add_option("--preset", f.preset, "duopoly, oligopoly or sat_market");
  }
  equilibrium->add_option("--method", f.method, "closed_form, ascent or grid");
  for (auto* sub : {simulate, sweep_capacity, sweep_transparency})
    sub->add_option("--horizon", f.horizon, "periods per episode");
  simulate->add_option("--capacity", f.capacity, "detection node budget or 'unlimited'");
  for (auto* sub : {sweep_capacity, sweep_transparency}) sub->add_option("--episodes", f.episodes, "episodes per point");
  auto* sources = reduce->add_option_group("source");
  sources->add_option("--sat", f.sat, "DIMACS CNF file (3-SAT to detection)");
  sources->add_option("--wcnf", f.wcnf, "weighted DIMACS file (Max-Weighted-SAT to strategy)");
  sources->add_option("--graph", f.graph, "edge list (vertex cover to punishment)");
  sources->require_option(0, 1);
  reduce->add_option("--k", f.k, "punisher budget for vertex cover");
  reduce->add_option("--target", f.target, "expected joint profit target for Max-Weighted-SAT");
  reduce->add_flag("--decide", f.decide, "also decide the instance and print the verdict");
  for (auto* sub : {reduce, decide, sweep_transparency})
    sub->add_option("--budget", f.budget, "node budget or 'unlimited'");
  decide->add_option("--instance", f.instance, "instance JSON file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    collusion::set_worker_count(f.threads);
    const std::string command = app.get_subcommands().front()->get_name();
    const Json doc = build_document(command, f);
    const auto config = collusion::io::config_from_json(doc, ".");
    const auto record = collusion::io::run_experiment(config, std::cout);
    return record.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return collusion::io::exit_code_for(e);
  }
}
