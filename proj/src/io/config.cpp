#include "collusion/io/config.hpp"

#include "collusion/io/formats.hpp"
#include "collusion/io/json_codec.hpp"
#include "collusion/repeated_game.hpp"

namespace collusion::io {

namespace {

struct CommandName {
  Command command;
  const char* name;
};

constexpr CommandName kCommands[] = {{Command::kValidate, "validate"},
                                     {Command::kEquilibrium, "equilibrium"},
                                     {Command::kReduce, "reduce"},
                                     {Command::kDecide, "decide"},
                                     {Command::kSimulate, "simulate"},
                                     {Command::kSweepCapacity, "sweep-capacity"},
                                     {Command::kSweepTransparency, "sweep-transparency"},
                                     {Command::kExampleDuopoly, "example-duopoly"}};

void check_discount(double delta, const std::string& path) {
  if (!(delta > 0.0 && delta < 1.0)) fail_at(path, "discount outside (0,1)");
}

void check_unit(double v, const std::string& path) {
  if (v < 0.0 || v > 1.0) fail_at(path, "expected a value in [0,1]");
}

std::optional<std::vector<double>> optional_numbers(ObjectReader& r, const std::string& key) {
  const Json* v = r.find(key);
  if (!v || v->is_null()) return std::nullopt;
  return as_numbers(*v, r.child(key));
}

std::size_t punishment_from_json(const Json& v, const std::string& path) {
  if (v.is_string()) {
    if (v.get<std::string>() == "grim") return kGrim;
    fail_at(path, "expected a period count or \"grim\"");
  }
  const std::size_t n = as_count(v, path);
  if (n == 0) fail_at(path, "punishment must last at least one period");
  return n;
}

OrderedJson punishment_to_json(std::size_t n) { return n == kGrim ? OrderedJson("grim") : OrderedJson(n); }

void check_detection(const std::string& d, const std::string& path) {
  if (d != "budgeted" && d != "oracle" && d != "bernoulli")
    fail_at(path, "unknown detection '" + d + "' (expected budgeted, oracle or bernoulli)");
}

GameSpec game_spec_from_json(const Json& value, const std::string& path) {
  GameSpec spec;
  if (!value.is_object()) fail_at(path, "expected object, got " + type_name(value));
  if (!value.contains("preset")) {
    spec.preset = GamePreset::kInline;
    spec.inline_game = game_from_json(value, path);
    return spec;
  }
  ObjectReader r(value, path);
  const std::string preset = r.string("preset");
  if (preset == "duopoly") {
    spec.preset = GamePreset::kDuopoly;
    auto& p = spec.duopoly;
    p.a_high = r.number_or("a_high", p.a_high);
    p.a_low = r.number_or("a_low", p.a_low);
    p.beta = r.number_or("beta", p.beta);
    p.marginal_cost = r.number_or("marginal_cost", p.marginal_cost);
    p.noise_variance = r.number_or("noise_variance", p.noise_variance);
    if (p.noise_variance < 0.0) fail_at(r.child("noise_variance"), "noise variance must be nonnegative");
    p.discount = r.number_or("discount", p.discount);
    check_discount(p.discount, r.child("discount"));
  } else if (preset == "oligopoly") {
    spec.preset = GamePreset::kOligopoly;
    auto& p = spec.oligopoly;
    p.n_firms = r.count_or("firms", p.n_firms);
    if (p.n_firms < 2) fail_at(r.child("firms"), "oligopoly needs at least two firms");
    p.a_high = r.number_or("a_high", p.a_high);
    p.a_low = r.number_or("a_low", p.a_low);
    p.beta = r.number_or("beta", p.beta);
    p.marginal_cost = r.number_or("marginal_cost", p.marginal_cost);
    p.noise_sd = r.number_or("noise_sd", p.noise_sd);
    p.bound_multiplier = r.number_or("bound_multiplier", p.bound_multiplier);
    p.discount = r.number_or("discount", p.discount);
    check_discount(p.discount, r.child("discount"));
  } else if (preset == "sat_market") {
    spec.preset = GamePreset::kSatMarket;
    auto& p = spec.sat;
    p.num_vars = r.count_or("num_vars", p.num_vars);
    p.num_clauses = r.count_or("num_clauses", p.num_clauses);
    p.base_intercept = r.number_or("base_intercept", p.base_intercept);
    p.shift = r.number_or("shift", p.shift);
    p.beta = r.number_or("beta", p.beta);
    p.marginal_cost = r.number_or("marginal_cost", p.marginal_cost);
    p.noise_sd = r.number_or("noise_sd", p.noise_sd);
    p.bound_multiplier = r.number_or("bound_multiplier", p.bound_multiplier);
    p.discount = r.number_or("discount", p.discount);
    check_discount(p.discount, r.child("discount"));
    spec.instance_seed = r.count_or("instance_seed", 0);
  } else {
    fail_at(r.child("preset"), "unknown preset '" + preset + "' (expected duopoly, oligopoly or sat_market)");
  }
  r.finish();
  return spec;
}

OrderedJson game_spec_to_json(const GameSpec& spec) {
  OrderedJson j;
  switch (spec.preset) {
    case GamePreset::kNone:
      return nullptr;
    case GamePreset::kInline:
      return game_to_json(spec.inline_game);
    case GamePreset::kDuopoly: {
      const auto& p = spec.duopoly;
      j["preset"] = "duopoly";
      j["a_high"] = p.a_high;
      j["a_low"] = p.a_low;
      j["beta"] = p.beta;
      j["marginal_cost"] = p.marginal_cost;
      j["noise_variance"] = p.noise_variance;
      j["discount"] = p.discount;
      return j;
    }
    case GamePreset::kOligopoly: {
      const auto& p = spec.oligopoly;
      j["preset"] = "oligopoly";
      j["firms"] = p.n_firms;
      j["a_high"] = p.a_high;
      j["a_low"] = p.a_low;
      j["beta"] = p.beta;
      j["marginal_cost"] = p.marginal_cost;
      j["noise_sd"] = p.noise_sd;
      j["bound_multiplier"] = p.bound_multiplier;
      j["discount"] = p.discount;
      return j;
    }
    case GamePreset::kSatMarket:
      break;
  }
  const auto& p = spec.sat;
  j["preset"] = "sat_market";
  j["num_vars"] = p.num_vars;
  j["num_clauses"] = p.num_clauses;
  j["base_intercept"] = p.base_intercept;
  j["shift"] = p.shift;
  j["beta"] = p.beta;
  j["marginal_cost"] = p.marginal_cost;
  j["noise_sd"] = p.noise_sd;
  j["bound_multiplier"] = p.bound_multiplier;
  j["discount"] = p.discount;
  j["instance_seed"] = spec.instance_seed;
  return j;
}

PolicyConfig policy_from_json(const Json& value, const std::string& path) {
  ObjectReader r(value, path);
  PolicyConfig p;
  p.type = r.string_or("type", "trigger");
  if (p.type != "trigger" && p.type != "myopic" && p.type != "deviator")
    fail_at(r.child("type"), "unknown policy '" + p.type + "' (expected trigger, myopic or deviator)");
  if (const Json* v = r.find("capacity")) p.capacity = budget_from_json(*v, r.child("capacity"));
  if (const Json* v = r.find("punishment_length")) p.punishment_length = punishment_from_json(*v, r.child("punishment_length"));
  if (const Json* v = r.find("detection")) {
    p.detection = as_string(*v, r.child("detection"));
    check_detection(*p.detection, r.child("detection"));
  }
  if (const Json* v = r.find("alpha")) {
    p.alpha = as_number(*v, r.child("alpha"));
    check_unit(*p.alpha, r.child("alpha"));
  }
  p.price = optional_numbers(r, "price");
  p.start = r.count_or("start", 1);
  p.duration = r.count_or("duration", 1);
  if (p.start == 0) fail_at(r.child("start"), "periods are numbered from 1");
  r.finish();
  return p;
}

OrderedJson policy_to_json(const PolicyConfig& p) {
  OrderedJson j;
  j["type"] = p.type;
  if (p.capacity) j["capacity"] = budget_to_json(*p.capacity);
  if (p.punishment_length) j["punishment_length"] = punishment_to_json(*p.punishment_length);
  if (p.detection) j["detection"] = *p.detection;
  if (p.alpha) j["alpha"] = *p.alpha;
  if (p.price) j["price"] = *p.price;
  if (p.type == "deviator") {
    j["start"] = p.start;
    j["duration"] = p.duration;
  }
  return j;
}

}  // namespace

std::string to_string(Command command) {
  for (const auto& c : kCommands)
    if (c.command == command) return c.name;
  return "unknown";
}

Command command_from_string(const std::string& name) {
  for (const auto& c : kCommands)
    if (name == c.name) return c.command;
  throw ValidationError("unknown command '" + name + "'");
}

MarketGame build_game(const GameSpec& spec) {
  switch (spec.preset) {
    case GamePreset::kNone:
      throw ValidationError("game: missing required field");
    case GamePreset::kDuopoly:
      return duopoly_game(spec.duopoly);
    case GamePreset::kOligopoly:
      return oligopoly_game(spec.oligopoly);
    case GamePreset::kSatMarket:
      return sat_market(spec.sat, spec.instance_seed).game;
    case GamePreset::kInline:
      break;
  }
  return spec.inline_game;
}

ExperimentConfig config_from_json(const Json& value, const std::filesystem::path& base_dir) {
  ObjectReader r(value, "");
  ExperimentConfig c;
  const auto version = as_integer(r.at("schema_version"), "schema_version");
  if (version != kSchemaVersion)
    fail_at("schema_version", "unsupported version " + std::to_string(version) + ", expected " +
                                  std::to_string(kSchemaVersion));
  c.schema_version = static_cast<int>(version);
  try {
    c.command = command_from_string(r.string("command"));
  } catch (const ValidationError&) {
    fail_at("command", "unknown command '" + as_string(value.at("command"), "command") + "'");
  }
  if (const Json* v = r.find("seed")) c.seed = static_cast<std::uint64_t>(as_count(*v, "seed"));
  c.output_dir = r.string_or("output_dir", c.output_dir);
  c.svg = r.boolean_or("svg", false);

  const Json* game = r.find("game");
  const Json* game_file = r.find("game_file");
  if (game && game_file) fail_at("game_file", "give either game or game_file, not both");
  if (game) c.game = game_spec_from_json(*game, "game");
  if (game_file) {
    std::filesystem::path p = as_string(*game_file, "game_file");
    if (p.is_relative()) p = base_dir / p;
    c.game.preset = GamePreset::kInline;
    c.game.inline_game = game_from_json(parse_json(read_file(p), p.string()), "game_file");
  }

  if (const Json* v = r.find("solver")) {
    ObjectReader s(*v, "solver");
    auto& o = c.solver;
    o.method = s.string_or("method", o.method);
    if (o.method != "closed_form" && o.method != "ascent" && o.method != "grid")
      fail_at("solver.method", "unknown method '" + o.method + "' (expected closed_form, ascent or grid)");
    o.tol = s.number_or("tol", o.tol);
    if (!(o.tol > 0.0)) fail_at("solver.tol", "tolerance must be positive");
    o.max_iter = s.count_or("max_iter", o.max_iter);
    o.grid_step = s.number_or("grid_step", o.grid_step);
    if (!(o.grid_step > 0.0)) fail_at("solver.grid_step", "step must be positive");
    o.grid_lower = s.number_or("grid_lower", o.grid_lower);
    o.grid_upper = s.number_or("grid_upper", o.grid_upper);
    if (!(o.grid_upper > o.grid_lower)) fail_at("solver.grid_upper", "upper bound must exceed lower bound");
    s.finish();
  }

  if (const Json* v = r.find("simulation")) {
    ObjectReader s(*v, "simulation");
    auto& o = c.simulation;
    o.horizon = s.count_or("horizon", o.horizon);
    if (o.horizon == 0) fail_at("simulation.horizon", "horizon must be at least one period");
    if (const Json* p = s.find("punishment_length"))
      o.punishment_length = punishment_from_json(*p, "simulation.punishment_length");
    if (const Json* p = s.find("capacity")) o.capacity = budget_from_json(*p, "simulation.capacity");
    o.detection = s.string_or("detection", o.detection);
    check_detection(o.detection, "simulation.detection");
    o.alpha = s.number_or("alpha", o.alpha);
    check_unit(o.alpha, "simulation.alpha");
    if (const Json* p = s.find("policies")) {
      if (!p->is_array()) fail_at("simulation.policies", "expected array, got " + type_name(*p));
      for (std::size_t i = 0; i < p->size(); ++i)
        o.policies.push_back(policy_from_json((*p)[i], "simulation.policies[" + std::to_string(i) + "]"));
    }
    if (const Json* t = s.find("tester"); t && !t->is_null()) {
      ObjectReader tr(*t, "simulation.tester");
      TesterConfig tc;
      tc.firm = tr.count_or("firm", 0);
      tc.price = optional_numbers(tr, "price");
      tc.probe_rate = tr.number_or("probe_rate", tc.probe_rate);
      check_unit(tc.probe_rate, "simulation.tester.probe_rate");
      tc.collapse_if_undetected = tr.boolean_or("collapse_if_undetected", tc.collapse_if_undetected);
      tr.finish();
      o.tester = tc;
    }
    s.finish();
  }

  if (const Json* v = r.find("sweep")) {
    ObjectReader s(*v, "sweep");
    auto& o = c.sweep;
    if (const Json* caps = s.find("capacities")) {
      if (!caps->is_array() || caps->empty()) fail_at("sweep.capacities", "expected a nonempty array");
      o.capacities.clear();
      for (std::size_t i = 0; i < caps->size(); ++i)
        o.capacities.push_back(budget_from_json((*caps)[i], "sweep.capacities[" + std::to_string(i) + "]"));
    }
    o.episodes = s.count_or("episodes", o.episodes);
    if (o.episodes == 0) fail_at("sweep.episodes", "need at least one episode");
    o.probe_rate = s.number_or("probe_rate", o.probe_rate);
    check_unit(o.probe_rate, "sweep.probe_rate");
    o.tester_firm = s.count_or("tester_firm", o.tester_firm);
    o.redraw_instances = s.boolean_or("redraw_instances", o.redraw_instances);
    o.eps_low = s.number_or("eps_low", o.eps_low);
    o.eps_high = s.number_or("eps_high", o.eps_high);
    if (o.eps_low > o.eps_high) fail_at("sweep.eps_low", "must not exceed eps_high");
    s.finish();
  }

  if (const Json* v = r.find("transparency")) {
    ObjectReader s(*v, "transparency");
    auto& o = c.transparency;
    if (const Json* g = s.find("variances")) {
      o.variances = as_numbers(*g, "transparency.variances");
      if (o.variances.empty()) fail_at("transparency.variances", "expected a nonempty array");
    }
    if (const Json* b = s.find("budget")) o.budget = budget_from_json(*b, "transparency.budget");
    o.episodes = s.count_or("episodes", o.episodes);
    o.z = s.number_or("z", o.z);
    if (!(o.z > 0.0)) fail_at("transparency.z", "multiplier must be positive");
    o.observations = s.count_or("observations", o.observations);
    o.trials = s.count_or("trials", o.trials);
    s.finish();
  }

  if (const Json* v = r.find("reduce")) {
    ObjectReader s(*v, "reduce");
    auto& o = c.reduce;
    o.source = s.string_or("source", o.source);
    if (o.source != "3sat" && o.source != "maxwsat" && o.source != "vc")
      fail_at("reduce.source", "unknown source '" + o.source + "' (expected 3sat, maxwsat or vc)");
    o.input = s.string_or("input", o.input);
    if (!o.input.empty() && std::filesystem::path(o.input).is_relative()) o.input = (base_dir / o.input).lexically_normal().string();
    o.k = s.count_or("k", o.k);
    if (const Json* t = s.find("target"); t && !t->is_null()) o.target = as_number(*t, "reduce.target");
    o.decide = s.boolean_or("decide", o.decide);
    if (const Json* b = s.find("budget")) o.budget = budget_from_json(*b, "reduce.budget");
    s.finish();
  }

  if (const Json* v = r.find("decide")) {
    ObjectReader s(*v, "decide");
    auto& o = c.decide;
    o.instance = s.string_or("instance", o.instance);
    if (!o.instance.empty() && std::filesystem::path(o.instance).is_relative())
      o.instance = (base_dir / o.instance).lexically_normal().string();
    if (const Json* b = s.find("budget")) o.budget = budget_from_json(*b, "decide.budget");
    s.finish();
  }

  if (const Json* v = r.find("duopoly")) {
    ObjectReader s(*v, "duopoly");
    auto& o = c.duopoly;
    o.coarse_step = s.number_or("coarse_step", o.coarse_step);
    o.fine_step = s.number_or("fine_step", o.fine_step);
    o.window = s.number_or("window", o.window);
    if (!(o.coarse_step > 0.0 && o.fine_step > 0.0 && o.window > 0.0))
      fail_at("duopoly", "steps and window must be positive");
    s.finish();
  }
  r.finish();

  switch (c.command) {
    case Command::kValidate:
    case Command::kEquilibrium:
    case Command::kSimulate:
    case Command::kSweepCapacity:
    case Command::kSweepTransparency:
      if (c.game.preset == GamePreset::kNone) fail_at("game", "missing required field");
      break;
    case Command::kReduce:
      if (c.reduce.input.empty()) fail_at("reduce.input", "missing required field");
      break;
    case Command::kDecide:
      if (c.decide.instance.empty()) fail_at("decide.instance", "missing required field");
      break;
    case Command::kExampleDuopoly:
      break;
  }
  return c;
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  return config_from_json(parse_json(text, "config"), base_dir);
}

OrderedJson config_to_json(const ExperimentConfig& c) {
  OrderedJson j;
  j["schema_version"] = c.schema_version;
  j["command"] = to_string(c.command);
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["svg"] = c.svg;
  if (c.game.preset != GamePreset::kNone) j["game"] = game_spec_to_json(c.game);

  OrderedJson solver;
  solver["method"] = c.solver.method;
  solver["tol"] = c.solver.tol;
  solver["max_iter"] = c.solver.max_iter;
  solver["grid_step"] = c.solver.grid_step;
  solver["grid_lower"] = c.solver.grid_lower;
  solver["grid_upper"] = c.solver.grid_upper;
  j["solver"] = solver;

  const auto& s = c.simulation;
  OrderedJson sim;
  sim["horizon"] = s.horizon;
  sim["punishment_length"] = punishment_to_json(s.punishment_length);
  sim["capacity"] = budget_to_json(s.capacity);
  sim["detection"] = s.detection;
  sim["alpha"] = s.alpha;
  OrderedJson policies = OrderedJson::array();
  for (const auto& p : s.policies) policies.push_back(policy_to_json(p));
  sim["policies"] = policies;
  if (s.tester) {
    OrderedJson t;
    t["firm"] = s.tester->firm;
    t["price"] = s.tester->price ? OrderedJson(*s.tester->price) : OrderedJson(nullptr);
    t["probe_rate"] = s.tester->probe_rate;
    t["collapse_if_undetected"] = s.tester->collapse_if_undetected;
    sim["tester"] = t;
  } else {
    sim["tester"] = nullptr;
  }
  j["simulation"] = sim;

  OrderedJson sweep;
  OrderedJson caps = OrderedJson::array();
  for (const auto& b : c.sweep.capacities) caps.push_back(budget_to_json(b));
  sweep["capacities"] = caps;
  sweep["episodes"] = c.sweep.episodes;
  sweep["probe_rate"] = c.sweep.probe_rate;
  sweep["tester_firm"] = c.sweep.tester_firm;
  sweep["redraw_instances"] = c.sweep.redraw_instances;
  sweep["eps_low"] = c.sweep.eps_low;
  sweep["eps_high"] = c.sweep.eps_high;
  j["sweep"] = sweep;

  OrderedJson tr;
  tr["variances"] = c.transparency.variances;
  tr["budget"] = budget_to_json(c.transparency.budget);
  tr["episodes"] = c.transparency.episodes;
  tr["z"] = c.transparency.z;
  tr["observations"] = c.transparency.observations;
  tr["trials"] = c.transparency.trials;
  j["transparency"] = tr;

  OrderedJson red;
  red["source"] = c.reduce.source;
  red["input"] = c.reduce.input;
  red["k"] = c.reduce.k;
  red["target"] = c.reduce.target ? OrderedJson(*c.reduce.target) : OrderedJson(nullptr);
  red["decide"] = c.reduce.decide;
  red["budget"] = budget_to_json(c.reduce.budget);
  j["reduce"] = red;

  OrderedJson dec;
  dec["instance"] = c.decide.instance;
  dec["budget"] = budget_to_json(c.decide.budget);
  j["decide"] = dec;

  OrderedJson duo;
  duo["coarse_step"] = c.duopoly.coarse_step;
  duo["fine_step"] = c.duopoly.fine_step;
  duo["window"] = c.duopoly.window;
  j["duopoly"] = duo;
  return j;
}

std::string serialize_config(const ExperimentConfig& config) { return config_to_json(config).dump(2) + "\n"; }

}  // namespace collusion::io
