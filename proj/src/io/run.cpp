#include "collusion/io/run.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <ostream>

#include "collusion/complexity.hpp"
#include "collusion/equilibria.hpp"
#include "collusion/experiments.hpp"
#include "collusion/families.hpp"
#include "collusion/io/formats.hpp"
#include "collusion/io/json_codec.hpp"
#include "collusion/repeated_game.hpp"

namespace collusion::io {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class RunDir {
 public:
  explicit RunDir(std::filesystem::path dir) : dir_(std::move(dir)) {}
  const std::filesystem::path& path() const { return dir_; }

  void csv(const std::string& name, const CsvTable& table) { text(name, table.str()); }
  void text(const std::string& name, const std::string& contents) {
    write_file(dir_ / name, contents);
    files_.push_back(name);
  }
  std::vector<ArtifactDigest> digests() const {
    std::vector<ArtifactDigest> out;
    for (const auto& f : files_) out.push_back({f, sha256_file(dir_ / f)});
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.file < b.file; });
    return out;
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

std::filesystem::path fresh_directory(const ExperimentConfig& config) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
  const std::filesystem::path root = config.output_dir;
  std::filesystem::create_directories(root);
  const std::string base = to_string(config.command) + "-" + stamp;
  for (int n = 1;; ++n) {
    const auto dir = root / (n == 1 ? base : base + "-" + std::to_string(n));
    if (std::filesystem::create_directory(dir)) return dir;
  }
}

OptimizationMethod method_of(const SolverConfig& s) {
  if (s.method == "ascent") return AscentMethod{s.tol, s.max_iter};
  if (s.method == "grid") return GridMethod{{s.grid_step, s.grid_lower, s.grid_upper}};
  return ClosedFormMethod{};
}

SolverOptions solver_options(const SolverConfig& s) {
  SolverOptions o;
  o.tol = s.tol;
  o.max_iter = s.max_iter;
  o.method = method_of(s);
  return o;
}

std::string budget_label(const CapacityBudget& b) { return to_string(b); }

DetectionMode detection_mode(const std::string& name, double alpha) {
  if (name == "oracle") return DetectionMode::oracle();
  if (name == "bernoulli") return DetectionMode::bernoulli(alpha);
  return DetectionMode::budgeted();
}

std::vector<FirmPolicy> build_policies(const SimulationConfig& sim, std::size_t firms) {
  if (!sim.policies.empty() && sim.policies.size() != firms)
    throw ValidationError("simulation.policies: got " + std::to_string(sim.policies.size()) + " policies for " +
                          std::to_string(firms) + " firms");
  std::vector<FirmPolicy> out;
  for (std::size_t i = 0; i < firms; ++i) {
    const PolicyConfig p = sim.policies.empty() ? PolicyConfig{} : sim.policies[i];
    if (p.type == "myopic") {
      out.emplace_back(MyopicCompetitive{});
    } else if (p.type == "deviator") {
      out.emplace_back(Deviator{p.price, p.start, p.duration});
    } else {
      out.emplace_back(CollusiveTrigger{p.capacity.value_or(sim.capacity),
                                        p.punishment_length.value_or(sim.punishment_length),
                                        detection_mode(p.detection.value_or(sim.detection), p.alpha.value_or(sim.alpha))});
    }
  }
  return out;
}

std::string state_label(const MarketGame& game, std::size_t s) { return to_string(state_at(game, s)); }

int run_validate(const ExperimentConfig& config, RunDir& dir, std::ostream& log) {
  const MarketGame game = build_game(config.game);
  const auto findings = validate_game(game);
  CsvTable t({"severity", "code", "message"});
  for (const auto& f : findings)
    t.add_row({std::string(f.severity == Severity::kViolation ? "violation" : "warning"), f.code, f.message});
  dir.csv("validation.csv", t);
  dir.text("game.json", game_to_json(game).dump(2) + "\n");
  log << (has_violations(findings) ? "invalid" : "valid") << ": " << findings.size() << " finding(s)\n";
  for (const auto& f : findings) log << "  " << f.code << ": " << f.message << "\n";
  return has_violations(findings) ? 1 : 0;
}

void run_equilibrium(const ExperimentConfig& config, RunDir& dir, std::ostream& log) {
  const MarketGame game = build_game(config.game);
  const SolverOptions so = solver_options(config.solver);
  const std::size_t m = enumerable_state_count(game);
  std::vector<PriceVector> comp, coll;
  std::vector<std::size_t> iterations;
  for (std::size_t s = 0; s < m; ++s) {
    const auto states = single_state(state_at(game, s));
    const auto c = competitive_fixed_point(game, states, so);
    if (!c.converged) throw SolverError("competitive fixed point did not converge in state " + state_label(game, s));
    comp.push_back(c.prices);
    iterations.push_back(c.iterations);
    coll.push_back(collusive_optimum(game, states, so.method).prices);
  }
  const auto comp_profile = StrategyProfile::tabular(comp);
  const auto coll_profile = StrategyProfile::tabular(coll);

  CsvTable prices({"solution", "state", "firm", "product", "price"});
  for (const char* which : {"competitive", "collusive"}) {
    const auto& table = std::string(which) == "competitive" ? comp : coll;
    for (std::size_t s = 0; s < m; ++s)
      for (std::size_t i = 0; i < game.n_firms; ++i)
        for (std::size_t k = 0; k < game.products_per_firm; ++k)
          prices.add_row({std::string(which), state_label(game, s), std::uint64_t{i}, std::uint64_t{k},
                          table[s](i, k)});
  }
  dir.csv("equilibrium.csv", prices);

  CsvTable payoffs({"firm", "pi_competitive", "pi_collusive", "pi_deviation", "delta_star"});
  for (std::size_t i = 0; i < game.n_firms; ++i) {
    const double pp = profile_payoff(game, i, comp_profile);
    const double pm = profile_payoff(game, i, coll_profile);
    const double pd = deviation_payoff(game, i, coll_profile, so);
    double ds = kNaN;
    try {
      ds = compute_delta_star(pd, pm, pp);
    } catch (const ValidationError&) {
    }
    payoffs.add_row({std::uint64_t{i}, pp, pm, pd, ds});
    log << "firm " << i << ": pi_P=" << format_csv_value(pp) << " pi_M=" << format_csv_value(pm)
        << " pi_D=" << format_csv_value(pd) << " delta*=" << format_csv_value(ds) << "\n";
  }
  dir.csv("payoffs.csv", payoffs);
}

void run_reduce(const ExperimentConfig& config, RunDir& dir, std::ostream& log) {
  const auto& rc = config.reduce;
  const std::string text = read_file(rc.input);
  DecisionInstance instance;
  std::string yes_label, no_label;
  if (rc.source == "3sat") {
    const Cnf cnf = parse_dimacs(text);
    instance = reduce_3sat_to_cdp(cnf);
    yes_label = "SAT↔yes";
    no_label = "UNSAT↔no";
  } else if (rc.source == "maxwsat") {
    const WeightedCnf w = parse_wcnf(text);
    if (w.clauses.empty()) throw ValidationError(rc.input + ": formula has no clauses");
    double total = 0.0;
    for (double x : w.weights) total += x;
    const double target = rc.target.value_or(total / static_cast<double>(w.clauses.size()));
    instance = reduce_maxwsat_to_csp(w, target);
    yes_label = "WEIGHT≥TARGET↔yes";
    no_label = "WEIGHT<TARGET↔no";
  } else {
    const Graph g = parse_graph(text);
    instance = reduce_vc_to_opp(g, rc.k);
    yes_label = "COVER≤k↔yes";
    no_label = "COVER>k↔no";
  }
  dir.text("instance.json", instance_to_json(instance).dump(2) + "\n");
  log << "wrote instance.json (" << rc.source << ")\n";
  if (!rc.decide) return;
  const Verdict v = decide(instance, rc.budget);
  dir.text("verdict.json", verdict_to_json(v).dump(2) + "\n");
  CsvTable t({"problem", "answer", "nodes_expanded"});
  t.add_row({rc.source, to_string(v.answer), std::uint64_t{v.nodes_expanded}});
  dir.csv("verdict.csv", t);
  if (v.answer == Answer::kUnknown)
    log << "UNKNOWN (budget exhausted after " << v.nodes_expanded << " nodes)\n";
  else
    log << (v.answer == Answer::kYes ? yes_label : no_label) << "\n";
}

void run_decide(const ExperimentConfig& config, RunDir& dir, std::ostream& log) {
  const auto& path = config.decide.instance;
  const DecisionInstance instance = instance_from_json(parse_json(read_file(path), path));
  const Verdict v = decide(instance, config.decide.budget);
  dir.text("verdict.json", verdict_to_json(v).dump(2) + "\n");
  const char* problem = std::holds_alternative<CspPayload>(instance.payload)   ? "csp"
                        : std::holds_alternative<CdpPayload>(instance.payload) ? "cdp"
                                                                                : "opp";
  CsvTable t({"problem", "answer", "nodes_expanded"});
  t.add_row({std::string(problem), to_string(v.answer), std::uint64_t{v.nodes_expanded}});
  dir.csv("verdict.csv", t);
  log << problem << ": " << to_string(v.answer) << " (" << v.nodes_expanded << " nodes)\n";
}

void run_simulate(const ExperimentConfig& config, RunDir& dir, std::ostream& log) {
  const MarketGame game = build_game(config.game);
  const Scenario sc = make_scenario(game);
  const auto policies = build_policies(config.simulation, game.n_firms);
  SimulationOptions opts;
  if (const auto& t = config.simulation.tester)
    opts.tester = Tester{t->firm, t->price, t->probe_rate, t->collapse_if_undetected};
  const SimTrace trace = run_simulation(sc, policies, config.simulation.horizon, config.seed, opts);

  std::vector<std::string> cols{"t", "theta", "phase"};
  for (std::size_t i = 0; i < game.n_firms; ++i)
    for (std::size_t k = 0; k < game.products_per_firm; ++k)
      cols.push_back("price_" + std::to_string(i) + "_" + std::to_string(k));
  for (std::size_t i = 0; i < game.n_firms; ++i) cols.push_back("profit_" + std::to_string(i));
  for (const char* c : {"deviation", "probe", "flagged", "markup"}) cols.emplace_back(c);
  CsvTable t(cols);
  for (const auto& r : trace.periods) {
    std::vector<CsvValue> row{std::uint64_t{r.t}, state_label(game, r.state_index), to_string(r.phase)};
    for (double p : r.prices.values()) row.emplace_back(p);
    for (double p : r.profits) row.emplace_back(p);
    bool flagged = false;
    for (const auto& d : r.detections) flagged = flagged || d.verdict == Answer::kNo;
    row.emplace_back(std::uint64_t{r.deviation});
    row.emplace_back(std::uint64_t{r.probe});
    row.emplace_back(std::uint64_t{flagged});
    row.emplace_back(r.markup);
    t.add_row(std::move(row));
  }
  dir.csv("trace.csv", t);

  CsvTable s({"metric", "value"});
  s.add_row({std::string("mean_markup"), trace.mean_markup});
  s.add_row({std::string("competitive_markup"), trace.competitive_markup});
  s.add_row({std::string("monopoly_markup"), trace.monopoly_markup});
  s.add_row({std::string("normalized_markup"), trace.normalized_markup()});
  s.add_row({std::string("collusive_share"), trace.collusive_share});
  s.add_row({std::string("punishment_share"), trace.punishment_share});
  s.add_row({std::string("deviation_verdicts"), std::uint64_t{trace.deviation_verdicts}});
  s.add_row({std::string("probes"), std::uint64_t{trace.probes}});
  for (std::size_t i = 0; i < game.n_firms; ++i)
    s.add_row({"discounted_payoff_" + std::to_string(i), trace.discounted_payoffs[i]});
  dir.csv("summary.csv", s);
  log << "mean markup " << format_csv_value(trace.mean_markup) << ", collusive share "
      << format_csv_value(trace.collusive_share) << "\n";

  if (config.svg) {
    std::vector<std::string> ticks;
    SvgSeries series{"markup", {}};
    for (const auto& r : trace.periods) {
      ticks.push_back(r.t % 20 == 1 ? std::to_string(r.t) : "");
      series.y.push_back(r.markup);
    }
    dir.text("trace.svg", svg_line_chart("Mean markup by period", "period", "markup", ticks, {series}));
  }
}

void run_sweep_capacity(const ExperimentConfig& config, RunDir& dir, std::ostream& log) {
  const auto& sw = config.sweep;
  SweepOptions opts;
  opts.punishment_length = config.simulation.punishment_length;
  opts.probe_rate = sw.probe_rate;
  opts.tester_firm = sw.tester_firm;
  RegimeCurve curve;
  if (config.game.preset == GamePreset::kSatMarket && sw.redraw_instances) {
    const SatMarketParams params = config.game.sat;
    const ScenarioFamily family = [params](std::size_t, std::uint64_t seed) {
      return make_scenario(sat_market(params, seed).game);
    };
    curve = sweep_capacity(family, sw.capacities, sw.episodes, config.simulation.horizon, config.seed, opts);
  } else {
    curve = sweep_capacity(make_scenario(build_game(config.game)), sw.capacities, sw.episodes,
                           config.simulation.horizon, config.seed, opts);
  }
  const auto cls = classify_regimes(curve, sw.eps_low, sw.eps_high);
  CsvTable t({"capacity", "mean_markup", "detection_accuracy", "normalized_markup", "normalized_se",
              "collusive_share", "punishment_share", "regime"});
  for (std::size_t k = 0; k < curve.points.size(); ++k) {
    const auto& p = curve.points[k];
    t.add_row({budget_label(p.capacity), p.mean_markup, p.detection_accuracy, p.normalized_markup, p.normalized_se,
               p.collusive_share, p.punishment_share, to_string(cls.labels[k])});
    log << budget_label(p.capacity) << ": normalized markup " << format_csv_value(p.normalized_markup) << " ("
        << to_string(cls.labels[k]) << ")\n";
  }
  dir.csv("regime_curve.csv", t);
  CsvTable s({"metric", "value"});
  s.add_row({std::string("s_star"), cls.s_star ? budget_label(*cls.s_star) : std::string("none")});
  s.add_row({std::string("s_double_star"), cls.s_double_star ? budget_label(*cls.s_double_star) : std::string("none")});
  s.add_row({std::string("competitive_markup"), curve.competitive_markup});
  s.add_row({std::string("monopoly_markup"), curve.monopoly_markup});
  dir.csv("regimes.csv", s);
  if (config.svg) {
    std::vector<std::string> ticks;
    SvgSeries markup{"normalized markup", {}}, accuracy{"detection accuracy", {}};
    for (const auto& p : curve.points) {
      ticks.push_back(budget_label(p.capacity));
      markup.y.push_back(p.normalized_markup);
      accuracy.y.push_back(p.detection_accuracy);
    }
    dir.text("regime_curve.svg",
             svg_line_chart("Markup against computational capacity", "capacity (search nodes)", "normalized value",
                            ticks, {markup, accuracy}));
  }
}

void run_sweep_transparency(const ExperimentConfig& config, RunDir& dir, std::ostream& log) {
  const MarketGame game = build_game(config.game);
  const auto& tc = config.transparency;
  TransparencyOptions opts;
  opts.z = tc.z;
  opts.observations = tc.observations;
  opts.trials = tc.trials;
  opts.tester_firm = config.sweep.tester_firm;
  opts.sweep.punishment_length = config.simulation.punishment_length;
  opts.sweep.probe_rate = config.sweep.probe_rate;
  const auto report = transparency_sweep(game, collusive_profile(game), tc.variances, tc.episodes,
                                         config.simulation.horizon, tc.budget, config.seed, opts);
  CsvTable t({"noise_variance", "tolerance", "mean_ambiguity", "detection_accuracy", "accuracy_se", "mean_markup",
              "markup_se", "normalized_markup"});
  for (const auto& p : report.points) {
    t.add_row({p.noise_variance, p.tolerance, p.mean_ambiguity, p.detection_accuracy, p.accuracy_se, p.mean_markup,
               p.markup_se, p.normalized_markup});
    log << "variance " << format_csv_value(p.noise_variance) << ": |A| " << format_csv_value(p.mean_ambiguity)
        << ", accuracy " << format_csv_value(p.detection_accuracy) << "\n";
  }
  dir.csv("transparency.csv", t);
  CsvTable s({"metric", "value"});
  s.add_row({std::string("inclusion_checks"), std::uint64_t{report.inclusion_checks}});
  s.add_row({std::string("inclusion_failures"), std::uint64_t{report.inclusion_failures}});
  for (std::size_t k = 0; k < report.deviation_price.size(); ++k)
    s.add_row({"deviation_price_" + std::to_string(k), report.deviation_price[k]});
  dir.csv("transparency_summary.csv", s);
  if (config.svg) {
    std::vector<std::string> ticks;
    SvgSeries acc{"detection accuracy", {}}, mk{"normalized markup", {}};
    for (const auto& p : report.points) {
      ticks.push_back(format_csv_value(p.noise_variance));
      acc.y.push_back(p.detection_accuracy);
      mk.y.push_back(p.normalized_markup);
    }
    dir.text("transparency.svg",
             svg_line_chart("Detection and markup against noise variance", "noise variance", "value", ticks, {acc, mk}));
  }
}

void run_duopoly(const ExperimentConfig& config, RunDir& dir, std::ostream& log) {
  const DuopolyTable table =
      duopoly_example({config.duopoly.coarse_step, config.duopoly.fine_step, config.duopoly.window});
  CsvTable t({"quantity", "state", "closed_form", "ascent", "grid", "printed", "discrepancy"});
  for (const auto& r : table.rows)
    t.add_row({r.quantity, r.state, r.closed_form, r.ascent, r.grid, r.printed ? *r.printed : kNaN,
               std::string(r.printed ? (r.discrepancy ? "yes" : "no") : "")});
  dir.csv("duopoly.csv", t);
  const std::string text = format_table(table);
  dir.text("duopoly.txt", text);
  log << text;
}

}  // namespace

int exit_code_for(const std::exception& error) {
  return dynamic_cast<const ValidationError*>(&error) ? 1 : 2;
}

RunRecord run_experiment(const ExperimentConfig& config, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  RunDir dir(fresh_directory(config));
  dir.text("config.json", serialize_config(config));
  RunRecord record;
  record.directory = dir.path();
  switch (config.command) {
    case Command::kValidate:
      record.exit_code = run_validate(config, dir, log);
      break;
    case Command::kEquilibrium:
      run_equilibrium(config, dir, log);
      break;
    case Command::kReduce:
      run_reduce(config, dir, log);
      break;
    case Command::kDecide:
      run_decide(config, dir, log);
      break;
    case Command::kSimulate:
      run_simulate(config, dir, log);
      break;
    case Command::kSweepCapacity:
      run_sweep_capacity(config, dir, log);
      break;
    case Command::kSweepTransparency:
      run_sweep_transparency(config, dir, log);
      break;
    case Command::kExampleDuopoly:
      run_duopoly(config, dir, log);
      break;
  }
  record.artifacts = dir.digests();
  record.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  OrderedJson rec;
  rec["engine_version"] = kEngineVersion;
  rec["command"] = to_string(config.command);
  rec["seed"] = config.seed;
  rec["wall_seconds"] = record.wall_seconds;
  OrderedJson files = OrderedJson::array();
  for (const auto& a : record.artifacts) {
    OrderedJson f;
    f["file"] = a.file;
    f["sha256"] = a.sha256;
    files.push_back(f);
  }
  rec["artifacts"] = files;
  rec["config"] = config_to_json(config);
  write_file(dir.path() / "run.record", rec.dump(2) + "\n");
  log << "run directory: " << dir.path().string() << "\n";
  return record;
}

}  // namespace collusion::io
