// Acceptance run: one PASS/FAIL line per criterion. Exits nonzero when any
// criterion fails. The optional argument is the path of the command-line tool,
// used by the determinism check.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "collusion/complexity.hpp"
#include "collusion/equilibria.hpp"
#include "collusion/experiments.hpp"
#include "collusion/families.hpp"
#include "collusion/io/formats.hpp"
#include "collusion/io/json_reader.hpp"
#include "collusion/repeated_game.hpp"
#include "oracles.hpp"

using namespace collusion;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double combined_se(double a, double b) { return std::sqrt(a * a + b * b); }

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

// --- 1: 3-SAT to detection ---------------------------------------------------

Outcome reduction_3sat() {
  std::size_t agree = 0, total = 0, sat = 0;
  for (std::size_t i = 0; i < 240; ++i) {
    Rng rng = make_rng(derive_seed(1, stream::kInstance, i));
    const std::size_t n = 3 + i % 10;
    const double ratio = 3.0 + 2.0 * uniform01(rng);
    const std::size_t m = std::min<std::size_t>(5 * n, static_cast<std::size_t>(std::ceil(ratio * n)));
    const Cnf f = random_ksat(n, m, 3, rng());
    const bool expected = oracles::satisfiable(f);
    const Verdict v = decide_cdp(reduce_3sat_to_cdp(f));
    ++total;
    sat += expected;
    agree += (v.answer == Answer::kYes) == expected && v.answer != Answer::kUnknown;
  }
  return {agree == total, fmt("%zu/%zu instances agree with enumeration (%zu satisfiable, n<=12, m<=5n)", agree, total, sat)};
}

// --- 2: Max-Weighted-SAT to strategy -------------------------------------------

std::vector<WeightedCnf> weighted_corpus() {
  std::vector<WeightedCnf> corpus{WeightedCnf{2, {{1, 2}, {-1}}, {3, 2}}, WeightedCnf{1, {{1}}, {4}},
                                  WeightedCnf{3, {{1, 2, 3}, {-1, -2}, {-3}, {2, -3}}, {5, 4, 3, 1}}};
  for (std::size_t i = 0; i < 80; ++i) {
    Rng rng = make_rng(derive_seed(2, stream::kInstance, i));
    const std::size_t n = 1 + i % 10;
    const std::size_t m = 1 + rng() % (3 * n + 2);
    WeightedCnf f{n, {}, {}};
    for (std::size_t l = 0; l < m; ++l) {
      const std::size_t len = 1 + rng() % std::min<std::size_t>(3, n);
      const Cnf one = random_ksat(n, 1, len, rng());
      f.clauses.push_back(one.clauses.front());
      f.weights.push_back(static_cast<double>(1 + rng() % 20));
    }
    corpus.push_back(std::move(f));
  }
  return corpus;
}

Outcome reduction_maxwsat() {
  const auto corpus = weighted_corpus();
  std::size_t agree = 0;
  for (const auto& f : corpus) {
    const double weight = oracles::max_weight(f);
    const double m = static_cast<double>(f.clauses.size());
    const auto inst = reduce_maxwsat_to_csp(f, 0.0);
    double best = 0.0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (f.num_vars + 1)); ++mask) {
      PriceVector p(f.num_vars + 1, 1);
      for (std::size_t i = 0; i <= f.num_vars; ++i) p(i, 0) = static_cast<double>((mask >> i) & 1u);
      best = std::max(best, expected_joint_profit(inst.game, p).value);
    }
    const bool exact = std::round(best * m) == weight && std::abs(best * m - weight) < 1e-9 * std::max(1.0, weight);
    const bool reach = decide_csp(reduce_maxwsat_to_csp(f, (weight - 1e-9) / m)).answer == Answer::kYes;
    const bool above = decide_csp(reduce_maxwsat_to_csp(f, (weight + 0.5) / m)).answer == Answer::kNo;
    agree += exact && reach && above;
  }
  return {agree == corpus.size(),
          fmt("%zu/%zu weighted formulas: m * max joint profit == max weight (<=10 variables)", agree, corpus.size())};
}

// --- 3: vertex cover to punishment --------------------------------------------

std::vector<Graph> graph_corpus() {
  std::vector<Graph> corpus;
  for (std::size_t n = 1; n <= 12; ++n) {
    std::vector<Edge> path, cycle, star;
    for (std::size_t v = 0; v + 1 < n; ++v) path.emplace_back(v, v + 1);
    cycle = path;
    if (n >= 3) cycle.emplace_back(0, n - 1);
    for (std::size_t v = 1; v < n; ++v) star.emplace_back(0, v);
    corpus.emplace_back(n, std::vector<Edge>{});
    corpus.emplace_back(n, path);
    corpus.emplace_back(n, cycle);
    corpus.emplace_back(n, star);
    corpus.push_back(complete_graph(n));
    for (std::size_t k = 0; k < 8; ++k)
      corpus.push_back(random_graph(n, 0.15 + 0.1 * static_cast<double>(k), derive_seed(3, stream::kInstance, n, k)));
  }
  return corpus;
}

Outcome reduction_vc() {
  const auto corpus = graph_corpus();
  std::size_t agree = 0, total = 0;
  for (const auto& g : corpus) {
    const std::size_t cover = oracles::min_vertex_cover(g);
    for (std::size_t k = 0; k <= g.num_vertices(); ++k) {
      ++total;
      agree += (decide_opp(reduce_vc_to_opp(g, k)).answer == Answer::kYes) == (cover <= k);
    }
  }
  return {agree == total,
          fmt("%zu/%zu (graph, k) pairs agree with subset enumeration over %zu graphs up to 12 vertices", agree, total,
              corpus.size())};
}

// --- 4: solver agreement on the duopoly -------------------------------------------

Outcome solver_agreement() {
  const auto table = duopoly_example();
  double gap = 0.0;
  std::string values;
  for (const auto& r : table.rows) {
    if (r.quantity != "p_star" && r.quantity != "p_monopoly") continue;
    gap = std::max({gap, std::abs(r.closed_form - r.ascent), std::abs(r.closed_form - r.grid),
                    std::abs(r.ascent - r.grid)});
    values += fmt(" %s(%s)=%.4f", r.quantity.c_str(), r.state.c_str(), r.closed_form);
  }
  return {gap <= 0.002, fmt("max gap %.2e (tol 0.002);%s; printed values flagged: %s", gap, values.c_str(),
                            table.discrepancy ? "yes" : "no")};
}

// --- 5: delta star gate ---------------------------------------------------------

Outcome delta_gate() {
  const MarketGame base = single_state_duopoly();
  const Scenario sc0 = make_scenario(base);
  const double pm = profile_payoff(base, 0, sc0.collusive);
  const double pp = profile_payoff(base, 0, sc0.competitive);
  const double pd = deviation_payoff(base, 0, sc0.collusive);
  const double star = compute_delta_star(pd, pm, pp);
  auto gap = [&](double delta) {
    const Scenario sc = make_scenario(single_state_duopoly(10.0, 0.5, 1.0, delta));
    std::vector<FirmPolicy> policies(2, CollusiveTrigger{CapacityBudget::unlimited(), kGrim, DetectionMode::oracle()});
    const double compliant = run_simulation(sc, policies, 200, 5).discounted_payoffs[0];
    policies[0] = Deviator{std::nullopt, 1, 1};
    return run_simulation(sc, policies, 200, 5).discounted_payoffs[0] - compliant;
  };
  const double below = gap(star - 0.05);
  const double above = gap(star + 0.05);
  return {below > 0.0 && above < 0.0,
          fmt("delta*=%.4f (pi_D=%.4f pi_M=%.4f pi_P=%.4f); deviator gain %+.4f at delta*-0.05, %+.4f at delta*+0.05", star,
              pd, pm, pp, below, above)};
}

// --- 6: regimes across capacity ----------------------------------------------------

Outcome regimes() {
  const SatMarketParams params;
  ScenarioFamily family = [&](std::size_t, std::uint64_t seed) { return make_scenario(sat_market(params, seed).game); };
  const std::vector<CapacityBudget> caps{CapacityBudget::nodes(0),    CapacityBudget::nodes(10),
                                         CapacityBudget::nodes(100),  CapacityBudget::nodes(1000),
                                         CapacityBudget::nodes(10000), CapacityBudget::unlimited()};
  const auto curve = sweep_capacity(family, caps, 30, 200, 42);
  const auto& pts = curve.points;
  bool middle = false, monotone = true;
  std::string values;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    values += fmt(" %s:%.3f", to_string(pts[k].capacity).c_str(), pts[k].normalized_markup);
    if (k > 0 && k + 1 < pts.size()) middle |= pts[k].normalized_markup > 0.05 && pts[k].normalized_markup < 0.95;
    if (k > 0 && pts[k].normalized_markup < pts[k - 1].normalized_markup -
                                                2.0 * combined_se(pts[k].normalized_se, pts[k - 1].normalized_se))
      monotone = false;
  }
  const bool low = pts.front().normalized_markup <= 0.05;
  const bool high = pts.back().normalized_markup >= 0.95;
  return {low && high && middle && monotone,
          fmt("normalized markup%s; low<=0.05 %s, unlimited>=0.95 %s, intermediate %s, monotone within 2 SE %s",
              values.c_str(), low ? "yes" : "no", high ? "yes" : "no", middle ? "yes" : "no", monotone ? "yes" : "no")};
}

// --- 7: transparency ------------------------------------------------------------

Outcome transparency() {
  const auto market = sat_market(SatMarketParams{}, 5);
  const auto profile = collusive_profile(market.game);
  const std::vector<double> grid{0.0025, 0.01, 0.04, 0.16, 0.64};
  const auto report = transparency_sweep(market.game, profile, grid, 30, 200, CapacityBudget::nodes(100), 11);
  const auto& lo = report.points.front();
  const auto& hi = report.points.back();
  const bool inclusion = report.inclusion_failures == 0 && report.inclusion_checks > 0;
  const bool accuracy =
      lo.detection_accuracy - hi.detection_accuracy >= 2.0 * combined_se(lo.accuracy_se, hi.accuracy_se);
  bool markup = true;
  std::string values;
  for (std::size_t k = 0; k < report.points.size(); ++k) {
    const auto& p = report.points[k];
    values += fmt(" %.4g:|A|=%.2f,acc=%.3f,markup=%.3f", p.noise_variance, p.mean_ambiguity, p.detection_accuracy,
                  p.mean_markup);
    if (k > 0) {
      const auto& q = report.points[k - 1];
      if (p.mean_markup > q.mean_markup + 2.0 * combined_se(p.markup_se, q.markup_se)) markup = false;
    }
  }
  return {inclusion && accuracy && markup,
          fmt("inclusion failures %zu/%zu; accuracy drop %.3f (2 SE = %.3f); markup nonincreasing %s;%s",
              report.inclusion_failures, report.inclusion_checks, lo.detection_accuracy - hi.detection_accuracy,
              2.0 * combined_se(lo.accuracy_se, hi.accuracy_se), markup ? "yes" : "no", values.c_str())};
}

// --- 8: alpha gate ------------------------------------------------------------------

Outcome alpha_gate() {
  const MarketGame g = single_state_duopoly(10.0, 0.5, 1.0, 0.95);
  const Scenario sc = make_scenario(g);
  const double star = compute_delta_star(deviation_payoff(g, 0, sc.collusive), profile_payoff(g, 0, sc.collusive),
                                         profile_payoff(g, 0, sc.competitive));

  SimulationOptions blind_opt;
  blind_opt.tester = Tester{0, std::nullopt, 0.2, true};
  const std::vector<FirmPolicy> blind(2, CollusiveTrigger{CapacityBudget::unlimited(), 10, DetectionMode::bernoulli(0.0)});
  const auto t0 = run_simulation(sc, blind, 500, 8, blind_opt);
  std::size_t first_probe = 0;
  for (const auto& p : t0.periods)
    if (p.probe) {
      first_probe = p.t;
      break;
    }
  bool collapses_at_probe = first_probe > 0;
  for (const auto& p : t0.periods) collapses_at_probe &= (p.phase == Phase::kCollusive) == (p.t <= first_probe);

  const std::vector<FirmPolicy> sure(2, CollusiveTrigger{CapacityBudget::unlimited(), kGrim, DetectionMode::bernoulli(1.0)});
  const TesterPlan plan = plan_tester(sc, 0, std::nullopt, 1.0, kGrim, 0.2);
  const auto t1 = run_simulation(sc, sure, 500, 8, {plan.tester, false});
  // A tester that probes anyway is caught and earns less than compliance.
  Tester eager = plan.tester;
  eager.probe_rate = 0.2;
  const auto probing = run_simulation(sc, sure, 500, 8, {eager, false});
  const bool probing_loses = probing.probes > 0 && probing.discounted_payoffs[0] < t1.discounted_payoffs[0];

  const bool ic = check_alpha_ic(22.5, 30.0, 10.0, 0.9, 1.0) && !check_alpha_ic(22.5, 30.0, 10.0, 0.9, 0.0) &&
                  std::abs(alpha_ic_margin(22.5, 30.0, 10.0, 0.9, 1.0) - (22.5 - 120.0 / 9.0)) < 1e-12 &&
                  std::abs(alpha_ic_margin(22.5, 30.0, 10.0, 0.9, 0.0) + 7.5) < 1e-12;
  const auto threshold = alpha_ic_threshold(22.5, 30.0, 10.0, 1.0);
  const bool bisect = threshold && std::abs(*threshold - 30.0 / 42.5) < 1e-6;

  const bool pass = t0.collusive_share < 0.2 && collapses_at_probe && g.discount >= star && plan.sustainable &&
                    t1.collusive_share >= 0.95 && probing_loses && ic && bisect;
  return {pass, fmt("alpha=0: share %.3f, collapse at first probe t=%zu %s; alpha=1 (delta %.2f >= delta* %.4f): share "
                    "%.3f, probing loses %s; inequality examples %s, threshold %.6f",
                    t0.collusive_share, first_probe, collapses_at_probe ? "yes" : "no", g.discount, star,
                    t1.collusive_share, probing_loses ? "yes" : "no", ic ? "exact" : "wrong",
                    threshold ? *threshold : std::nan(""))};
}

// --- 9: two tiers -------------------------------------------------------------------

Outcome tiers() {
  const auto r = scenario_asymmetric(oligopoly_game(), 2, CapacityBudget::unlimited(), CapacityBudget::nodes(0), 200,
                                     30, 9);
  const double diff = r.ai_markup - r.traditional_markup;
  const double se = combined_se(r.ai_se, r.traditional_se);
  return {diff >= 2.0 * se, fmt("AI tier %.4f (SE %.4f), traditional %.4f (SE %.4f), difference %.4f vs 2 SE %.4f",
                                r.ai_markup, r.ai_se, r.traditional_markup, r.traditional_se, diff, 2.0 * se)};
}

// --- 10: determinism across reruns and thread counts -------------------------------

struct CliRun {
  int status = -1;
  fs::path directory;
};

CliRun run_cli(const std::string& tool, const std::string& args) {
  CliRun out;
  const std::string cmd = "'" + tool + "' " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return out;
  std::string text;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) text += buf;
  out.status = ::pclose(pipe);
  const std::string key = "run directory: ";
  const auto pos = text.rfind(key);
  if (pos != std::string::npos) {
    const auto end = text.find('\n', pos);
    out.directory = text.substr(pos + key.size(), end - pos - key.size());
  }
  return out;
}

std::map<std::string, std::string> csv_digests(const fs::path& dir) {
  std::map<std::string, std::string> out;
  const auto record = io::Json::parse(io::read_file(dir / "run.record"));
  for (const auto& a : record["artifacts"]) {
    const std::string file = a["file"].get<std::string>();
    if (file.size() > 4 && file.substr(file.size() - 4) == ".csv") {
      if (io::sha256_file(dir / file) != a["sha256"].get<std::string>()) out[file] = "record mismatch";
      else out[file] = a["sha256"].get<std::string>();
    }
  }
  return out;
}

Outcome determinism(const std::string& tool) {
  if (tool.empty() || !fs::exists(tool)) return {false, "command-line tool not found"};
  const fs::path scratch = fs::temp_directory_path() / ("collusion-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(scratch);
  fs::create_directories(scratch);
  io::write_file(scratch / "f.cnf", "p cnf 4 5\n1 2 -3 0\n-1 3 4 0\n2 -4 0\n-2 -3 0\n1 4 0\n");
  io::write_file(scratch / "f.wcnf", "p wcnf 3 3\n3 1 2 0\n2 -1 0\n4 -2 3 0\n");
  io::write_file(scratch / "g.txt", "0 1\n1 2\n2 3\n3 0\n0 2\n");
  const std::string out = "--out '" + (scratch / "runs").string() + "'";

  const CliRun seed_reduce = run_cli(tool, "reduce --sat '" + (scratch / "f.cnf").string() + "' " + out);
  const std::string instance = (seed_reduce.directory / "instance.json").string();
  const std::vector<std::string> commands{
      "validate --preset oligopoly",
      "equilibrium --preset oligopoly",
      "equilibrium --preset duopoly --method grid",
      "reduce --sat '" + (scratch / "f.cnf").string() + "' --decide",
      "reduce --wcnf '" + (scratch / "f.wcnf").string() + "' --decide",
      "reduce --graph '" + (scratch / "g.txt").string() + "' --k 2 --decide",
      "decide --instance '" + instance + "' --budget 5",
      "simulate --preset sat_market --horizon 120",
      "sweep-capacity --preset sat_market --episodes 6 --horizon 100",
      "sweep-transparency --preset sat_market --episodes 3 --horizon 60",
      "example-duopoly"};

  std::size_t stable = 0;
  std::string failures;
  for (const auto& c : commands) {
    std::vector<std::map<std::string, std::string>> digests;
    bool ok = true;
    for (const char* threads : {"1", "1", "3", "0"}) {
      const CliRun r = run_cli(tool, c + " --seed 7 --threads " + threads + " " + out);
      if (r.status != 0 || r.directory.empty()) {
        ok = false;
        break;
      }
      digests.push_back(csv_digests(r.directory));
    }
    for (const auto& d : digests) ok &= !d.empty() && d == digests.front();
    if (ok) {
      for (const auto& [file, digest] : digests.front()) ok &= digest != "record mismatch";
    }
    stable += ok;
    if (!ok) failures += " [" + c + "]";
  }
  fs::remove_all(scratch);
  return {stable == commands.size(),
          fmt("%zu/%zu command configurations give identical CSV digests over reruns and --threads 1/3/0%s", stable,
              commands.size(), failures.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string tool = argc > 1 ? argv[1] : "";
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "3-SAT reduction to detection", 60.0, reduction_3sat},
      {2, "Max-Weighted-SAT reduction to strategy", 10.0, reduction_maxwsat},
      {3, "vertex cover reduction to punishment", 60.0, reduction_vc},
      {4, "solver agreement on the duopoly", 0.0, solver_agreement},
      {5, "discount threshold gate", 10.0, delta_gate},
      {6, "three regimes across capacity", 900.0, regimes},
      {7, "transparency and ambiguity", 300.0, transparency},
      {8, "probabilistic detection gate", 60.0, alpha_gate},
      {9, "two-tier adoption", 120.0, tiers},
      {10, "determinism", 0.0, [&] { return determinism(tool); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.limit_seconds <= 0.0 || secs < c.limit_seconds;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::string timing = fmt("%.2f s", secs);
    if (c.limit_seconds > 0.0) timing += fmt(" (limit %.0f s)", c.limit_seconds);
    std::printf("[%s] %2d %s: %s; %s\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), timing.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
