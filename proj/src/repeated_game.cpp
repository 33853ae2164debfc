#include "collusion/repeated_game.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <tuple>

#include "collusion/equilibria.hpp"
#include "collusion/error.hpp"
#include "collusion/parallel.hpp"
#include "overloaded.hpp"

namespace collusion {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool rows_equal(const PriceVector& a, const PriceVector& b, std::size_t firm) {
  for (std::size_t k = 0; k < a.products(); ++k)
    if (std::abs(a(firm, k) - b(firm, k)) > 1e-12 * std::max(1.0, std::abs(b(firm, k)))) return false;
  return true;
}

double firm_profit_at(const MarketGame& game, std::size_t firm, const PriceVector& p, const DemandState& state) {
  return eval_profit(game, firm, p, eval_demand(game, p, state));
}

// Firm's prices replaced by `price`, or by its best response in `state`.
PriceVector with_row(const MarketGame& game, const PriceVector& base, std::size_t firm,
                     const std::optional<std::vector<double>>& price, const DemandState& state) {
  PriceVector p = base;
  if (price) {
    if (price->size() != game.products_per_firm) throw ValidationError("deviation price has the wrong length");
    for (std::size_t k = 0; k < price->size(); ++k) p(firm, k) = (*price)[k];
  } else {
    const auto br = solve_cbr(game, firm, base, single_state(state));
    for (std::size_t k = 0; k < br.size(); ++k) p(firm, k) = br[k];
  }
  return p;
}

double mean_of(std::span<const double> v) {
  if (v.empty()) return kNaN;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double standard_error(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

double firm_markup(const MarketGame& game, const PriceVector& p, std::size_t firm) {
  const auto* lin = std::get_if<LinearCost>(&game.costs.at(firm));
  if (!lin) return kNaN;
  double total = 0.0;
  for (std::size_t k = 0; k < game.products_per_firm; ++k) {
    const double c = lin->marginal[k];
    if (!(c > 0.0)) return kNaN;
    total += (p(firm, k) - c) / c;
  }
  return total / static_cast<double>(game.products_per_firm);
}

}  // namespace

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::kCollusive:
      return "collusive";
    case Phase::kPunishment:
      return "punishment";
    case Phase::kCollapsed:
      break;
  }
  return "collapsed";
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::kCompetitive:
      return "competitive";
    case Regime::kUnstable:
      return "unstable";
    case Regime::kCollusive:
      break;
  }
  return "collusive";
}

Scenario make_scenario(MarketGame game) {
  Scenario s;
  s.collusive = collusive_profile(game);
  s.competitive = competitive_profile(game);
  s.game = std::move(game);
  return s;
}

double mean_markup(const MarketGame& game, const PriceVector& prices) {
  double total = 0.0;
  for (std::size_t i = 0; i < game.n_firms; ++i) total += firm_markup(game, prices, i);
  return total / static_cast<double>(game.n_firms);
}

double SimTrace::normalized_markup() const {
  const double span = monopoly_markup - competitive_markup;
  if (!(std::abs(span) > 1e-12)) return kNaN;
  return (mean_markup - competitive_markup) / span;
}

SimTrace run_simulation(const Scenario& scenario, const std::vector<FirmPolicy>& policies, std::size_t horizon,
                        std::uint64_t seed, const SimulationOptions& options) {
  const MarketGame& game = scenario.game;
  if (policies.size() != game.n_firms)
    throw ValidationError("got " + std::to_string(policies.size()) + " policies for " +
                          std::to_string(game.n_firms) + " firms");
  if (horizon == 0) throw ValidationError("horizon must be at least one period");
  scenario.collusive.check(game);
  scenario.competitive.check(game);
  if (options.tester && options.tester->firm >= game.n_firms) throw ValidationError("tester firm out of range");

  // Trigger firms sharing a detector configuration reach the same verdict, so
  // each configuration runs once per period.
  struct Group {
    DetectionMode mode;
    CapacityBudget capacity;
    std::size_t punishment_length = 10;
    std::vector<std::size_t> firms;
  };
  std::vector<Group> groups;
  {
    std::map<std::tuple<int, double, std::optional<std::size_t>, std::size_t>, std::size_t> index;
    for (std::size_t i = 0; i < policies.size(); ++i) {
      const auto* trig = std::get_if<CollusiveTrigger>(&policies[i]);
      if (!trig) continue;
      if (trig->punishment_length == 0) throw ValidationError("punishment length must be at least one period");
      if (trig->detection.alpha < 0.0 || trig->detection.alpha > 1.0)
        throw ValidationError("detection probability outside [0,1]");
      const auto key = std::make_tuple(static_cast<int>(trig->detection.kind), trig->detection.alpha,
                                       trig->capacity.max_nodes, trig->punishment_length);
      auto [it, fresh] = index.emplace(key, groups.size());
      if (fresh) groups.push_back({trig->detection, trig->capacity, trig->punishment_length, {}});
      groups[it->second].firms.push_back(i);
    }
  }
  const bool needs_search = std::any_of(groups.begin(), groups.end(),
                                        [](const Group& g) { return g.mode.kind != DetectionKind::kBernoulli; });
  const double bound = needs_search ? detection_noise_bound(game) : 0.0;

  SimTrace trace;
  trace.discounted_payoffs.assign(game.n_firms, 0.0);
  trace.firm_mean_markup.assign(game.n_firms, 0.0);
  Phase phase = Phase::kCollusive;
  std::size_t remaining = 0;
  double discount = 1.0;
  double markup_sum = 0.0, competitive_sum = 0.0, monopoly_sum = 0.0;
  std::size_t collusive_periods = 0, punishment_periods = 0;

  for (std::size_t t = 1; t <= horizon; ++t) {
    Rng state_rng = make_rng(derive_seed(seed, stream::kState, t));
    const DemandState state = sample_state(game, state_rng);
    const std::size_t sidx = state_index(game, state);
    const NoiseMatrix eps = sample_noise(derive_seed(seed, stream::kNoise, t), game);

    const PriceVector& path =
        phase == Phase::kCollusive ? scenario.collusive.prices(sidx) : scenario.competitive.prices(sidx);
    PriceVector p = path;
    std::vector<std::uint8_t> off_path(game.n_firms, 0);

    for (std::size_t i = 0; i < game.n_firms; ++i) {
      const auto* dev = std::get_if<Deviator>(&policies[i]);
      if (!dev || t < dev->start || t - dev->start >= dev->duration) continue;
      const PriceVector moved = with_row(game, path, i, dev->price, state);
      for (std::size_t k = 0; k < game.products_per_firm; ++k) p(i, k) = moved(i, k);
      off_path[i] = !rows_equal(p, path, i);
    }

    bool probe = false;
    if (options.tester && phase == Phase::kCollusive && options.tester->probe_rate > 0.0) {
      const Tester& tester = *options.tester;
      Rng probe_rng = make_rng(derive_seed(seed, stream::kTesting, t));
      if (uniform01(probe_rng) < tester.probe_rate && !off_path[tester.firm]) {
        const PriceVector moved = with_row(game, path, tester.firm, tester.price, state);
        if (firm_profit_at(game, tester.firm, moved, state) >
            firm_profit_at(game, tester.firm, path, state) + 1e-12) {
          p = moved;
          off_path[tester.firm] = !rows_equal(p, path, tester.firm);
          probe = off_path[tester.firm] != 0;
        }
      }
    }

    const QuantityMatrix q = eval_demand(game, p, state, eps);
    std::vector<double> profits(game.n_firms);
    for (std::size_t i = 0; i < game.n_firms; ++i) profits[i] = eval_profit(game, i, p, q);
    const bool deviation = std::any_of(off_path.begin(), off_path.end(), [](auto b) { return b != 0; });

    std::vector<DetectionEvent> events;
    std::size_t punish_for = 0;
    if (phase == Phase::kCollusive) {
      const Observation obs{p, q};
      for (std::size_t g = 0; g < groups.size(); ++g) {
        const Group& group = groups[g];
        auto watcher = std::find_if(group.firms.begin(), group.firms.end(), [&](std::size_t i) { return !off_path[i]; });
        if (watcher == group.firms.end()) continue;
        DetectionEvent ev;
        ev.firm = *watcher;
        if (group.mode.kind == DetectionKind::kBernoulli) {
          Rng det_rng = make_rng(derive_seed(seed, stream::kDetection, t, g));
          const bool caught = deviation && uniform01(det_rng) < group.mode.alpha;
          ev.verdict = caught ? Answer::kNo : Answer::kYes;
        } else {
          const CapacityBudget budget =
              group.mode.kind == DetectionKind::kOracle ? CapacityBudget::unlimited() : group.capacity;
          const Verdict v = decide_cdp(game, scenario.collusive, obs, bound, budget);
          ev.verdict = v.answer;
          ev.nodes = v.nodes_expanded;
        }
        if (ev.verdict == Answer::kNo) punish_for = std::max(punish_for, group.punishment_length);
        events.push_back(ev);
      }
    }

    const double markup = mean_markup(game, p);
    const double comp = mean_markup(game, scenario.competitive.prices(sidx));
    const double mono = mean_markup(game, scenario.collusive.prices(sidx));
    markup_sum += markup;
    competitive_sum += comp;
    monopoly_sum += mono;
    for (std::size_t i = 0; i < game.n_firms; ++i) {
      trace.discounted_payoffs[i] += discount * profits[i];
      trace.firm_mean_markup[i] += firm_markup(game, p, i);
    }
    discount *= game.discount;
    collusive_periods += phase == Phase::kCollusive;
    punishment_periods += phase == Phase::kPunishment;
    trace.deviation_verdicts += punish_for > 0;
    trace.probes += probe;

    if (options.record_periods) {
      PeriodRecord rec;
      rec.t = t;
      rec.state_index = sidx;
      rec.phase = phase;
      rec.punishment_remaining = phase == Phase::kPunishment ? remaining : 0;
      rec.prices = p;
      rec.quantities = q;
      rec.profits = std::move(profits);
      rec.detections = std::move(events);
      rec.deviation = deviation;
      rec.probe = probe;
      rec.markup = markup;
      rec.competitive_markup = comp;
      rec.monopoly_markup = mono;
      trace.periods.push_back(std::move(rec));
    }

    if (phase == Phase::kCollusive) {
      if (punish_for > 0) {
        phase = Phase::kPunishment;
        remaining = punish_for;
      } else if (probe && options.tester->collapse_if_undetected) {
        phase = Phase::kCollapsed;
      }
    } else if (phase == Phase::kPunishment) {
      if (remaining != kGrim && --remaining == 0) phase = Phase::kCollusive;
    }
  }

  const double n = static_cast<double>(horizon);
  trace.mean_markup = markup_sum / n;
  trace.competitive_markup = competitive_sum / n;
  trace.monopoly_markup = monopoly_sum / n;
  trace.collusive_share = static_cast<double>(collusive_periods) / n;
  trace.punishment_share = static_cast<double>(punishment_periods) / n;
  for (auto& m : trace.firm_mean_markup) m /= n;
  return trace;
}

// --- incentive gates -------------------------------------------------------

double punishment_weight(double delta, std::size_t length) {
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("discount outside (0,1): " + std::to_string(delta));
  if (length == kGrim) return delta / (1.0 - delta);
  return delta * (1.0 - std::pow(delta, static_cast<double>(length))) / (1.0 - delta);
}

double required_detection(double gain, double collusive, double punishment, double delta, std::size_t length) {
  const double stake = punishment_weight(delta, length) * (collusive - punishment);
  if (gain <= 0.0) return 0.0;
  if (!(stake > 0.0)) return std::numeric_limits<double>::infinity();
  return gain / stake;
}

double alpha_ic_margin(double collusive, double deviation, double punishment, double delta, double alpha) {
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("discount outside (0,1): " + std::to_string(delta));
  const double rhs = (1.0 - alpha) * deviation +
                     alpha * (deviation + delta / (1.0 - delta) * punishment) * ((1.0 - delta) / delta);
  return collusive - rhs;
}

bool check_alpha_ic(double collusive, double deviation, double punishment, double delta, double alpha) {
  return alpha_ic_margin(collusive, deviation, punishment, delta, alpha) >= 0.0;
}

std::optional<double> alpha_ic_threshold(double collusive, double deviation, double punishment, double alpha,
                                         double tol) {
  double lo = 1e-9, hi = 1.0 - 1e-9;
  const bool lo_holds = check_alpha_ic(collusive, deviation, punishment, lo, alpha);
  const bool hi_holds = check_alpha_ic(collusive, deviation, punishment, hi, alpha);
  if (lo_holds == hi_holds) return std::nullopt;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (check_alpha_ic(collusive, deviation, punishment, mid, alpha) == lo_holds)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// --- undetectable deviations ---------------------------------------------------

namespace {

struct StateGain {
  double gain = 0.0;
  double probability = 0.0;
  std::vector<std::uint8_t> profitable;
};

StateGain selective_gain(const MarketGame& game, const StrategyProfile& profile, std::size_t firm,
                         const std::optional<std::vector<double>>& price) {
  const std::size_t m = enumerable_state_count(game);
  StateGain out;
  out.profitable.assign(m, 0);
  for (std::size_t s = 0; s < m; ++s) {
    const DemandState state = state_at(game, s);
    const PriceVector& base = profile.prices(s);
    const PriceVector moved = with_row(game, base, firm, price, state);
    const double before = firm_profit_at(game, firm, base, state);
    const double delta = firm_profit_at(game, firm, moved, state) - before;
    if (delta > 1e-12 * std::max(1.0, std::abs(before))) {
      out.profitable[s] = 1;
      out.gain += state_probability(game, s) * delta;
      out.probability += state_probability(game, s);
    }
  }
  return out;
}

}  // namespace

DeviationGenerator selective_deviation(const MarketGame& game, const StrategyProfile& profile, std::size_t firm,
                                       std::vector<double> price) {
  auto table = std::make_shared<const std::vector<std::uint8_t>>(selective_gain(game, profile, firm, price).profitable);
  auto g = std::make_shared<const MarketGame>(game);
  return [g, table, firm, price = std::move(price)](const PriceVector& compliant, const DemandState& state, Rng&) {
    PriceVector p = compliant;
    if ((*table)[state_index(*g, state)])
      for (std::size_t k = 0; k < price.size(); ++k) p(firm, k) = price[k];
    return p;
  };
}

HullSearch evaluate_hull(const MarketGame& game, const StrategyProfile& profile, std::size_t firm,
                         std::uint64_t seed, const HullSearchOptions& options) {
  if (firm >= game.n_firms) throw ValidationError("firm index out of range");
  profile.check(game);
  if (profile.is_pooling()) throw ValidationError("degenerate hull: a pooling profile has a single price");
  const std::size_t m = profile.table_size();
  auto level = [&](std::size_t s) {
    double total = 0.0;
    for (double v : profile.firm_prices(firm, s)) total += v;
    return total;
  };
  std::size_t lo = 0, hi = 0;
  for (std::size_t s = 1; s < m; ++s) {
    if (level(s) < level(lo)) lo = s;
    if (level(s) > level(hi)) hi = s;
  }
  if (!(level(hi) - level(lo) > 1e-12)) throw ValidationError("degenerate hull: the firm's prices do not vary");

  HullSearch out;
  out.firm = firm;
  const auto a = profile.firm_prices(firm, lo);
  const auto b = profile.firm_prices(firm, hi);
  for (std::size_t g = 1; g <= options.grid_points; ++g) {
    const double lambda = static_cast<double>(g) / static_cast<double>(options.grid_points + 1);
    HullCandidate c;
    for (std::size_t k = 0; k < a.size(); ++k) c.price.push_back((1.0 - lambda) * a[k] + lambda * b[k]);
    c.lambda = {{lo, 1.0 - lambda}, {hi, lambda}};
    const StateGain sg = selective_gain(game, profile, firm, c.price);
    c.gain = sg.gain;
    c.deviation_probability = sg.probability;
    if (c.gain > 0.0) out.candidates.push_back(std::move(c));
  }
  std::stable_sort(out.candidates.begin(), out.candidates.end(),
                   [](const HullCandidate& x, const HullCandidate& y) { return x.gain > y.gain; });
  const std::size_t checked = std::min(options.top_candidates, out.candidates.size());
  out.candidates.resize(checked);
  for (std::size_t c = 0; c < checked; ++c) {
    auto& cand = out.candidates[c];
    cand.search_costs = deviation_search_costs(game, profile, selective_deviation(game, profile, firm, cand.price),
                                               options.samples, derive_seed(seed, stream::kCandidate, c));
  }
  return out;
}

UndetectableDeviation select_deviation(const HullSearch& search, const CapacityBudget& budget) {
  UndetectableDeviation out;
  if (!search.candidates.empty()) out.top_candidate_detection = detected_fraction(search.candidates.front().search_costs, budget);
  for (const auto& c : search.candidates) {
    const double undetected = 1.0 - detected_fraction(c.search_costs, budget);
    const double score = c.gain * undetected;
    if (score > out.score) {
      out.found = true;
      out.candidate = c;
      out.undetected_fraction = undetected;
      out.score = score;
    }
  }
  return out;
}

UndetectableDeviation find_undetectable_deviation(const MarketGame& game, const StrategyProfile& profile,
                                                  std::size_t firm, const CapacityBudget& budget,
                                                  std::uint64_t seed, const HullSearchOptions& options) {
  return select_deviation(evaluate_hull(game, profile, firm, seed, options), budget);
}

// --- testers and sweeps -------------------------------------------------------

TesterPlan plan_tester(const Scenario& scenario, std::size_t firm, std::optional<std::vector<double>> price,
                       double believed_detection, std::size_t punishment_length, double probe_rate,
                       bool probe_when_sustainable) {
  const MarketGame& game = scenario.game;
  if (firm >= game.n_firms) throw ValidationError("tester firm out of range");
  if (probe_rate < 0.0 || probe_rate > 1.0) throw ValidationError("probe rate outside [0,1]");
  TesterPlan plan;
  const StateGain sg = selective_gain(game, scenario.collusive, firm, price);
  plan.gain = sg.gain;
  plan.deviation_probability = sg.probability;
  plan.believed_detection = believed_detection;
  const double collusive = profile_payoff(game, firm, scenario.collusive);
  const double punishment = profile_payoff(game, firm, scenario.competitive);
  const double per_probe_gain = sg.probability > 0.0 ? sg.gain / sg.probability : 0.0;
  plan.required_detection = required_detection(per_probe_gain, collusive, punishment, game.discount, punishment_length);
  plan.sustainable = believed_detection >= plan.required_detection;
  plan.tester.firm = firm;
  plan.tester.price = std::move(price);
  plan.tester.probe_rate = (!plan.sustainable || probe_when_sustainable) ? probe_rate : 0.0;
  plan.tester.collapse_if_undetected = !plan.sustainable;
  return plan;
}

RegimeCurve sweep_capacity(const ScenarioFamily& family, std::span<const CapacityBudget> capacities,
                           std::size_t episodes, std::size_t horizon, std::uint64_t seed,
                           const SweepOptions& options) {
  if (capacities.empty()) throw ValidationError("capacity list is empty");
  if (episodes == 0) throw ValidationError("need at least one episode per capacity");
  for (std::size_t k = 1; k < capacities.size(); ++k) {
    const auto& a = capacities[k - 1];
    const auto& b = capacities[k];
    if (a.is_unlimited() || (!b.is_unlimited() && *b.max_nodes < *a.max_nodes))
      throw ValidationError("capacities must be sorted ascending with unlimited last");
  }
  const std::size_t nk = capacities.size();
  struct Cell {
    double normalized = 0.0, markup = 0.0, competitive = 0.0, monopoly = 0.0, accuracy = 0.0, collusive = 0.0,
           punishment = 0.0;
  };
  std::vector<Cell> cells(episodes * nk);

  parallel_for(episodes, [&](std::size_t e) {
    const std::uint64_t episode_seed = derive_seed(seed, stream::kEpisode, e);
    const Scenario sc = family(e, derive_seed(seed, stream::kInstance, e));
    const HullSearch hull =
        evaluate_hull(sc.game, sc.collusive, options.tester_firm, derive_seed(episode_seed, stream::kCandidate),
                      options.hull);
    for (std::size_t k = 0; k < nk; ++k) {
      const CapacityBudget& cap = capacities[k];
      std::vector<FirmPolicy> policies(sc.game.n_firms,
                                       CollusiveTrigger{cap, options.punishment_length, DetectionMode::budgeted()});
      SimulationOptions sim;
      sim.record_periods = false;
      const UndetectableDeviation dev = select_deviation(hull, cap);
      if (dev.found) sim.tester = Tester{options.tester_firm, dev.candidate.price, options.probe_rate, true};
      const SimTrace trace = run_simulation(sc, policies, horizon, episode_seed, sim);
      Cell& cell = cells[e * nk + k];
      cell.normalized = trace.normalized_markup();
      cell.markup = trace.mean_markup;
      cell.competitive = trace.competitive_markup;
      cell.monopoly = trace.monopoly_markup;
      cell.accuracy = 0.5 + 0.5 * dev.top_candidate_detection;
      cell.collusive = trace.collusive_share;
      cell.punishment = trace.punishment_share;
    }
  });

  RegimeCurve curve;
  std::vector<double> comp, mono;
  for (std::size_t e = 0; e < episodes; ++e) {
    comp.push_back(cells[e * nk].competitive);
    mono.push_back(cells[e * nk].monopoly);
  }
  curve.competitive_markup = mean_of(comp);
  curve.monopoly_markup = mean_of(mono);
  for (std::size_t k = 0; k < nk; ++k) {
    std::vector<double> norm, markup, acc, coll, pun;
    for (std::size_t e = 0; e < episodes; ++e) {
      const Cell& c = cells[e * nk + k];
      norm.push_back(c.normalized);
      markup.push_back(c.markup);
      acc.push_back(c.accuracy);
      coll.push_back(c.collusive);
      pun.push_back(c.punishment);
    }
    RegimePoint pt;
    pt.capacity = capacities[k];
    pt.mean_markup = mean_of(markup);
    pt.normalized_markup = mean_of(norm);
    pt.normalized_se = standard_error(norm);
    pt.detection_accuracy = mean_of(acc);
    pt.collusive_share = mean_of(coll);
    pt.punishment_share = mean_of(pun);
    pt.episodes = episodes;
    curve.points.push_back(pt);
  }
  return curve;
}

RegimeCurve sweep_capacity(const Scenario& scenario, std::span<const CapacityBudget> capacities,
                           std::size_t episodes, std::size_t horizon, std::uint64_t seed,
                           const SweepOptions& options) {
  return sweep_capacity([&](std::size_t, std::uint64_t) { return scenario; }, capacities, episodes, horizon, seed,
                        options);
}

RegimeClassification classify_regimes(const RegimeCurve& curve, double eps_low, double eps_high) {
  if (curve.points.empty()) throw ValidationError("regime curve is empty");
  if (!(std::abs(curve.monopoly_markup - curve.competitive_markup) > 1e-12))
    throw ValidationError("degenerate normalization: monopoly markup equals competitive markup");
  if (!(eps_low <= eps_high)) throw ValidationError("eps_low must not exceed eps_high");
  RegimeClassification out;
  for (const auto& pt : curve.points) {
    const double v = pt.normalized_markup;
    if (!out.s_star && v > eps_low) out.s_star = pt.capacity;
    if (!out.s_double_star && v >= eps_high) out.s_double_star = pt.capacity;
    out.labels.push_back(v >= eps_high ? Regime::kCollusive : v > eps_low ? Regime::kUnstable : Regime::kCompetitive);
  }
  return out;
}

// --- asymmetric adoption --------------------------------------------------------

TierReport scenario_asymmetric(const MarketGame& game, std::size_t ai_firms, const CapacityBudget& s_ai,
                               const CapacityBudget& s_traditional, std::size_t horizon, std::size_t episodes,
                               std::uint64_t seed) {
  (void)s_traditional;
  if (ai_firms == 0) throw ValidationError("the coalition needs at least one firm");
  if (ai_firms > game.n_firms) throw ValidationError("more coalition firms than firms");
  if (episodes == 0) throw ValidationError("need at least one episode");
  std::vector<std::uint8_t> mask(game.n_firms, 0);
  for (std::size_t i = 0; i < ai_firms; ++i) mask[i] = 1;
  Scenario sc;
  sc.game = game;
  sc.collusive = coalition_profile(game, mask);
  sc.competitive = competitive_profile(game);

  std::vector<FirmPolicy> policies;
  for (std::size_t i = 0; i < game.n_firms; ++i) {
    if (mask[i])
      policies.emplace_back(CollusiveTrigger{s_ai, 10, DetectionMode::budgeted()});
    else
      policies.emplace_back(MyopicCompetitive{});
  }

  TierReport report;
  report.ai_by_episode.assign(episodes, 0.0);
  if (ai_firms < game.n_firms) report.traditional_by_episode.assign(episodes, 0.0);
  parallel_for(episodes, [&](std::size_t e) {
    SimulationOptions sim;
    sim.record_periods = false;
    const SimTrace trace = run_simulation(sc, policies, horizon, derive_seed(seed, stream::kEpisode, e), sim);
    double ai = 0.0, trad = 0.0;
    for (std::size_t i = 0; i < game.n_firms; ++i) (mask[i] ? ai : trad) += trace.firm_mean_markup[i];
    report.ai_by_episode[e] = ai / static_cast<double>(ai_firms);
    if (ai_firms < game.n_firms)
      report.traditional_by_episode[e] = trad / static_cast<double>(game.n_firms - ai_firms);
  });
  report.ai_markup = mean_of(report.ai_by_episode);
  report.ai_se = standard_error(report.ai_by_episode);
  report.traditional_markup = mean_of(report.traditional_by_episode);
  report.traditional_se = standard_error(report.traditional_by_episode);
  return report;
}

}  // namespace collusion
