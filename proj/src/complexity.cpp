#include "collusion/complexity.hpp"

#include <algorithm>
#include <cmath>

#include "collusion/equilibria.hpp"
#include "collusion/error.hpp"
#include "collusion/parallel.hpp"
#include "overloaded.hpp"

namespace collusion {

std::string to_string(const CapacityBudget& budget) {
  return budget.max_nodes ? std::to_string(*budget.max_nodes) : "unlimited";
}

std::string to_string(Answer answer) {
  switch (answer) {
    case Answer::kYes:
      return "yes";
    case Answer::kNo:
      return "no";
    case Answer::kUnknown:
      break;
  }
  return "unknown";
}

namespace {

bool same_prices(const PriceVector& a, const PriceVector& b) {
  if (a.firms() != b.firms() || a.products() != b.products()) return false;
  for (std::size_t j = 0; j < a.size(); ++j)
    if (std::abs(a.values()[j] - b.values()[j]) > 1e-9 * std::max(1.0, std::abs(b.values()[j]))) return false;
  return true;
}

bool residuals_within(const QuantityMatrix& q, const QuantityMatrix& predicted, double bound, NoiseMatrix& residuals) {
  residuals = NoiseMatrix(q.firms(), q.products());
  bool ok = true;
  for (std::size_t j = 0; j < q.size(); ++j) {
    const double r = q.values()[j] - predicted.values()[j];
    residuals.values()[j] = r;
    if (!(std::abs(r) < bound)) ok = false;
  }
  return ok;
}

// --- CSP -------------------------------------------------------------------

std::vector<std::vector<double>> csp_levels(const MarketGame& game, const CspPayload& payload) {
  if (!payload.price_levels.empty()) {
    if (payload.price_levels.size() != game.products())
      throw ValidationError("price grid lists " + std::to_string(payload.price_levels.size()) + " products, game has " +
                            std::to_string(game.products()));
    for (const auto& levels : payload.price_levels)
      if (levels.empty()) throw ValidationError("price grid has a product with no levels");
    return payload.price_levels;
  }
  if (const auto* w = std::get_if<WeightedClauseProfitDemand>(&game.demand)) {
    std::vector<std::vector<double>> levels(w->num_vars, std::vector<double>{0.0, 1.0});
    levels.push_back({1.0});
    return levels;
  }
  throw ValidationError("missing grid spec: the game has continuous prices and no candidate price levels");
}

// --- CDP -------------------------------------------------------------------

// Per-product demand when its clause holds and when it fails.
struct ClauseLevels {
  const std::vector<Clause>* clauses = nullptr;
  std::vector<double> unsat;
  std::vector<double> sat;
};

std::optional<ClauseLevels> clause_levels(const MarketGame& game, const PriceVector& p) {
  if (!std::holds_alternative<BitVectorStates>(game.states)) return std::nullopt;
  const std::size_t nk = game.products();
  ClauseLevels out;
  if (const auto* ci = std::get_if<ClauseIndicatorDemand>(&game.demand)) {
    if (ci->clauses.size() != nk) return std::nullopt;
    out.clauses = &ci->clauses;
    out.unsat.assign(nk, ci->baseline);
    out.sat.assign(nk, ci->baseline + 1.0);
    return out;
  }
  if (const auto* lin = std::get_if<LinearDemand>(&game.demand)) {
    const auto* shifted = std::get_if<ClauseShiftedIntercepts>(&lin->intercepts);
    if (!shifted || shifted->clauses.size() != nk) return std::nullopt;
    out.clauses = &shifted->clauses;
    out.unsat.resize(nk);
    out.sat.resize(nk);
    const auto& pv = p.values();
    for (std::size_t j = 0; j < nk; ++j) {
      double v = shifted->base[j] - lin->own_slope * pv[j];
      for (std::size_t l = 0; l < nk; ++l)
        if (l != j) v += lin->cross[j * nk + l] * pv[l];
      out.unsat[j] = v;
      out.sat[j] = v + shifted->shift;
    }
    return out;
  }
  return std::nullopt;
}

class CdpSearch {
 public:
  CdpSearch(const MarketGame& game, const StrategyProfile& profile, const Observation& obs, double bound,
            const CapacityBudget& budget)
      : game_(game), profile_(profile), obs_(obs), bound_(bound), budget_(budget) {}

  Verdict run() {
    if (profile_.is_pooling() && !same_prices(profile_.prices(0), obs_.prices)) {
      // Prices are state independent, so a mismatch refutes every state at once.
      if (!budget_.allows(0)) return finish(Answer::kUnknown);
      nodes_ = 1;
      return finish(Answer::kNo);
    }
    const auto levels = clause_levels(game_, obs_.prices);
    if (levels) return run_clauses(*levels);
    return run_enumeration();
  }

 private:
  Verdict finish(Answer a) {
    Verdict v;
    v.answer = a;
    v.nodes_expanded = nodes_;
    if (a == Answer::kYes) v.certificate = CdpCertificate{*found_state_, found_residuals_};
    return v;
  }

  bool check_leaf(const DemandState& state) {
    const auto& sigma = profile_.prices(game_, state);
    if (!same_prices(sigma, obs_.prices)) return false;
    NoiseMatrix residuals;
    if (!residuals_within(obs_.quantities, eval_demand(game_, obs_.prices, state), bound_, residuals)) return false;
    found_state_ = state;
    found_residuals_ = std::move(residuals);
    return true;
  }

  Verdict run_enumeration() {
    const std::size_t m = enumerable_state_count(game_);
    for (std::size_t s = 0; s < m; ++s) {
      if (!budget_.allows(nodes_)) return finish(Answer::kUnknown);
      ++nodes_;
      if (check_leaf(state_at(game_, s))) return finish(Answer::kYes);
    }
    return finish(Answer::kNo);
  }

  Verdict run_clauses(const ClauseLevels& levels) {
    n_ = std::get<BitVectorStates>(game_.states).num_vars;
    const auto& q = obs_.quantities.values();
    bool impossible = false;
    std::vector<const Clause*> must_sat, must_unsat;
    for (std::size_t j = 0; j < q.size(); ++j) {
      const bool sat_ok = std::abs(q[j] - levels.sat[j]) < bound_;
      const bool unsat_ok = std::abs(q[j] - levels.unsat[j]) < bound_;
      const Clause& c = (*levels.clauses)[j];
      for (Literal lit : c)
        if (lit == 0 || static_cast<std::size_t>(std::abs(lit)) > n_)
          throw ValidationError("clause literal " + std::to_string(lit) + " outside x1..x" + std::to_string(n_));
      if (!sat_ok && !unsat_ok) impossible = true;
      else if (sat_ok && !unsat_ok) must_sat.push_back(&c);
      else if (!sat_ok && unsat_ok) must_unsat.push_back(&c);
    }
    // Index constraints by the variable whose assignment can first trigger them.
    sat_by_last_.assign(n_ + 1, {});
    unsat_by_var_.assign(n_, {});
    for (const Clause* c : must_sat) {
      std::size_t last = 0;
      for (Literal lit : *c) last = std::max(last, static_cast<std::size_t>(std::abs(lit)));
      sat_by_last_[last].push_back(c);  // last == 0 only for the empty clause
    }
    for (const Clause* c : must_unsat)
      for (Literal lit : *c) unsat_by_var_[static_cast<std::size_t>(std::abs(lit)) - 1].push_back(c);
    impossible_ = impossible;
    assignment_.assign(n_, 0);
    const bool found = visit(0);
    if (found) return finish(Answer::kYes);
    return finish(exhausted_ ? Answer::kUnknown : Answer::kNo);
  }

  bool conflict(std::size_t depth) const {
    if (depth == 0) return impossible_ || !sat_by_last_[0].empty();
    const std::size_t var = depth - 1;
    const std::span<const std::uint8_t> partial(assignment_.data(), depth);
    for (const Clause* c : sat_by_last_[depth])
      if (!clause_satisfied(*c, partial)) return true;
    for (const Clause* c : unsat_by_var_[var])
      for (Literal lit : *c)
        if (static_cast<std::size_t>(std::abs(lit)) - 1 == var && literal_true(lit, partial)) return true;
    return false;
  }

  bool visit(std::size_t depth) {
    if (!budget_.allows(nodes_)) {
      exhausted_ = true;
      return false;
    }
    ++nodes_;
    if (conflict(depth)) return false;
    if (depth == n_) return check_leaf(DemandState::from_assignment(assignment_));
    for (std::uint8_t bit : {std::uint8_t{0}, std::uint8_t{1}}) {
      assignment_[depth] = bit;
      if (visit(depth + 1)) return true;
      if (exhausted_) return false;
    }
    assignment_[depth] = 0;
    return false;
  }

  const MarketGame& game_;
  const StrategyProfile& profile_;
  const Observation& obs_;
  double bound_;
  CapacityBudget budget_;
  std::size_t nodes_ = 0;
  bool exhausted_ = false;
  bool impossible_ = false;
  std::size_t n_ = 0;
  Assignment assignment_;
  std::vector<std::vector<const Clause*>> sat_by_last_;
  std::vector<std::vector<const Clause*>> unsat_by_var_;
  std::optional<DemandState> found_state_;
  NoiseMatrix found_residuals_;
};

void check_observation(const MarketGame& game, const Observation& obs) {
  for (const auto* m : {&obs.prices, &obs.quantities})
    if (m->firms() != game.n_firms || m->products() != game.products_per_firm)
      throw ValidationError("observation is " + std::to_string(m->firms()) + "x" + std::to_string(m->products()) +
                            ", game is " + std::to_string(game.n_firms) + "x" +
                            std::to_string(game.products_per_firm));
}

// --- OPP -------------------------------------------------------------------

double deviator_best_payoff(const MarketGame& game, std::size_t deviator, const PriceVector& prices) {
  if (const auto* edge = std::get_if<EdgeComplementarityDemand>(&game.demand)) {
    PriceVector p = prices;
    for (std::size_t k = 0; k < game.products_per_firm; ++k) p(deviator, k) = edge->reservation_price;
    return expected_firm_profit(game, deviator, p, state_distribution(game));
  }
  if (std::holds_alternative<LinearDemand>(game.demand)) {
    const auto states = state_distribution(game);
    PriceVector p = prices;
    const auto br = solve_cbr(game, deviator, p, states);
    for (std::size_t k = 0; k < br.size(); ++k) p(deviator, k) = br[k];
    return expected_firm_profit(game, deviator, p, states);
  }
  throw ValidationError("punishment search supports edge-complementarity and linear demand only");
}

}  // namespace

double detection_noise_bound(const MarketGame& game) {
  if (game.noise_bound) return *game.noise_bound;
  if (game.noise_variance <= 0.0) return 1e-9;
  throw ValidationError("detection needs a noise bound when noise is unbounded");
}

Verdict decide_csp(const DecisionInstance& instance, const CapacityBudget& budget) {
  const auto* payload = std::get_if<CspPayload>(&instance.payload);
  if (!payload) throw ValidationError("instance is not a strategy-problem instance");
  const auto& game = instance.game;
  if (std::isnan(payload->target)) throw ValidationError("target profit is NaN");

  if (payload->target == -std::numeric_limits<double>::infinity()) {
    PriceVector p(game.n_firms, game.products_per_firm);
    try {
      const auto levels = csp_levels(game, *payload);
      for (std::size_t j = 0; j < levels.size(); ++j) p.values()[j] = levels[j].front();
    } catch (const ValidationError&) {
    }
    Verdict v;
    v.answer = Answer::kYes;
    v.certificate = CspCertificate{p, expected_joint_profit(game, p).value};
    return v;
  }

  const auto levels = csp_levels(game, *payload);
  std::vector<std::size_t> idx(levels.size(), 0);
  Verdict v;
  PriceVector p(game.n_firms, game.products_per_firm);
  const double tol = 1e-12 * std::max(1.0, std::abs(payload->target));
  while (true) {
    if (!budget.allows(v.nodes_expanded)) {
      v.answer = Answer::kUnknown;
      return v;
    }
    ++v.nodes_expanded;
    for (std::size_t j = 0; j < levels.size(); ++j) p.values()[j] = levels[j][idx[j]];
    const double value = expected_joint_profit(game, p).value;
    if (value >= payload->target - tol) {
      v.answer = Answer::kYes;
      v.certificate = CspCertificate{p, value};
      return v;
    }
    std::size_t d = levels.size();
    bool done = true;
    while (d > 0) {
      --d;
      if (++idx[d] < levels[d].size()) {
        done = false;
        break;
      }
      idx[d] = 0;
    }
    if (done) break;
  }
  v.answer = Answer::kNo;
  return v;
}

Verdict decide_cdp(const MarketGame& game, const StrategyProfile& profile, const Observation& observation,
                   double noise_bound, const CapacityBudget& budget) {
  check_observation(game, observation);
  if (!(noise_bound > 0.0)) throw ValidationError("noise bound must be positive");
  const auto& first = profile.prices(0);
  if (first.firms() != game.n_firms || first.products() != game.products_per_firm)
    throw ValidationError("profile dimensions do not match the game");
  if (!profile.is_pooling() && profile.table_size() != enumerable_state_count(game))
    throw ValidationError("profile undefined on some state");
  return CdpSearch(game, profile, observation, noise_bound, budget).run();
}

Verdict decide_cdp(const DecisionInstance& instance, const CapacityBudget& budget) {
  const auto* payload = std::get_if<CdpPayload>(&instance.payload);
  if (!payload) throw ValidationError("instance is not a detection-problem instance");
  payload->profile.check(instance.game);
  return decide_cdp(instance.game, payload->profile, payload->observation, payload->noise_bound, budget);
}

Verdict decide_opp(const DecisionInstance& instance, const CapacityBudget& budget) {
  const auto* payload = std::get_if<OppPayload>(&instance.payload);
  if (!payload) throw ValidationError("instance is not a punishment-problem instance");
  const auto& game = instance.game;
  if (payload->deviator >= game.n_firms) throw ValidationError("deviator index out of range");
  if (!payload->profile.is_pooling())
    throw ValidationError("punishment search needs a pooling profile for the passive prices");
  payload->profile.check(game);
  std::vector<std::size_t> punishers;
  for (std::size_t i = 0; i < game.n_firms; ++i)
    if (i != payload->deviator) punishers.push_back(i);
  if (payload->max_punishers > punishers.size())
    throw ValidationError("punisher budget k = " + std::to_string(payload->max_punishers) + " exceeds the " +
                          std::to_string(punishers.size()) + " available punishers");

  Verdict v;
  const PriceVector& passive = payload->profile.prices(0);
  const double tol = 1e-12 * std::max(1.0, std::abs(payload->payoff_bound));
  for (std::size_t size = 0; size <= payload->max_punishers; ++size) {
    // Combinations of `size` punishers in lexicographic order.
    std::vector<std::size_t> pick(size);
    for (std::size_t t = 0; t < size; ++t) pick[t] = t;
    while (true) {
      if (!budget.allows(v.nodes_expanded)) {
        v.answer = Answer::kUnknown;
        return v;
      }
      ++v.nodes_expanded;
      PriceVector p = passive;
      std::vector<std::size_t> aggressive;
      for (std::size_t t : pick) {
        aggressive.push_back(punishers[t]);
        for (std::size_t k = 0; k < game.products_per_firm; ++k) p(punishers[t], k) = payload->aggressive_price;
      }
      const double payoff = deviator_best_payoff(game, payload->deviator, p);
      if (payoff <= payload->payoff_bound + tol) {
        v.answer = Answer::kYes;
        v.certificate = OppCertificate{std::move(aggressive), payoff};
        return v;
      }
      std::size_t t = size;
      bool advanced = false;
      while (t > 0) {
        --t;
        if (pick[t] < punishers.size() - size + t) {
          ++pick[t];
          for (std::size_t u = t + 1; u < size; ++u) pick[u] = pick[u - 1] + 1;
          advanced = true;
          break;
        }
      }
      if (!advanced) break;
    }
  }
  v.answer = Answer::kNo;
  return v;
}

Verdict decide(const DecisionInstance& instance, const CapacityBudget& budget) {
  return std::visit(Overloaded{[&](const CspPayload&) { return decide_csp(instance, budget); },
                               [&](const CdpPayload&) { return decide_cdp(instance, budget); },
                               [&](const OppPayload&) { return decide_opp(instance, budget); }},
                    instance.payload);
}

// --- reductions ------------------------------------------------------------

DecisionInstance reduce_maxwsat_to_csp(const WeightedCnf& formula, double target) {
  if (formula.clauses.empty()) throw ValidationError("empty formula: no clauses");
  if (formula.weights.size() != formula.clauses.size())
    throw ValidationError("weighted formula needs one weight per clause");
  for (double w : formula.weights)
    if (!(w > 0.0)) throw ValidationError("clause weights must be positive");
  check_literals(formula);

  MarketGame g;
  g.n_firms = formula.num_vars + 1;
  g.products_per_firm = 1;
  g.demand = WeightedClauseProfitDemand{formula.num_vars, formula.clauses, formula.weights};
  const double m = static_cast<double>(formula.clauses.size());
  g.states = ExplicitStates{std::vector<double>(formula.clauses.size(), 1.0 / m)};
  g.costs.assign(g.n_firms, LinearCost{{0.0}});
  g.discount = 0.95;
  return {std::move(g), CspPayload{target, {}}};
}

Cnf pad_to_three(const Cnf& formula) {
  Cnf out = formula;
  for (auto& c : out.clauses) {
    if (c.size() > 3) throw ValidationError("clause with " + std::to_string(c.size()) + " literals (more than 3)");
    while (!c.empty() && c.size() < 3) c.push_back(c.back());
  }
  return out;
}

DecisionInstance reduce_3sat_to_cdp(const Cnf& formula, const CdpReductionOptions& options) {
  check_literals(formula);
  const Cnf padded = pad_to_three(formula);
  if (padded.clauses.empty()) throw ValidationError("empty formula: no clauses");
  const std::size_t m = padded.clauses.size();

  MarketGame g;
  g.n_firms = m;
  g.products_per_firm = 1;
  g.demand = ClauseIndicatorDemand{padded.clauses, options.baseline};
  g.states = BitVectorStates{padded.num_vars};
  g.noise_variance = 0.04;
  g.noise_bound = 0.5;
  g.costs.assign(m, LinearCost{{0.0}});
  g.discount = 0.95;

  CdpPayload payload;
  payload.profile = StrategyProfile::pooling(PriceVector(m, 1, options.common_price));
  payload.observation = Observation{PriceVector(m, 1, options.common_price), QuantityMatrix(m, 1, options.baseline + 1.0)};
  payload.noise_bound = 0.5;
  return {std::move(g), std::move(payload)};
}

DecisionInstance reduce_vc_to_opp(const Graph& graph, std::size_t k) {
  MarketGame g;
  g.n_firms = graph.num_vertices() + 1;
  g.products_per_firm = 1;
  g.demand = EdgeComplementarityDemand{graph, 1.0};
  g.states = ExplicitStates{{1.0}};
  g.costs.assign(g.n_firms, LinearCost{{0.0}});
  g.discount = 0.95;

  OppPayload payload;
  payload.deviator = 0;
  payload.profile = StrategyProfile::pooling(PriceVector(g.n_firms, 1, 1.0));
  payload.payoff_bound = 0.0;
  payload.max_punishers = k;
  payload.aggressive_price = 0.0;
  return {std::move(g), std::move(payload)};
}

// --- empirical detection ---------------------------------------------------

DeviationGenerator fixed_price_deviation(std::size_t firm, std::vector<double> price) {
  return [firm, price = std::move(price)](const PriceVector& compliant, const DemandState&, Rng&) {
    if (firm >= compliant.firms() || price.size() != compliant.products())
      throw ValidationError("deviation does not fit the price matrix");
    PriceVector p = compliant;
    for (std::size_t k = 0; k < price.size(); ++k) p(firm, k) = price[k];
    return p;
  };
}

namespace {

struct Trial {
  Observation observation;
  bool deviated = false;
};

Trial draw_once(const MarketGame& game, const StrategyProfile& profile, const DeviationGenerator* deviation,
                std::uint64_t seed) {
  Rng rng = make_rng(seed);
  const DemandState state = sample_state(game, rng);
  const NoiseMatrix eps = sample_noise(rng, game);
  Trial t;
  t.observation.prices = profile.prices(game, state);
  if (deviation) {
    PriceVector p = (*deviation)(t.observation.prices, state, rng);
    t.deviated = !same_prices(p, t.observation.prices);
    t.observation.prices = std::move(p);
  }
  t.observation.quantities = eval_demand(game, t.observation.prices, state, eps);
  return t;
}

// A deviation generator may leave some states alone; redraw until the prices
// actually move, giving up after a fixed number of attempts.
Trial draw_trial(const MarketGame& game, const StrategyProfile& profile, const DeviationGenerator* deviation,
                 std::uint64_t seed) {
  Trial t = draw_once(game, profile, deviation, seed);
  for (std::uint64_t attempt = 1; deviation && !t.deviated && attempt < 64; ++attempt)
    t = draw_once(game, profile, deviation, derive_seed(seed, attempt));
  return t;
}

}  // namespace

DetectionStats detection_statistics(const MarketGame& game, const StrategyProfile& profile,
                                    const CapacityBudget& budget, std::size_t trials,
                                    const DeviationGenerator& deviation, std::uint64_t seed) {
  if (trials == 0) throw ValidationError("detection accuracy needs at least one trial");
  const double bound = detection_noise_bound(game);
  std::vector<std::uint8_t> flagged(trials, 0), deviated(trials, 0);
  parallel_for(trials, [&](std::size_t t) {
    const Trial trial =
        draw_trial(game, profile, t % 2 == 1 ? &deviation : nullptr, derive_seed(seed, stream::kTrial, t));
    deviated[t] = trial.deviated;
    flagged[t] = decide_cdp(game, profile, trial.observation, bound, budget).answer == Answer::kNo;
  });
  DetectionStats stats;
  stats.trials = trials;
  std::size_t correct = 0, deviations = 0, detected = 0, alarms = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const bool deviate = deviated[t] != 0;
    if (deviate) {
      ++deviations;
      detected += flagged[t];
    } else {
      alarms += flagged[t];
    }
    correct += (flagged[t] != 0) == deviate;
  }
  const std::size_t compliant = trials - deviations;
  stats.accuracy = static_cast<double>(correct) / static_cast<double>(trials);
  stats.detection_rate = deviations ? static_cast<double>(detected) / static_cast<double>(deviations) : 0.0;
  stats.false_alarm_rate = compliant ? static_cast<double>(alarms) / static_cast<double>(compliant) : 0.0;
  return stats;
}

double detection_accuracy(const MarketGame& game, const StrategyProfile& profile, const CapacityBudget& budget,
                          std::size_t trials, const DeviationGenerator& deviation, std::uint64_t seed) {
  return detection_statistics(game, profile, budget, trials, deviation, seed).accuracy;
}

std::vector<std::size_t> deviation_search_costs(const MarketGame& game, const StrategyProfile& profile,
                                                const DeviationGenerator& deviation, std::size_t samples,
                                                std::uint64_t seed) {
  const double bound = detection_noise_bound(game);
  std::vector<std::size_t> costs(samples, kNeverDetected);
  parallel_for(samples, [&](std::size_t t) {
    const Trial trial = draw_trial(game, profile, &deviation, derive_seed(seed, stream::kCandidate, t));
    if (!trial.deviated) return;
    const Verdict v = decide_cdp(game, profile, trial.observation, bound);
    if (v.answer == Answer::kNo) costs[t] = v.nodes_expanded;
  });
  return costs;
}

double detected_fraction(std::span<const std::size_t> costs, const CapacityBudget& budget) {
  if (costs.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t c : costs)
    if (c != kNeverDetected && (budget.is_unlimited() || c <= *budget.max_nodes)) ++hit;
  return static_cast<double>(hit) / static_cast<double>(costs.size());
}

ComplexityIndexResult estimate_complexity_index(const FamilyGenerator& family, std::span<const std::size_t> sizes,
                                                const BudgetSchedule& schedule, std::size_t trials, double floor,
                                                std::uint64_t seed) {
  ComplexityIndexResult out;
  for (std::size_t size : sizes) {
    const FamilyInstance inst = family(size, derive_seed(seed, stream::kInstance, size));
    const double acc = detection_accuracy(inst.game, inst.profile, schedule(size), trials, inst.deviation,
                                          derive_seed(seed, stream::kTrial, size));
    out.accuracy_by_size.emplace_back(size, acc);
    if (acc <= floor) {
      out.index = size;
      break;
    }
  }
  return out;
}

}  // namespace collusion
