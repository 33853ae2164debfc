#include "collusion/market.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "collusion/error.hpp"
#include "overloaded.hpp"

namespace collusion {

namespace {

std::string dims(std::size_t a, std::size_t b) {
  return std::to_string(a) + "x" + std::to_string(b);
}

void check_matrix(const FirmProductMatrix& m, const MarketGame& game, const char* what) {
  if (m.firms() != game.n_firms)
    throw ValidationError(std::string(what) + ": firms axis has " + std::to_string(m.firms()) + ", expected " +
                          std::to_string(game.n_firms));
  if (m.products() != game.products_per_firm)
    throw ValidationError(std::string(what) + ": products axis has " + std::to_string(m.products()) +
                          ", expected " + std::to_string(game.products_per_firm));
}

std::size_t explicit_state_count(const MarketGame& game) {
  return std::get<ExplicitStates>(game.states).probabilities.size();
}

}  // namespace

FirmProductMatrix::FirmProductMatrix(std::size_t firms, std::size_t products, std::vector<double> values)
    : firms_(firms), products_(products), values_(std::move(values)) {
  if (values_.size() != firms * products)
    throw ValidationError("matrix of " + dims(firms, products) + " given " + std::to_string(values_.size()) +
                          " values");
}

DemandState DemandState::from_index(std::size_t index) {
  DemandState s;
  s.index_ = index;
  return s;
}

DemandState DemandState::from_assignment(Assignment bits) {
  DemandState s;
  s.is_assignment_ = true;
  s.bits_ = std::move(bits);
  return s;
}

std::size_t DemandState::index() const {
  if (is_assignment_) throw ValidationError("demand state is an assignment, not an index");
  return index_;
}

const Assignment& DemandState::assignment() const {
  if (!is_assignment_) throw ValidationError("demand state is an index, not an assignment");
  return bits_;
}

std::string to_string(const DemandState& state) {
  if (state.is_index()) return std::to_string(state.index());
  std::string s;
  for (auto b : state.assignment()) s.push_back(b ? '1' : '0');
  return s;
}

std::vector<double> LinearDemand::uniform_cross(std::size_t products, double beta) {
  std::vector<double> cross(products * products, 0.0);
  if (products < 2) return cross;
  const double each = beta / static_cast<double>(products - 1);
  for (std::size_t j = 0; j < products; ++j)
    for (std::size_t l = 0; l < products; ++l)
      if (j != l) cross[j * products + l] = each;
  return cross;
}

// --- state space --------------------------------------------------------

std::size_t enumerable_state_count(const MarketGame& game, std::size_t cap) {
  return std::visit(Overloaded{[](const ExplicitStates& s) { return s.probabilities.size(); },
                               [cap](const BitVectorStates& s) -> std::size_t {
                                 if (s.num_vars > cap)
                                   throw RefusalError("state space {0,1}^" + std::to_string(s.num_vars) +
                                                      " exceeds the enumeration cap n <= " + std::to_string(cap));
                                 return std::size_t{1} << s.num_vars;
                               }},
                    game.states);
}

DemandState state_at(const MarketGame& game, std::size_t index) {
  if (const auto* bits = std::get_if<BitVectorStates>(&game.states)) {
    if (bits->num_vars >= 64 || index >= (std::size_t{1} << bits->num_vars))
      throw ValidationError("state index " + std::to_string(index) + " out of range");
    Assignment a(bits->num_vars);
    for (std::size_t v = 0; v < bits->num_vars; ++v) a[v] = (index >> (bits->num_vars - 1 - v)) & 1U;
    return DemandState::from_assignment(std::move(a));
  }
  if (index >= explicit_state_count(game))
    throw ValidationError("state index " + std::to_string(index) + " out of range " +
                          std::to_string(explicit_state_count(game)));
  return DemandState::from_index(index);
}

std::size_t state_index(const MarketGame& game, const DemandState& state) {
  check_state(game, state);
  if (state.is_index()) return state.index();
  const auto& a = state.assignment();
  if (a.size() >= 64) throw RefusalError("assignment too wide to index");
  std::size_t index = 0;
  for (auto bit : a) index = (index << 1) | (bit ? 1U : 0U);
  return index;
}

double state_probability(const MarketGame& game, std::size_t index) {
  if (const auto* bits = std::get_if<BitVectorStates>(&game.states))
    return std::ldexp(1.0, -static_cast<int>(bits->num_vars));
  const auto& probs = std::get<ExplicitStates>(game.states).probabilities;
  if (index >= probs.size()) throw ValidationError("state index out of range");
  return probs[index];
}

DemandState sample_state(const MarketGame& game, Rng& rng) {
  if (const auto* bits = std::get_if<BitVectorStates>(&game.states)) {
    Assignment a(bits->num_vars);
    for (auto& b : a) b = static_cast<std::uint8_t>(rng() >> 63);
    return DemandState::from_assignment(std::move(a));
  }
  const auto& probs = std::get<ExplicitStates>(game.states).probabilities;
  double u = uniform01(rng);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (u < probs[i]) return DemandState::from_index(i);
    u -= probs[i];
  }
  return DemandState::from_index(probs.size() - 1);
}

void check_state(const MarketGame& game, const DemandState& state) {
  if (const auto* bits = std::get_if<BitVectorStates>(&game.states)) {
    if (!state.is_assignment())
      throw ValidationError("state space is {0,1}^n but the demand state is an index");
    if (state.assignment().size() != bits->num_vars)
      throw ValidationError("assignment length " + std::to_string(state.assignment().size()) + ", expected " +
                            std::to_string(bits->num_vars));
    return;
  }
  if (!state.is_index()) throw ValidationError("state space is explicit but the demand state is an assignment");
  if (state.index() >= explicit_state_count(game))
    throw ValidationError("state index " + std::to_string(state.index()) + " >= M = " +
                          std::to_string(explicit_state_count(game)));
}

std::vector<WeightedState> state_distribution(const MarketGame& game, std::size_t cap) {
  const std::size_t m = enumerable_state_count(game, cap);
  std::vector<WeightedState> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) out.push_back({state_at(game, i), state_probability(game, i)});
  return out;
}

// --- demand ----------------------------------------------------------------

const LinearDemand* as_linear(const MarketGame& game) { return std::get_if<LinearDemand>(&game.demand); }

std::vector<double> linear_intercepts(const MarketGame& game, const DemandState& state) {
  const auto* linear = as_linear(game);
  if (!linear) throw ValidationError("demand model is not linear");
  return std::visit(
      Overloaded{[&](const StateIntercepts& s) {
                   if (!state.is_index()) throw ValidationError("explicit intercepts need an index state");
                   if (state.index() >= s.by_state.size())
                     throw ValidationError("no intercepts for state " + std::to_string(state.index()));
                   return s.by_state[state.index()];
                 },
                 [&](const ClauseShiftedIntercepts& s) {
                   const auto& bits = state.assignment();
                   std::vector<double> a = s.base;
                   for (std::size_t j = 0; j < a.size() && j < s.clauses.size(); ++j)
                     if (clause_satisfied(s.clauses[j], bits)) a[j] += s.shift;
                   return a;
                 }},
      linear->intercepts);
}

std::vector<double> expected_intercepts(const MarketGame& game) {
  const auto* linear = as_linear(game);
  if (!linear) throw ValidationError("demand model is not linear");
  return std::visit(
      Overloaded{[&](const StateIntercepts& s) {
                   std::vector<double> mean(game.products(), 0.0);
                   for (std::size_t i = 0; i < s.by_state.size(); ++i) {
                     const double w = state_probability(game, i);
                     for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += w * s.by_state[i][j];
                   }
                   return mean;
                 },
                 [&](const ClauseShiftedIntercepts& s) {
                   std::vector<double> mean = s.base;
                   for (std::size_t j = 0; j < mean.size() && j < s.clauses.size(); ++j)
                     mean[j] += s.shift * clause_satisfaction_probability(s.clauses[j]);
                   return mean;
                 }},
      linear->intercepts);
}

std::vector<double> marginal_costs(const MarketGame& game) {
  std::vector<double> c;
  c.reserve(game.products());
  for (const auto& spec : game.costs) {
    const auto* lin = std::get_if<LinearCost>(&spec);
    if (!lin) throw ValidationError("marginal costs requested for a non-linear cost function");
    c.insert(c.end(), lin->marginal.begin(), lin->marginal.end());
  }
  return c;
}

QuantityMatrix eval_demand(const MarketGame& game, const PriceVector& prices, const DemandState& state) {
  return eval_demand(game, prices, state, NoiseMatrix(game.n_firms, game.products_per_firm));
}

QuantityMatrix eval_demand(const MarketGame& game, const PriceVector& prices, const DemandState& state,
                           const NoiseMatrix& noise) {
  check_matrix(prices, game, "price matrix");
  check_matrix(noise, game, "noise matrix");
  check_state(game, state);
  const std::size_t nk = game.products();
  QuantityMatrix q(game.n_firms, game.products_per_firm);
  auto& qv = q.values();
  const auto& pv = prices.values();

  std::visit(
      Overloaded{
          [&](const LinearDemand& d) {
            const auto a = linear_intercepts(game, state);
            for (std::size_t j = 0; j < nk; ++j) {
              double v = a[j] - d.own_slope * pv[j];
              const double* row = d.cross.data() + j * nk;
              for (std::size_t l = 0; l < nk; ++l)
                if (l != j) v += row[l] * pv[l];
              qv[j] = v;
            }
          },
          [&](const ClauseIndicatorDemand& d) {
            const auto& bits = state.assignment();
            for (std::size_t j = 0; j < nk; ++j)
              qv[j] = d.baseline + (clause_satisfied(d.clauses[j], bits) ? 1.0 : 0.0);
          },
          [&](const WeightedClauseProfitDemand& d) {
            const std::size_t l = state.index();
            Assignment reading(d.num_vars);
            for (std::size_t v = 0; v < d.num_vars; ++v) reading[v] = pv[v] >= 0.5 ? 1 : 0;
            qv[d.num_vars] = clause_satisfied(d.clauses[l], reading) ? d.weights[l] : 0.0;
          },
          [&](const EdgeComplementarityDemand& d) {
            std::size_t uncovered = 0;
            for (const auto& [u, v] : d.graph.edges())
              if (pv[u + 1] > 0.0 && pv[v + 1] > 0.0) ++uncovered;
            qv[0] = pv[0] <= d.reservation_price ? static_cast<double>(uncovered) : 0.0;
            for (std::size_t v = 1; v < nk; ++v) qv[v] = 1.0;
          }},
      game.demand);

  for (std::size_t j = 0; j < nk; ++j) qv[j] += noise.values()[j];
  return q;
}

// --- noise -------------------------------------------------------------------

double gaussian(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng);  // (0, 1]
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

NoiseMatrix sample_noise(std::uint64_t seed, const MarketGame& game) {
  Rng rng = make_rng(seed);
  return sample_noise(rng, game);
}

NoiseMatrix sample_noise(Rng& rng, const MarketGame& game) {
  NoiseMatrix eps(game.n_firms, game.products_per_firm);
  if (game.noise_variance <= 0.0) return eps;
  const double sd = std::sqrt(game.noise_variance);
  for (auto& e : eps.values()) {
    double draw = sd * gaussian(rng);
    if (game.noise_bound) {
      const double bound = *game.noise_bound;
      if (bound <= 0.0) throw ValidationError("noise bound must be positive");
      while (std::abs(draw) >= bound) draw = sd * gaussian(rng);
    }
    e = draw;
  }
  return eps;
}

// --- profit ------------------------------------------------------------------

double cost(const CostSpec& spec, std::span<const double> q) {
  return std::visit(Overloaded{[&](const LinearCost& c) {
                                 double total = 0.0;
                                 for (std::size_t k = 0; k < q.size(); ++k) total += c.marginal[k] * q[k];
                                 return total;
                               },
                               [&](const QuadraticCost& c) {
                                 double total = 0.0;
                                 for (std::size_t k = 0; k < q.size(); ++k)
                                   total += c.linear[k] * q[k] + c.quadratic[k] * q[k] * q[k];
                                 return total;
                               }},
                    spec);
}

bool is_linear_cost(const CostSpec& spec) { return std::holds_alternative<LinearCost>(spec); }

bool all_costs_linear(const MarketGame& game) {
  for (const auto& c : game.costs)
    if (!is_linear_cost(c)) return false;
  return true;
}

double eval_profit(const MarketGame& game, std::size_t firm, const PriceVector& prices,
                   const QuantityMatrix& quantities) {
  if (firm >= game.n_firms)
    throw ValidationError("firm index " + std::to_string(firm) + " out of range " + std::to_string(game.n_firms));
  check_matrix(prices, game, "price matrix");
  check_matrix(quantities, game, "quantity matrix");
  if (game.costs.size() != game.n_firms)
    throw ValidationError("cost list has " + std::to_string(game.costs.size()) + " entries for " +
                          std::to_string(game.n_firms) + " firms");
  const auto p = prices.row(firm);
  const auto q = quantities.row(firm);
  double revenue = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) revenue += p[k] * q[k];
  return revenue - cost(game.costs[firm], q);
}

double expected_firm_profit(const MarketGame& game, std::size_t firm, const PriceVector& prices,
                            std::span<const WeightedState> states) {
  double total = 0.0;
  for (const auto& ws : states) total += ws.weight * eval_profit(game, firm, prices, eval_demand(game, prices, ws.state));
  return total;
}

double expected_joint_profit_over(const MarketGame& game, const PriceVector& prices,
                                  std::span<const WeightedState> states) {
  double total = 0.0;
  for (const auto& ws : states) {
    const auto q = eval_demand(game, prices, ws.state);
    double joint = 0.0;
    for (std::size_t i = 0; i < game.n_firms; ++i) joint += eval_profit(game, i, prices, q);
    total += ws.weight * joint;
  }
  return total;
}

ProfitEstimate expected_joint_profit(const MarketGame& game, const PriceVector& prices, const ExpectationMode& mode,
                                     std::size_t cap) {
  auto joint_at = [&](const DemandState& s, const NoiseMatrix& eps) {
    const auto q = eval_demand(game, prices, s, eps);
    double joint = 0.0;
    for (std::size_t i = 0; i < game.n_firms; ++i) joint += eval_profit(game, i, prices, q);
    return joint;
  };

  if (const auto* mc = std::get_if<MonteCarloExpectation>(&mode)) {
    if (mc->samples < 1) throw ValidationError("monte carlo expectation needs samples >= 1");
    Rng rng = make_rng(mc->seed);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t s = 0; s < mc->samples; ++s) {
      const auto state = sample_state(game, rng);
      const auto eps = sample_noise(rng, game);
      const double v = joint_at(state, eps);
      sum += v;
      sum_sq += v * v;
    }
    const double n = static_cast<double>(mc->samples);
    const double mean = sum / n;
    const double var = n > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1)) : 0.0;
    return {mean, Estimator::kMonteCarlo, mc->samples, mc->seed, std::sqrt(var / n)};
  }

  const auto& exact = std::get<ExactExpectation>(mode);
  const auto states = state_distribution(game, cap);
  if (all_costs_linear(game) || game.noise_variance <= 0.0) {
    ProfitEstimate out;
    out.value = expected_joint_profit_over(game, prices, states);
    return out;
  }
  // Convex costs: average over eps with a recorded seed, states exactly.
  ProfitEstimate out;
  out.estimator = Estimator::kExactStatesNoiseMonteCarlo;
  out.samples = exact.noise_samples;
  out.seed = exact.noise_seed;
  Rng rng = make_rng(exact.noise_seed);
  std::vector<NoiseMatrix> draws;
  draws.reserve(exact.noise_samples);
  for (std::size_t s = 0; s < exact.noise_samples; ++s) draws.push_back(sample_noise(rng, game));
  for (const auto& ws : states) {
    double acc = 0.0;
    for (const auto& eps : draws) acc += joint_at(ws.state, eps);
    out.value += ws.weight * acc / static_cast<double>(draws.size());
  }
  return out;
}

// --- validation ----------------------------------------------------------------

bool has_violations(const std::vector<Finding>& findings) {
  for (const auto& f : findings)
    if (f.severity == Severity::kViolation) return true;
  return false;
}

void require_valid(const MarketGame& game) {
  for (const auto& f : validate_game(game))
    if (f.severity == Severity::kViolation) throw ValidationError(f.message);
}

std::vector<Finding> validate_game(const MarketGame& game, const ValidationOptions& options) {
  std::vector<Finding> out;
  auto violation = [&](std::string code, std::string msg) {
    out.push_back({Severity::kViolation, std::move(code), std::move(msg)});
  };
  auto warning = [&](std::string code, std::string msg) {
    out.push_back({Severity::kWarning, std::move(code), std::move(msg)});
  };

  if (game.n_firms < 2) violation("firms", "need at least 2 firms, have " + std::to_string(game.n_firms));
  if (game.products_per_firm < 1) violation("products", "need at least 1 product per firm");
  if (!(game.discount > 0.0 && game.discount < 1.0)) {
    std::ostringstream msg;
    msg << "discount outside (0,1): " << game.discount;
    violation("discount", msg.str());
  }
  if (game.noise_variance < 0.0) violation("noise", "noise variance must be nonnegative");
  if (options.require_positive_noise && game.noise_variance <= 0.0)
    violation("noise", "noise variance must be strictly positive");
  if (game.noise_bound && *game.noise_bound <= 0.0) violation("noise", "noise bound must be positive");

  // Probability normalization and richness.
  double m_states = 0.0;
  if (const auto* ex = std::get_if<ExplicitStates>(&game.states)) {
    double total = 0.0;
    bool negative = false;
    for (double p : ex->probabilities) {
      total += p;
      negative |= p < 0.0;
    }
    if (ex->probabilities.empty()) violation("states", "explicit state list is empty");
    if (negative) violation("states", "negative state probability");
    if (std::abs(total - 1.0) > 1e-9) {
      std::ostringstream msg;
      msg << "state probabilities sum to " << total << ", not 1";
      violation("states", msg.str());
    }
    m_states = static_cast<double>(ex->probabilities.size());
  } else {
    m_states = std::ldexp(1.0, static_cast<int>(std::get<BitVectorStates>(game.states).num_vars));
  }
  const double needed = static_cast<double>(game.products()) + 1.0;
  if (m_states < needed) {
    std::ostringstream msg;
    msg << "state space is not rich: M = " << m_states << " < NK + 1 = " << needed;
    warning("richness", msg.str());
  }

  // Costs.
  if (game.costs.size() != game.n_firms) {
    violation("costs", "cost list has " + std::to_string(game.costs.size()) + " entries for " +
                           std::to_string(game.n_firms) + " firms");
  } else {
    for (std::size_t i = 0; i < game.costs.size(); ++i) {
      std::visit(Overloaded{[&](const LinearCost& c) {
                              if (c.marginal.size() != game.products_per_firm)
                                violation("costs", "firm " + std::to_string(i) + ": marginal cost length mismatch");
                              for (double v : c.marginal)
                                if (v < 0.0) violation("costs", "firm " + std::to_string(i) + ": negative marginal cost");
                            },
                            [&](const QuadraticCost& c) {
                              if (c.linear.size() != game.products_per_firm ||
                                  c.quadratic.size() != game.products_per_firm)
                                violation("costs", "firm " + std::to_string(i) + ": quadratic cost length mismatch");
                              for (double v : c.quadratic)
                                if (v < 0.0)
                                  violation("convexity", "firm " + std::to_string(i) + ": cost is not convex");
                              for (double v : c.linear)
                                if (v < 0.0) violation("costs", "firm " + std::to_string(i) + ": negative linear cost");
                            }},
                 game.costs[i]);
    }
  }

  // Demand structure.
  const std::size_t nk = game.products();
  std::visit(
      Overloaded{
          [&](const LinearDemand& d) {
            if (d.cross.size() != nk * nk) violation("demand", "cross matrix must be NK x NK");
            if (d.own_slope <= 0.0) violation("demand", "own-price slope must be positive");
            if (const auto* s = std::get_if<StateIntercepts>(&d.intercepts)) {
              if (!std::holds_alternative<ExplicitStates>(game.states))
                violation("demand", "explicit intercepts need an explicit state space");
              else if (s->by_state.size() != std::get<ExplicitStates>(game.states).probabilities.size())
                violation("demand", "intercept table does not cover every state");
              for (const auto& row : s->by_state)
                if (row.size() != nk) violation("demand", "intercept row length must be NK");
            } else {
              const auto& c = std::get<ClauseShiftedIntercepts>(d.intercepts);
              if (!std::holds_alternative<BitVectorStates>(game.states))
                violation("demand", "clause-shifted intercepts need a bit-vector state space");
              if (c.base.size() != nk || c.clauses.size() != nk)
                violation("demand", "clause-shifted intercepts need one base and one clause per product");
            }
          },
          [&](const ClauseIndicatorDemand& d) {
            if (!std::holds_alternative<BitVectorStates>(game.states))
              violation("demand", "clause-indicator demand needs a bit-vector state space");
            if (game.products_per_firm != 1 || d.clauses.size() != game.n_firms)
              violation("demand", "clause-indicator demand needs one firm per clause with K = 1");
          },
          [&](const WeightedClauseProfitDemand& d) {
            if (game.products_per_firm != 1 || game.n_firms != d.num_vars + 1)
              violation("demand", "weighted-clause demand needs n + 1 single-product firms");
            if (d.weights.size() != d.clauses.size()) violation("demand", "one weight per clause");
            const auto* ex = std::get_if<ExplicitStates>(&game.states);
            if (!ex || ex->probabilities.size() != d.clauses.size())
              violation("demand", "weighted-clause demand needs one explicit state per clause");
          },
          [&](const EdgeComplementarityDemand& d) {
            if (game.products_per_firm != 1 || game.n_firms != d.graph.num_vertices() + 1)
              violation("demand", "edge-complementarity demand needs one deviator plus one firm per vertex");
          }},
      game.demand);
  return out;
}

}  // namespace collusion
