#include "collusion/families.hpp"

#include <cmath>

#include "collusion/error.hpp"

namespace collusion {

MarketGame duopoly_game(const DuopolyParams& params) {
  MarketGame g;
  g.n_firms = 2;
  g.products_per_firm = 1;
  LinearDemand d;
  d.intercepts = StateIntercepts{{{params.a_high, params.a_high}, {params.a_low, params.a_low}}};
  d.own_slope = 1.0;
  d.cross = LinearDemand::uniform_cross(2, params.beta);
  g.demand = std::move(d);
  g.states = ExplicitStates{{0.5, 0.5}};
  g.noise_variance = params.noise_variance;
  g.costs.assign(2, LinearCost{{params.marginal_cost}});
  g.discount = params.discount;
  return g;
}

MarketGame single_state_duopoly(double a, double beta, double marginal_cost, double discount) {
  MarketGame g = duopoly_game({a, a, beta, marginal_cost, 0.0, discount});
  std::get<LinearDemand>(g.demand).intercepts = StateIntercepts{{{a, a}}};
  g.states = ExplicitStates{{1.0}};
  return g;
}

void set_noise(MarketGame& game, double noise_sd, double bound_multiplier) {
  if (noise_sd < 0.0 || bound_multiplier <= 0.0) throw ValidationError("noise scale must be nonnegative");
  game.noise_variance = noise_sd * noise_sd;
  if (noise_sd > 0.0)
    game.noise_bound = bound_multiplier * noise_sd;
  else
    game.noise_bound.reset();
}

MarketGame oligopoly_game(const OligopolyParams& params) {
  if (params.n_firms < 2) throw ValidationError("oligopoly needs at least two firms");
  MarketGame g;
  g.n_firms = params.n_firms;
  g.products_per_firm = 1;
  LinearDemand d;
  d.intercepts = StateIntercepts{{std::vector<double>(params.n_firms, params.a_high),
                                  std::vector<double>(params.n_firms, params.a_low)}};
  d.own_slope = 1.0;
  d.cross = LinearDemand::uniform_cross(params.n_firms, params.beta);
  g.demand = std::move(d);
  g.states = ExplicitStates{{0.5, 0.5}};
  g.costs.assign(params.n_firms, LinearCost{{params.marginal_cost}});
  g.discount = params.discount;
  set_noise(g, params.noise_sd, params.bound_multiplier);
  return g;
}

SatMarket sat_market(const SatMarketParams& params, std::uint64_t seed) {
  if (params.num_vars < 3) throw ValidationError("3-SAT market needs at least three variables");
  if (params.num_clauses < 2) throw ValidationError("3-SAT market needs at least two clauses");
  SatMarket out;
  out.formula = random_ksat(params.num_vars, params.num_clauses, 3, seed);
  const std::size_t m = params.num_clauses;

  MarketGame& g = out.game;
  g.n_firms = m;
  g.products_per_firm = 1;
  LinearDemand d;
  d.intercepts = ClauseShiftedIntercepts{std::vector<double>(m, params.base_intercept), params.shift,
                                         out.formula.clauses};
  d.own_slope = 1.0;
  d.cross = LinearDemand::uniform_cross(m, params.beta);
  g.demand = std::move(d);
  g.states = BitVectorStates{params.num_vars};
  g.costs.assign(m, LinearCost{{params.marginal_cost}});
  g.discount = params.discount;
  set_noise(g, params.noise_sd, params.bound_multiplier);
  return out;
}

}  // namespace collusion
