#pragma once

#include <vector>

#include "collusion/market.hpp"

namespace testing_support {

using namespace collusion;

// Two-state linear duopoly: a(H) = 10, a(L) = 4, beta = 0.5, c = 1.
inline MarketGame duopoly(double beta = 0.5, double a_high = 10.0, double a_low = 4.0) {
  MarketGame g;
  g.n_firms = 2;
  g.products_per_firm = 1;
  LinearDemand d;
  d.intercepts = StateIntercepts{{{a_high, a_high}, {a_low, a_low}}};
  d.own_slope = 1.0;
  d.cross = LinearDemand::uniform_cross(2, beta);
  g.demand = d;
  g.states = ExplicitStates{{0.5, 0.5}};
  g.costs = {LinearCost{{1.0}}, LinearCost{{1.0}}};
  g.discount = 0.95;
  return g;
}

inline MarketGame single_state_duopoly(double a = 10.0, double beta = 0.5) {
  MarketGame g = duopoly(beta, a, a);
  LinearDemand d = std::get<LinearDemand>(g.demand);
  d.intercepts = StateIntercepts{{{a, a}}};
  g.demand = d;
  g.states = ExplicitStates{{1.0}};
  return g;
}

inline PriceVector prices(std::vector<double> v) {
  const std::size_t n = v.size();
  return PriceVector(n, 1, std::move(v));
}

}  // namespace testing_support
