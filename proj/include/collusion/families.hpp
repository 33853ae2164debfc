#pragma once

// Ready-made games: the two-state linear duopoly, a symmetric linear oligopoly,
// and random 3-SAT markets whose demand shifts with clause satisfaction.

#include <cstddef>
#include <cstdint>

#include "collusion/cnf.hpp"
#include "collusion/market.hpp"

namespace collusion {

struct DuopolyParams {
  double a_high = 10.0;
  double a_low = 4.0;
  double beta = 0.5;
  double marginal_cost = 1.0;
  double noise_variance = 0.0;
  double discount = 0.95;
};

// Two equally likely states with q_i = a(theta) - p_i + beta p_j.
MarketGame duopoly_game(const DuopolyParams& params = {});

// The same market frozen in one state with intercept a.
MarketGame single_state_duopoly(double a = 10.0, double beta = 0.5, double marginal_cost = 1.0,
                                double discount = 0.95);

struct OligopolyParams {
  std::size_t n_firms = 4;
  double a_high = 10.0;
  double a_low = 6.0;
  double beta = 0.6;  // total cross effect, split evenly over rivals
  double marginal_cost = 1.0;
  double noise_sd = 0.2;
  double bound_multiplier = 2.0;
  double discount = 0.95;
};

// Symmetric linear oligopoly with two equally likely states and truncated
// noise, bound = bound_multiplier * noise_sd.
MarketGame oligopoly_game(const OligopolyParams& params = {});

struct SatMarketParams {
  std::size_t num_vars = 10;
  std::size_t num_clauses = 30;
  double base_intercept = 10.0;
  double shift = 1.0;  // demand gain when a firm's clause is satisfied
  double beta = 0.5;
  double marginal_cost = 1.0;
  double noise_sd = 0.2;
  double bound_multiplier = 2.0;
  double discount = 0.95;
};

struct SatMarket {
  Cnf formula;
  MarketGame game;
};

// One firm per clause of a random 3-SAT formula over x1..xn; states are
// {0,1}^n and firm j's intercept rises by `shift` when clause j holds.
SatMarket sat_market(const SatMarketParams& params, std::uint64_t seed);

// Sets the noise standard deviation and its truncation bound.
void set_noise(MarketGame& game, double noise_sd, double bound_multiplier);

}  // namespace collusion
