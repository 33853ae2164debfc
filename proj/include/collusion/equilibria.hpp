#pragma once

// Competitive best responses, the competitive fixed point, the joint-profit
// optimum, deviation payoffs and the discount threshold.
//
// Every solver takes the set of demand states to average over. Passing the
// full distribution gives the pooled (state-independent) solution; passing a
// single state gives the state-contingent solution for that state.

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "collusion/market.hpp"
#include "collusion/profile.hpp"

namespace collusion {

struct EquilibriumResult {
  PriceVector prices;
  std::vector<double> per_firm_profits;
  std::size_t iterations = 0;
  bool converged = false;
  double residual = 0.0;
};

// Exhaustive grid over [lower, upper] in every coordinate. The first point
// (lexicographic order) attaining the maximum wins ties.
struct GridSpec {
  double step = 0.01;
  double lower = 0.0;
  double upper = 20.0;
};

inline constexpr double kMaxGridPoints = 1e8;

struct ClosedFormMethod {};
struct AscentMethod {
  double tol = 1e-8;
  std::size_t max_iter = 10000;
};
struct GridMethod {
  GridSpec grid;
};

using OptimizationMethod = std::variant<ClosedFormMethod, AscentMethod, GridMethod>;

struct SolverOptions {
  double tol = 1e-8;
  std::size_t max_iter = 10000;
  // Best-response method. Closed form needs linear demand and linear costs;
  // when unavailable the solver falls back to ascent.
  OptimizationMethod method = ClosedFormMethod{};
  // Noise draws used when a firm's cost is not linear.
  std::size_t noise_samples = 512;
  std::uint64_t noise_seed = 0;
  std::optional<PriceVector> start;  // default: marginal cost
};

std::vector<WeightedState> single_state(const DemandState& state);

// Firm i's expected-profit-maximizing prices against `rivals` (firm i's own
// row of `rivals` is ignored). Throws SolverError when the objective is not
// concave or has no finite maximizer.
std::vector<double> solve_cbr(const MarketGame& game, std::size_t firm, const PriceVector& rivals,
                              std::span<const WeightedState> states, const SolverOptions& options = {});
std::vector<double> solve_cbr(const MarketGame& game, std::size_t firm, const PriceVector& rivals,
                              const SolverOptions& options = {});

// Simultaneous best-response iteration until the largest price movement is at
// most tol. Never throws on non-convergence; converged is false instead.
EquilibriumResult competitive_fixed_point(const MarketGame& game, std::span<const WeightedState> states,
                                          const SolverOptions& options = {});
EquilibriumResult competitive_fixed_point(const MarketGame& game, const SolverOptions& options = {});

// Stage Nash equilibrium of linear demand with linear costs, by one linear
// solve of the stacked first-order conditions.
EquilibriumResult competitive_closed_form(const MarketGame& game, std::span<const WeightedState> states);

// Joint-profit maximizer p^M.
EquilibriumResult collusive_optimum(const MarketGame& game, std::span<const WeightedState> states,
                                    const OptimizationMethod& method = ClosedFormMethod{});
EquilibriumResult collusive_optimum(const MarketGame& game, const OptimizationMethod& method = ClosedFormMethod{});

// Equilibrium in which the firms flagged in `coalition` maximize their joint
// profit and every other firm best-responds on its own. An empty coalition or
// a coalition of one gives the competitive outcome; all firms give p^M.
// Linear demand and costs only.
EquilibriumResult coalition_equilibrium(const MarketGame& game, std::span<const WeightedState> states,
                                        const std::vector<std::uint8_t>& coalition);

// State-contingent profiles: one solve per state of an enumerable game.
StrategyProfile competitive_profile(const MarketGame& game, const SolverOptions& options = {});
StrategyProfile collusive_profile(const MarketGame& game);
StrategyProfile coalition_profile(const MarketGame& game, const std::vector<std::uint8_t>& coalition);

// E_theta[pi_i(sigma(theta), theta)] with eps = 0.
double profile_payoff(const MarketGame& game, std::size_t firm, const StrategyProfile& profile);
double profile_joint_payoff(const MarketGame& game, const StrategyProfile& profile);

// Firm i's expected profit when it best-responds to the rivals' part of the
// profile, state by state for tabular profiles and against the pooled prices
// otherwise.
double deviation_payoff(const MarketGame& game, std::size_t firm, const StrategyProfile& profile,
                        const SolverOptions& options = {});

// delta* = (pi_D - pi_M) / (pi_D - pi_P). Throws ValidationError when
// pi_D <= pi_P.
double compute_delta_star(double deviation, double collusive, double punishment);

}  // namespace collusion
