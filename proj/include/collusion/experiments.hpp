#pragma once

// Named experiments: how market noise widens the set of states consistent with
// an observation, and the worked two-state duopoly.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "collusion/complexity.hpp"
#include "collusion/market.hpp"
#include "collusion/profile.hpp"
#include "collusion/repeated_game.hpp"

namespace collusion {

// States whose noiseless prediction lies within r = z * sqrt(variance) of the
// observed quantities in max-norm. Needs an enumerable state space.
std::vector<std::size_t> ambiguity_set(const MarketGame& game, const Observation& observation, double noise_variance,
                                       double z = 2.0);

struct TransparencyOptions {
  double z = 2.0;
  std::size_t observations = 200;  // compliant observations sampled at each noise level
  std::size_t trials = 400;        // detection trials per grid point
  std::size_t tester_firm = 0;
  // Deviation used for the accuracy measurement; by default the most
  // profitable hull price of tester_firm, charged where it pays.
  std::optional<std::vector<double>> deviation_price;
  SweepOptions sweep;
};

struct AmbiguityPoint {
  double noise_variance = 0.0;
  double tolerance = 0.0;  // r
  double mean_ambiguity = 0.0;
  double detection_accuracy = 0.0;
  double accuracy_se = 0.0;
  double mean_markup = 0.0;
  double markup_se = 0.0;
  double normalized_markup = 0.0;
};

struct AmbiguityReport {
  std::vector<AmbiguityPoint> points;  // ascending variance
  std::vector<double> deviation_price;
  std::size_t inclusion_checks = 0;    // (observation, adjacent pair) checks
  std::size_t inclusion_failures = 0;
};

// Samples compliant observations at every noise level and measures each
// level's ambiguity set over the pooled sample, checking A(v_k) within
// A(v_{k+1}) per observation. Per level it also measures detection accuracy at
// `budget` and runs the capacity-fixed repeated game.
AmbiguityReport transparency_sweep(const MarketGame& game, const StrategyProfile& profile,
                                   const std::vector<double>& variances, std::size_t episodes, std::size_t horizon,
                                   const CapacityBudget& budget, std::uint64_t seed,
                                   const TransparencyOptions& options = {});

struct DuopolyRow {
  std::string quantity;
  std::string state;  // "H", "L" or "E" for expectations
  double closed_form = 0.0;
  double ascent = 0.0;
  double grid = 0.0;
  std::optional<double> printed;
  bool discrepancy = false;
};

struct DuopolyTable {
  std::vector<DuopolyRow> rows;
  double max_solver_gap = 0.0;  // largest spread among the three solvers
  bool discrepancy = false;     // any printed value off by more than 0.02
};

// Two-stage grid: coarse step over [0, 20], then fine_step within
// +-window of the coarse optimum.
struct DuopolyOptions {
  double coarse_step = 0.01;
  double fine_step = 0.001;
  double window = 0.02;
};

DuopolyTable duopoly_example(const DuopolyOptions& options = {});

std::string format_table(const DuopolyTable& table);

}  // namespace collusion
