#pragma once

// Repeated play of the market game: trigger strategies with budgeted
// detection, probing deviations drawn from the convex hull of the collusive
// prices, incentive gates, capacity sweeps and the two-tier scenario.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "collusion/complexity.hpp"
#include "collusion/market.hpp"
#include "collusion/profile.hpp"

namespace collusion {

// Punishment that lasts for the rest of the horizon.
inline constexpr std::size_t kGrim = std::numeric_limits<std::size_t>::max();

enum class DetectionKind { kBudgeted, kOracle, kBernoulli };

struct DetectionMode {
  DetectionKind kind = DetectionKind::kBudgeted;
  double alpha = 1.0;  // bernoulli only: chance that a deviation is caught

  static DetectionMode budgeted() { return {DetectionKind::kBudgeted, 1.0}; }
  static DetectionMode oracle() { return {DetectionKind::kOracle, 1.0}; }
  static DetectionMode bernoulli(double alpha) { return {DetectionKind::kBernoulli, alpha}; }
};

struct CollusiveTrigger {
  CapacityBudget capacity;
  std::size_t punishment_length = 10;
  DetectionMode detection;
};

struct MyopicCompetitive {};

// Follows the coalition except in periods [start, start + duration), where it
// charges `price` or, when unset, its best response to the others.
struct Deviator {
  std::optional<std::vector<double>> price;
  std::size_t start = 1;
  std::size_t duration = 1;
};

using FirmPolicy = std::variant<CollusiveTrigger, MyopicCompetitive, Deviator>;

// The collusive profile is what the coalition plays (myopic firms take their
// rows from it, so it must already hold their best responses); the
// competitive profile is played during punishment.
struct Scenario {
  MarketGame game;
  StrategyProfile collusive;
  StrategyProfile competitive;
};

Scenario make_scenario(MarketGame game);

// A firm that, in collusive periods, probes with probability probe_rate by
// charging `price` (best response when unset) in states where that pays.
// An undetected probe ends collusion for good when collapse_if_undetected.
struct Tester {
  std::size_t firm = 0;
  std::optional<std::vector<double>> price;
  double probe_rate = 0.0;
  bool collapse_if_undetected = false;
};

enum class Phase { kCollusive, kPunishment, kCollapsed };
std::string to_string(Phase phase);

struct DetectionEvent {
  std::size_t firm = 0;  // first trigger firm sharing this detector
  Answer verdict = Answer::kUnknown;
  std::size_t nodes = 0;
};

struct PeriodRecord {
  std::size_t t = 0;  // 1-based
  std::size_t state_index = 0;
  Phase phase = Phase::kCollusive;
  std::size_t punishment_remaining = 0;  // periods left including this one
  PriceVector prices;
  QuantityMatrix quantities;
  std::vector<double> profits;
  std::vector<DetectionEvent> detections;
  bool deviation = false;
  bool probe = false;
  double markup = 0.0;
  double competitive_markup = 0.0;
  double monopoly_markup = 0.0;
};

struct SimTrace {
  std::vector<PeriodRecord> periods;
  std::vector<double> discounted_payoffs;
  std::vector<double> firm_mean_markup;
  double mean_markup = 0.0;
  double competitive_markup = 0.0;  // counterfactual on the same state path
  double monopoly_markup = 0.0;
  double collusive_share = 0.0;
  double punishment_share = 0.0;
  std::size_t deviation_verdicts = 0;
  std::size_t probes = 0;

  // (mean - competitive) / (monopoly - competitive); NaN when degenerate.
  double normalized_markup() const;
};

struct SimulationOptions {
  std::optional<Tester> tester;
  bool record_periods = true;
};

// Deterministic per seed. Period t draws its state from
// derive_seed(seed, kState, t) and its noise from derive_seed(seed, kNoise, t).
SimTrace run_simulation(const Scenario& scenario, const std::vector<FirmPolicy>& policies, std::size_t horizon,
                        std::uint64_t seed, const SimulationOptions& options = {});

// (p - c) / c averaged over all products; NaN when some cost is not linear or
// not positive.
double mean_markup(const MarketGame& game, const PriceVector& prices);

// --- incentive gates -------------------------------------------------------

// sum_{t=1}^{L} delta^t; delta / (1 - delta) for kGrim.
double punishment_weight(double delta, std::size_t length);

// Smallest detection probability alpha with
// gain <= alpha * punishment_weight * (collusive - punishment).
double required_detection(double gain, double collusive, double punishment, double delta, std::size_t length);

// pi_M >= (1 - alpha) pi_D + alpha [pi_D + delta / (1 - delta) pi_P] (1 - delta) / delta
bool check_alpha_ic(double collusive, double deviation, double punishment, double delta, double alpha);
double alpha_ic_margin(double collusive, double deviation, double punishment, double delta, double alpha);

// Discount factor in (0,1) at which the inequality above turns, found by
// bisection to `tol`; nullopt when it does not change sign.
std::optional<double> alpha_ic_threshold(double collusive, double deviation, double punishment, double alpha,
                                         double tol = 1e-6);

// --- undetectable deviations ---------------------------------------------------

struct HullSearchOptions {
  std::size_t grid_points = 19;   // interior points of the segment
  std::size_t top_candidates = 4; // most profitable points checked for detection
  std::size_t samples = 30;       // deviating observations per candidate
};

struct HullCandidate {
  std::vector<double> price;
  // Weights over states: the firm's prices in these states combine to `price`.
  std::vector<std::pair<std::size_t, double>> lambda;
  double gain = 0.0;               // expected gain per period when probing
  double deviation_probability = 0.0;  // share of states in which probing pays
  std::vector<std::size_t> search_costs;  // empty until checked
};

struct HullSearch {
  std::size_t firm = 0;
  std::vector<HullCandidate> candidates;  // profitable, by decreasing gain
};

// Throws ValidationError when the firm's prices do not vary across states.
HullSearch evaluate_hull(const MarketGame& game, const StrategyProfile& profile, std::size_t firm,
                         std::uint64_t seed, const HullSearchOptions& options = {});

struct UndetectableDeviation {
  bool found = false;
  HullCandidate candidate;
  double undetected_fraction = 0.0;
  double score = 0.0;  // gain * undetected_fraction
  // Detection rate at this budget of the most profitable candidate.
  double top_candidate_detection = 1.0;
};

UndetectableDeviation select_deviation(const HullSearch& search, const CapacityBudget& budget);

UndetectableDeviation find_undetectable_deviation(const MarketGame& game, const StrategyProfile& profile,
                                                  std::size_t firm, const CapacityBudget& budget,
                                                  std::uint64_t seed, const HullSearchOptions& options = {});

// Charges `price` in states where it beats the profile for `firm`.
DeviationGenerator selective_deviation(const MarketGame& game, const StrategyProfile& profile, std::size_t firm,
                                       std::vector<double> price);

// --- testers and sweeps -------------------------------------------------------

struct TesterPlan {
  Tester tester;
  double gain = 0.0;                 // expected one-period gain per probe
  double deviation_probability = 0.0;
  double believed_detection = 0.0;
  double required_detection = 0.0;
  bool sustainable = false;
};

// The coalition is sustainable when the expected loss from being caught
// outweighs the gain of a probe. A sustainable coalition shrugs off
// undetected probes, and by default the tester then does not probe.
TesterPlan plan_tester(const Scenario& scenario, std::size_t firm, std::optional<std::vector<double>> price,
                       double believed_detection, std::size_t punishment_length, double probe_rate,
                       bool probe_when_sustainable = false);

using ScenarioFamily = std::function<Scenario(std::size_t episode, std::uint64_t seed)>;

struct SweepOptions {
  std::size_t punishment_length = 10;
  double probe_rate = 0.2;
  std::size_t tester_firm = 0;
  HullSearchOptions hull;
};

struct RegimePoint {
  CapacityBudget capacity;
  double mean_markup = 0.0;
  double normalized_markup = 0.0;
  double normalized_se = 0.0;
  double detection_accuracy = 0.0;
  double collusive_share = 0.0;
  double punishment_share = 0.0;
  std::size_t episodes = 0;
};

struct RegimeCurve {
  std::vector<RegimePoint> points;
  double competitive_markup = 0.0;
  double monopoly_markup = 0.0;
};

// Every episode draws its scenario from the family; the same episode seeds are
// reused across capacities. While some profitable hull deviation escapes the
// capacity's detector, the tester firm probes with it: a caught probe starts a
// punishment phase, an unseen one ends collusion.
RegimeCurve sweep_capacity(const ScenarioFamily& family, std::span<const CapacityBudget> capacities,
                           std::size_t episodes, std::size_t horizon, std::uint64_t seed,
                           const SweepOptions& options = {});
RegimeCurve sweep_capacity(const Scenario& scenario, std::span<const CapacityBudget> capacities,
                           std::size_t episodes, std::size_t horizon, std::uint64_t seed,
                           const SweepOptions& options = {});

enum class Regime { kCompetitive, kUnstable, kCollusive };
std::string to_string(Regime regime);

struct RegimeClassification {
  std::optional<CapacityBudget> s_star;        // first normalized markup > eps_low
  std::optional<CapacityBudget> s_double_star; // first normalized markup >= eps_high
  std::vector<Regime> labels;
};

RegimeClassification classify_regimes(const RegimeCurve& curve, double eps_low = 0.05, double eps_high = 0.95);

// --- asymmetric adoption --------------------------------------------------------

struct TierReport {
  double ai_markup = 0.0;
  double ai_se = 0.0;
  double traditional_markup = 0.0;  // NaN when every firm is in the coalition
  double traditional_se = 0.0;
  std::vector<double> ai_by_episode;
  std::vector<double> traditional_by_episode;
};

// Firms 0..ai_firms-1 collude on their joint profit under trigger strategies
// with capacity s_ai; the rest price myopically. s_traditional is recorded
// for completeness: myopic firms run no detection.
TierReport scenario_asymmetric(const MarketGame& game, std::size_t ai_firms, const CapacityBudget& s_ai,
                               const CapacityBudget& s_traditional, std::size_t horizon, std::size_t episodes,
                               std::uint64_t seed);

}  // namespace collusion
