#pragma once

// The three collusion decision problems (strategy, detection, punishment) with
// exact search oracles that respect a node budget, plus empirical detection
// accuracy and the market complexity index.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "collusion/market.hpp"
#include "collusion/profile.hpp"

namespace collusion {

// Search-node budget. nullopt is the unlimited oracle.
struct CapacityBudget {
  std::optional<std::size_t> max_nodes;

  static CapacityBudget unlimited() { return {}; }
  static CapacityBudget nodes(std::size_t n) { return {n}; }
  bool is_unlimited() const { return !max_nodes.has_value(); }
  bool allows(std::size_t used) const { return !max_nodes || used < *max_nodes; }

  friend bool operator==(const CapacityBudget&, const CapacityBudget&) = default;
};

std::string to_string(const CapacityBudget& budget);

struct CspPayload {
  double target = 0.0;
  // Candidate prices per product (NK lists, searched in lexicographic order).
  // Empty means the game's natural binary grid; only reduction games have one.
  std::vector<std::vector<double>> price_levels;
};

struct CdpPayload {
  StrategyProfile profile;
  Observation observation;
  double noise_bound = 0.5;  // residuals must satisfy |q - D| < bound
};

struct OppPayload {
  std::size_t deviator = 0;
  StrategyProfile profile;
  double payoff_bound = 0.0;
  std::size_t max_punishers = 0;   // k
  double aggressive_price = 0.0;   // price charged by a punishing firm
};

using Payload = std::variant<CspPayload, CdpPayload, OppPayload>;

struct DecisionInstance {
  MarketGame game;
  Payload payload;
};

enum class Answer { kYes, kNo, kUnknown };
std::string to_string(Answer answer);

struct CspCertificate {
  PriceVector prices;
  double expected_joint_profit = 0.0;
};

struct CdpCertificate {
  DemandState state;
  NoiseMatrix residuals;
};

struct OppCertificate {
  std::vector<std::size_t> aggressive;  // punishing firm indices
  double deviator_payoff = 0.0;
};

using Certificate = std::variant<std::monostate, CspCertificate, CdpCertificate, OppCertificate>;

struct Verdict {
  Answer answer = Answer::kUnknown;
  Certificate certificate;
  std::size_t nodes_expanded = 0;
};

// One node per candidate price vector.
Verdict decide_csp(const DecisionInstance& instance, const CapacityBudget& budget = {});

// Explicit state lists cost one node per state. Bit-vector games with
// clause-driven demand are searched depth first over x1..xn (false before
// true); the observed quantity of each clause firm fixes whether its clause
// must hold, must fail, or is unconstrained, and a node whose partial
// assignment already contradicts this is counted but not expanded.
Verdict decide_cdp(const DecisionInstance& instance, const CapacityBudget& budget = {});
// Same search without copying the profile. Only the profile's shape is checked.
Verdict decide_cdp(const MarketGame& game, const StrategyProfile& profile, const Observation& observation,
                   double noise_bound, const CapacityBudget& budget = {});

// Subsets of punishers by size, then lexicographically; one node each.
Verdict decide_opp(const DecisionInstance& instance, const CapacityBudget& budget = {});

Verdict decide(const DecisionInstance& instance, const CapacityBudget& budget = {});

// Noise bound used by detection on a game: the truncation bound, or a 1e-9
// tolerance for noiseless games. Throws when the noise is unbounded.
double detection_noise_bound(const MarketGame& game);

// --- reductions ------------------------------------------------------------

// Variables become binary-priced firms 0..n-1, firm n settles clause profits.
// One state per clause with probability 1/m.
DecisionInstance reduce_maxwsat_to_csp(const WeightedCnf& formula, double target);

struct CdpReductionOptions {
  double baseline = 2.0;
  double common_price = 1.0;
};

// One firm per clause, pooling price, every quantity observed at baseline + 1.
DecisionInstance reduce_3sat_to_cdp(const Cnf& formula, const CdpReductionOptions& options = {});
// Clauses padded to three literals by repeating the last one.
Cnf pad_to_three(const Cnf& formula);

// Deviator is firm 0, firm v + 1 punishes for vertex v; bound 0.
DecisionInstance reduce_vc_to_opp(const Graph& graph, std::size_t k);

// --- empirical detection ---------------------------------------------------

// Replaces the compliant price matrix with a deviating one.
using DeviationGenerator = std::function<PriceVector(const PriceVector& compliant, const DemandState& state, Rng& rng)>;

// Firm `firm` charges `price` on every product regardless of the state.
DeviationGenerator fixed_price_deviation(std::size_t firm, std::vector<double> price);

struct DetectionStats {
  double accuracy = 0.0;
  double detection_rate = 0.0;    // deviations answered "no"
  double false_alarm_rate = 0.0;  // compliant episodes answered "no"
  std::size_t trials = 0;
};

// Even trials are compliant, odd trials carry the generated deviation. Each
// trial draws its state and noise from derive_seed(seed, kTrial, t). Unknown
// verdicts count as compliant.
DetectionStats detection_statistics(const MarketGame& game, const StrategyProfile& profile,
                                    const CapacityBudget& budget, std::size_t trials,
                                    const DeviationGenerator& deviation, std::uint64_t seed);
double detection_accuracy(const MarketGame& game, const StrategyProfile& profile, const CapacityBudget& budget,
                          std::size_t trials, const DeviationGenerator& deviation, std::uint64_t seed);

inline constexpr std::size_t kNeverDetected = std::numeric_limits<std::size_t>::max();

// Nodes the unlimited search needs to refute each of `samples` deviating
// observations (kNeverDetected when the observation is consistent). Since the
// search is deterministic, a budget of s refutes exactly the samples with cost
// at most s.
std::vector<std::size_t> deviation_search_costs(const MarketGame& game, const StrategyProfile& profile,
                                                const DeviationGenerator& deviation, std::size_t samples,
                                                std::uint64_t seed);
double detected_fraction(std::span<const std::size_t> costs, const CapacityBudget& budget);

struct FamilyInstance {
  MarketGame game;
  StrategyProfile profile;
  DeviationGenerator deviation;
};

using FamilyGenerator = std::function<FamilyInstance(std::size_t size, std::uint64_t seed)>;
using BudgetSchedule = std::function<CapacityBudget(std::size_t size)>;

struct ComplexityIndexResult {
  std::optional<std::size_t> index;  // nullopt: not reached within the sizes
  std::vector<std::pair<std::size_t, double>> accuracy_by_size;
};

// Smallest size whose detection accuracy under schedule(size) is at most
// `floor`.
ComplexityIndexResult estimate_complexity_index(const FamilyGenerator& family, std::span<const std::size_t> sizes,
                                                const BudgetSchedule& schedule, std::size_t trials, double floor,
                                                std::uint64_t seed);

}  // namespace collusion
