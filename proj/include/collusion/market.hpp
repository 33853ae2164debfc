#pragma once

// The market game: firms, products, demand states, noise, costs and
// discounting, with evaluators for demand and profit.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "collusion/cnf.hpp"
#include "collusion/graph.hpp"
#include "collusion/rng.hpp"

namespace collusion {

// Dense N x K matrix indexed by (firm, product). Used for prices, quantities
// and noise draws.
class FirmProductMatrix {
 public:
  FirmProductMatrix() = default;
  FirmProductMatrix(std::size_t firms, std::size_t products, double fill = 0.0)
      : firms_(firms), products_(products), values_(firms * products, fill) {}
  FirmProductMatrix(std::size_t firms, std::size_t products, std::vector<double> values);

  std::size_t firms() const { return firms_; }
  std::size_t products() const { return products_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(std::size_t firm, std::size_t product) { return values_[firm * products_ + product]; }
  double operator()(std::size_t firm, std::size_t product) const { return values_[firm * products_ + product]; }

  std::span<double> row(std::size_t firm) { return {values_.data() + firm * products_, products_}; }
  std::span<const double> row(std::size_t firm) const { return {values_.data() + firm * products_, products_}; }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  friend bool operator==(const FirmProductMatrix&, const FirmProductMatrix&) = default;

 private:
  std::size_t firms_ = 0;
  std::size_t products_ = 0;
  std::vector<double> values_;
};

using PriceVector = FirmProductMatrix;
using QuantityMatrix = FirmProductMatrix;
using NoiseMatrix = FirmProductMatrix;

// One element of the state space: an index into an explicit list, or a truth
// assignment for bit-vector families.
class DemandState {
 public:
  static DemandState from_index(std::size_t index);
  static DemandState from_assignment(Assignment bits);

  bool is_index() const { return !is_assignment_; }
  bool is_assignment() const { return is_assignment_; }
  std::size_t index() const;
  const Assignment& assignment() const;

  friend bool operator==(const DemandState&, const DemandState&) = default;

 private:
  bool is_assignment_ = false;
  std::size_t index_ = 0;
  Assignment bits_;
};

std::string to_string(const DemandState& state);

// Explicit list of M states with weights F.
struct ExplicitStates {
  std::vector<double> probabilities;
};

// {0,1}^n with uniform F; state index order is lexicographic in (x1, ..., xn).
struct BitVectorStates {
  std::size_t num_vars = 0;
};

using StateSpace = std::variant<ExplicitStates, BitVectorStates>;

// Intercept a(theta) listed per explicit state, NK values each.
struct StateIntercepts {
  std::vector<std::vector<double>> by_state;
};

// Compact intercepts for bit-vector families:
// a_j(theta) = base_j + shift * 1[clause_j satisfied by theta].
struct ClauseShiftedIntercepts {
  std::vector<double> base;
  double shift = 1.0;
  std::vector<Clause> clauses;
};

// q_j = a_j(theta) - own_slope * p_j + sum_{l != j} cross[j][l] * p_l
struct LinearDemand {
  std::variant<StateIntercepts, ClauseShiftedIntercepts> intercepts;
  double own_slope = 1.0;
  std::vector<double> cross;  // NK x NK row-major; the diagonal is ignored

  // Every product pair gets the same cross coefficient beta / (NK - 1).
  static std::vector<double> uniform_cross(std::size_t products, double beta);
};

// Firm j (K = 1) sells d + 1[C_j satisfied by theta], independent of prices.
struct ClauseIndicatorDemand {
  std::vector<Clause> clauses;
  double baseline = 2.0;
};

// Firms 0..n-1 are variable products whose price reads as a truth value
// (p >= 1/2 is true); firm n settles clause profits: in state l its demand is
// w_l when the variable prices satisfy C_l and 0 otherwise.
struct WeightedClauseProfitDemand {
  std::size_t num_vars = 0;
  std::vector<Clause> clauses;
  std::vector<double> weights;
};

// Firm 0 is the deviator, firm v + 1 punishes for vertex v (K = 1). The
// deviator sells one unit per edge whose endpoints are both priced passively
// (p > 0), provided its own price is at most the reservation price. Punishers
// sell one unit at whatever price they set, so an aggressive price of 0 costs
// them one unit of profit.
struct EdgeComplementarityDemand {
  Graph graph;
  double reservation_price = 1.0;
};

using DemandModel =
    std::variant<LinearDemand, ClauseIndicatorDemand, WeightedClauseProfitDemand, EdgeComplementarityDemand>;

struct LinearCost {
  std::vector<double> marginal;  // K entries
};

// C(q) = sum_k linear_k q_k + quadratic_k q_k^2
struct QuadraticCost {
  std::vector<double> linear;
  std::vector<double> quadratic;
};

using CostSpec = std::variant<LinearCost, QuadraticCost>;

struct MarketGame {
  std::size_t n_firms = 2;
  std::size_t products_per_firm = 1;
  DemandModel demand;
  StateSpace states;
  double noise_variance = 0.0;
  std::optional<double> noise_bound;  // draws satisfy |eps| < bound when set
  std::vector<CostSpec> costs;        // one per firm
  double discount = 0.95;
  std::optional<std::size_t> horizon;  // nullopt = infinite

  std::size_t products() const { return n_firms * products_per_firm; }
};

struct Observation {
  PriceVector prices;
  QuantityMatrix quantities;
};

// Largest n for which {0,1}^n is enumerated exactly.
inline constexpr std::size_t kDefaultEnumerationCap = 20;

// --- state space --------------------------------------------------------

// Number of states; throws RefusalError for bit-vector families wider than cap.
std::size_t enumerable_state_count(const MarketGame& game, std::size_t cap = kDefaultEnumerationCap);
DemandState state_at(const MarketGame& game, std::size_t index);
std::size_t state_index(const MarketGame& game, const DemandState& state);
double state_probability(const MarketGame& game, std::size_t index);
DemandState sample_state(const MarketGame& game, Rng& rng);
// Throws ValidationError if the state does not belong to the game.
void check_state(const MarketGame& game, const DemandState& state);

struct WeightedState {
  DemandState state;
  double weight = 1.0;
};

std::vector<WeightedState> state_distribution(const MarketGame& game, std::size_t cap = kDefaultEnumerationCap);

// --- demand and profit ---------------------------------------------------

// q = D(p, theta) + eps. Throws ValidationError naming the mismatched axis.
QuantityMatrix eval_demand(const MarketGame& game, const PriceVector& prices, const DemandState& state,
                           const NoiseMatrix& noise);
QuantityMatrix eval_demand(const MarketGame& game, const PriceVector& prices, const DemandState& state);

// I.i.d. Gaussian draws with variance noise_variance, rejected until
// |eps| < noise_bound when a bound is set. Deterministic per seed.
NoiseMatrix sample_noise(std::uint64_t seed, const MarketGame& game);
NoiseMatrix sample_noise(Rng& rng, const MarketGame& game);
double gaussian(Rng& rng);

double cost(const CostSpec& spec, std::span<const double> quantities);
bool is_linear_cost(const CostSpec& spec);
bool all_costs_linear(const MarketGame& game);

// pi_i = sum_k p_ik q_ik - C_i(q_i)
double eval_profit(const MarketGame& game, std::size_t firm, const PriceVector& prices, const QuantityMatrix& quantities);

struct ExactExpectation {
  // Noise draws used when costs are not linear (E[C(q)] != C(E[q])).
  std::size_t noise_samples = 4096;
  std::uint64_t noise_seed = 0;
};

struct MonteCarloExpectation {
  std::size_t samples = 1;
  std::uint64_t seed = 0;
};

using ExpectationMode = std::variant<ExactExpectation, MonteCarloExpectation>;

enum class Estimator { kExactStates, kExactStatesNoiseMonteCarlo, kMonteCarlo };

struct ProfitEstimate {
  double value = 0.0;
  Estimator estimator = Estimator::kExactStates;
  std::size_t samples = 0;  // noise or (state, noise) samples, 0 when none
  std::uint64_t seed = 0;
  double standard_error = 0.0;  // Monte Carlo only
};

ProfitEstimate expected_joint_profit(const MarketGame& game, const PriceVector& prices,
                                     const ExpectationMode& mode = ExactExpectation{},
                                     std::size_t cap = kDefaultEnumerationCap);

// Firm i's expected profit over a weighted set of states with eps = 0. Exact
// for linear costs.
double expected_firm_profit(const MarketGame& game, std::size_t firm, const PriceVector& prices,
                            std::span<const WeightedState> states);
double expected_joint_profit_over(const MarketGame& game, const PriceVector& prices,
                                  std::span<const WeightedState> states);

// --- linear demand helpers --------------------------------------------------

const LinearDemand* as_linear(const MarketGame& game);
std::vector<double> linear_intercepts(const MarketGame& game, const DemandState& state);
// E_theta[a(theta)], computed from clause probabilities for compact families.
std::vector<double> expected_intercepts(const MarketGame& game);
// Marginal costs as an NK vector; throws if some firm has a non-linear cost.
std::vector<double> marginal_costs(const MarketGame& game);

// --- validation ----------------------------------------------------------

enum class Severity { kWarning, kViolation };

struct Finding {
  Severity severity = Severity::kViolation;
  std::string code;
  std::string message;
};

struct ValidationOptions {
  bool require_positive_noise = false;
};

std::vector<Finding> validate_game(const MarketGame& game, const ValidationOptions& options = {});
bool has_violations(const std::vector<Finding>& findings);

// Throws ValidationError with the first violation, if any.
void require_valid(const MarketGame& game);

}  // namespace collusion
