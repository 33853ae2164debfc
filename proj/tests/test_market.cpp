#include <cmath>
#include <cstring>

#include "collusion/error.hpp"
#include "collusion/market.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace collusion;
using namespace testing_support;

namespace {

MarketGame clause_game(Clause clause, std::size_t num_vars) {
  MarketGame g;
  g.n_firms = 1;
  g.products_per_firm = 1;
  g.demand = ClauseIndicatorDemand{{std::move(clause)}, 2.0};
  g.states = BitVectorStates{num_vars};
  g.costs = {LinearCost{{0.0}}};
  return g;
}

bool same_bytes(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("linear demand at a symmetric price") {
  const auto g = duopoly();
  const auto q = eval_demand(g, prices({7.0, 7.0}), state_at(g, 0));
  CHECK(q(0, 0) == 6.5);
  CHECK(q(1, 0) == 6.5);
  const auto low = eval_demand(g, prices({7.0, 7.0}), state_at(g, 1));
  CHECK(low(0, 0) == 0.5);
}

TEST_CASE("noise enters additively") {
  const auto g = duopoly();
  NoiseMatrix eps(2, 1, std::vector<double>{0.25, -1.0});
  const auto q = eval_demand(g, prices({7.0, 7.0}), state_at(g, 0), eps);
  CHECK(q(0, 0) == 6.75);
  CHECK(q(1, 0) == 5.5);
}

TEST_CASE("clause indicator demand") {
  const auto g = clause_game({1, 2, -3}, 3);
  const auto q = eval_demand(g, prices({123.0}), DemandState::from_assignment({1, 0, 0}));
  CHECK(q(0, 0) == 3.0);
  const auto g1 = clause_game({1, 1, 1}, 1);
  CHECK(eval_demand(g1, prices({0.0}), DemandState::from_assignment({0}))(0, 0) == 2.0);
}

TEST_CASE("clause indicator demand ignores prices") {
  const auto g = clause_game({1, 2, -3}, 3);
  for (std::size_t s = 0; s < 8; ++s) {
    const auto state = state_at(g, s);
    const double ref = eval_demand(g, prices({0.0}), state)(0, 0);
    for (double p = 0.0; p <= 50.0; p += 2.5) CHECK(eval_demand(g, prices({p}), state)(0, 0) == ref);
  }
}

TEST_CASE("dimension mismatch names the axis") {
  const auto g = duopoly();
  CHECK_THROWS_WITH_AS(eval_demand(g, prices({1.0, 2.0, 3.0}), state_at(g, 0)), doctest::Contains("firm"),
                       ValidationError);
  CHECK_THROWS_AS(eval_demand(g, PriceVector(2, 2), state_at(g, 0)), ValidationError);
  CHECK_THROWS_AS(eval_demand(g, prices({1.0, 2.0}), DemandState::from_index(5)), ValidationError);
}

TEST_CASE("noise draws") {
  auto g = duopoly();
  g.noise_variance = 0.0;
  const auto zero = sample_noise(7, g);
  for (double v : zero.values()) CHECK(v == 0.0);

  g.noise_variance = 1.0;
  CHECK(sample_noise(99, g) == sample_noise(99, g));
  CHECK_FALSE(sample_noise(99, g) == sample_noise(100, g));

  g.noise_variance = 4.0;
  Rng rng = make_rng(2024);
  const std::size_t n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t k = 0; k < n / 2; ++k) {
    const auto eps = sample_noise(rng, g);
    for (double v : eps.values()) {
      sum += v;
      sum_sq += v * v;
    }
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(var - 4.0) < 0.2);
  CHECK(std::abs(mean) < 0.05);
}

TEST_CASE("truncated noise stays inside the bound") {
  auto g = duopoly();
  g.noise_variance = 1.0;
  g.noise_bound = 0.5;
  Rng rng = make_rng(3);
  for (int k = 0; k < 2000; ++k) {
    const auto eps = sample_noise(rng, g);
    for (double v : eps.values()) CHECK(std::abs(v) < 0.5);
  }
}

TEST_CASE("profit arithmetic") {
  const auto g = duopoly();
  const QuantityMatrix q(2, 1, std::vector<double>{6.5, 6.5});
  CHECK(eval_profit(g, 0, prices({7.0, 7.0}), q) == 39.0);
  CHECK(eval_profit(g, 1, prices({7.0, 7.0}), QuantityMatrix(2, 1, 0.0)) == 0.0);

  auto quad = duopoly();
  quad.costs = {QuadraticCost{{0.0}, {1.0}}, QuadraticCost{{0.0}, {1.0}}};
  CHECK(eval_profit(quad, 0, prices({2.0, 2.0}), QuantityMatrix(2, 1, std::vector<double>{3.0, 3.0})) == -3.0);
  CHECK_THROWS_AS(eval_profit(g, 2, prices({7.0, 7.0}), q), ValidationError);
}

TEST_CASE("evaluators are pure") {
  auto g = duopoly();
  g.noise_variance = 0.3;
  const auto p = prices({6.1, 8.3});
  const auto eps = sample_noise(5, g);
  const auto q1 = eval_demand(g, p, state_at(g, 1), eps);
  const auto q2 = eval_demand(g, p, state_at(g, 1), eps);
  CHECK(same_bytes(q1.values(), q2.values()));
  const double a = eval_profit(g, 0, p, q1), b = eval_profit(g, 0, p, q2);
  CHECK(std::memcmp(&a, &b, sizeof a) == 0);
}

TEST_CASE("exact expected joint profit") {
  MarketGame g = duopoly();
  LinearDemand d = std::get<LinearDemand>(g.demand);
  // Joint profits 30 and 50 at p = (1,1) with zero costs and no cross effects.
  d.intercepts = StateIntercepts{{{16.0, 16.0}, {26.0, 26.0}}};
  d.cross = LinearDemand::uniform_cross(2, 0.0);
  g.demand = d;
  g.costs = {LinearCost{{0.0}}, LinearCost{{0.0}}};
  CHECK(expected_joint_profit(g, prices({1.0, 1.0})).value == doctest::Approx(40.0).epsilon(1e-15));

  const auto one = single_state_duopoly();
  const auto p = prices({7.0, 6.0});
  const auto q = eval_demand(one, p, state_at(one, 0));
  CHECK(expected_joint_profit(one, p).value == eval_profit(one, 0, p, q) + eval_profit(one, 1, p, q));
}

TEST_CASE("expected joint profit equals the weighted sum of state profits") {
  auto g = duopoly();
  g.states = ExplicitStates{{0.3, 0.7}};
  for (double x : {5.0, 7.0, 9.5}) {
    const auto p = prices({x, x + 0.75});
    double oracle = 0.0;
    for (std::size_t s = 0; s < 2; ++s) {
      const auto q = eval_demand(g, p, state_at(g, s));
      oracle += state_probability(g, s) * (eval_profit(g, 0, p, q) + eval_profit(g, 1, p, q));
    }
    CHECK(std::abs(expected_joint_profit(g, p).value - oracle) < 1e-12);
  }
}

TEST_CASE("monte carlo expectation is deterministic and converges") {
  auto g = duopoly();
  g.noise_variance = 1.0;
  const auto p = prices({7.0, 7.0});
  const double exact = expected_joint_profit(g, p).value;
  const auto a = expected_joint_profit(g, p, MonteCarloExpectation{2000, 11});
  const auto b = expected_joint_profit(g, p, MonteCarloExpectation{2000, 11});
  CHECK(a.value == b.value);
  CHECK(a.estimator == Estimator::kMonteCarlo);
  CHECK(a.seed == 11);
  int within = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    const auto est = expected_joint_profit(g, p, MonteCarloExpectation{100000, static_cast<std::uint64_t>(s)});
    within += std::abs(est.value - exact) < 3.0 * est.standard_error;
  }
  CHECK(within >= seeds - 1);
  CHECK_THROWS_AS(expected_joint_profit(g, p, MonteCarloExpectation{0, 1}), ValidationError);
}

TEST_CASE("convex costs use noise draws with a recorded seed") {
  auto g = duopoly();
  g.noise_variance = 1.0;
  g.costs = {QuadraticCost{{1.0}, {0.5}}, QuadraticCost{{1.0}, {0.5}}};
  const auto est = expected_joint_profit(g, prices({7.0, 7.0}), ExactExpectation{1000, 4});
  CHECK(est.estimator == Estimator::kExactStatesNoiseMonteCarlo);
  CHECK(est.samples == 1000);
  CHECK(est.seed == 4);
  // E[q^2] = q^2 + 1 per firm, so the noiseless value overstates profit by 0.5 per firm and state.
  auto quiet = g;
  quiet.noise_variance = 0.0;
  const double noiseless = expected_joint_profit(quiet, prices({7.0, 7.0})).value;
  CHECK(std::abs(est.value - (noiseless - 1.0)) < 0.2);
}

TEST_CASE("exact expectation refuses wide bit-vector families") {
  MarketGame g = clause_game({1, 2, 3}, 21);
  CHECK_THROWS_AS(expected_joint_profit(g, prices({1.0})), RefusalError);
  CHECK_NOTHROW(expected_joint_profit(clause_game({1, 2, 3}, 12), prices({1.0})));
}

TEST_CASE("validation findings") {
  const auto findings = validate_game(duopoly());
  CHECK_FALSE(has_violations(findings));
  bool richness = false;
  for (const auto& f : findings) richness |= f.code == "richness" && f.severity == Severity::kWarning;
  CHECK(richness);

  auto bad = duopoly();
  bad.discount = 1.0;
  const auto v = validate_game(bad);
  REQUIRE(has_violations(v));
  bool found = false;
  for (const auto& f : v) found |= f.message.find("discount outside (0,1)") != std::string::npos;
  CHECK(found);
  CHECK_THROWS_WITH_AS(require_valid(bad), doctest::Contains("discount outside (0,1)"), ValidationError);

  auto one = duopoly();
  one.n_firms = 1;
  CHECK(has_violations(validate_game(one)));

  auto skew = duopoly();
  skew.states = ExplicitStates{{0.5, 0.6}};
  CHECK(has_violations(validate_game(skew)));

  auto concave = duopoly();
  concave.costs = {QuadraticCost{{1.0}, {-1.0}}, LinearCost{{1.0}}};
  CHECK(has_violations(validate_game(concave)));

  auto strict = duopoly();
  CHECK(has_violations(validate_game(strict, {true})));
  strict.noise_variance = 0.1;
  CHECK_FALSE(has_violations(validate_game(strict, {true})));
}

TEST_CASE("bit-vector states are rich once 2^n exceeds the product count") {
  MarketGame g;
  g.n_firms = 5;
  g.products_per_firm = 1;
  std::vector<Clause> clauses(5, Clause{1, 2, 3});
  g.demand = ClauseIndicatorDemand{clauses, 2.0};
  g.costs.assign(5, LinearCost{{0.0}});
  for (std::size_t n : {2u, 3u}) {
    g.states = BitVectorStates{n};
    bool richness = false;
    for (const auto& f : validate_game(g)) richness |= f.code == "richness";
    CHECK(richness == (n < 3));  // 2^3 = 8 >= NK + 1 = 6
  }
}

TEST_CASE("state indexing is lexicographic in x1..xn") {
  const auto g = clause_game({1, 2, 3}, 3);
  CHECK(enumerable_state_count(g) == 8);
  CHECK(state_at(g, 0).assignment() == Assignment{0, 0, 0});
  CHECK(state_at(g, 1).assignment() == Assignment{0, 0, 1});
  CHECK(state_at(g, 4).assignment() == Assignment{1, 0, 0});
  for (std::size_t s = 0; s < 8; ++s) {
    CHECK(state_index(g, state_at(g, s)) == s);
    CHECK(state_probability(g, s) == 0.125);
  }
}
