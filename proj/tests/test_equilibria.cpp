#include <cmath>

#include "collusion/equilibria.hpp"
#include "collusion/error.hpp"
#include "collusion/parallel.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace collusion;
using namespace testing_support;

namespace {

// Brute-force argmax of firm i's profit over a 1-D price grid.
double grid_best_response(const MarketGame& g, std::size_t firm, PriceVector p, const DemandState& s, double step) {
  double best = -1e300, arg = 0.0;
  for (double x = 0.0; x <= 20.0 + 1e-12; x += step) {
    p(firm, 0) = x;
    const double v = eval_profit(g, firm, p, eval_demand(g, p, s));
    if (v > best) {
      best = v;
      arg = x;
    }
  }
  return arg;
}

}  // namespace

TEST_CASE("best response against a rival at 7") {
  const auto g = single_state_duopoly();
  const auto br = solve_cbr(g, 0, prices({0.0, 7.0}));
  CHECK(br[0] == doctest::Approx(7.25).epsilon(1e-12));
  CHECK(std::abs(grid_best_response(g, 0, prices({0.0, 7.0}), state_at(g, 0), 0.001) - 7.25) < 1e-3);
}

TEST_CASE("without interaction the best response ignores the rival") {
  const auto g = single_state_duopoly(10.0, 0.0);
  const auto a = solve_cbr(g, 0, prices({0.0, 0.0}));
  const auto b = solve_cbr(g, 0, prices({0.0, 1e6}));
  CHECK(a[0] == doctest::Approx(5.5));
  CHECK(a == b);
  const auto fp = competitive_fixed_point(g);
  CHECK(fp.converged);
  CHECK(fp.iterations == 1);
  CHECK(fp.prices(0, 0) == doctest::Approx(5.5));
}

TEST_CASE("competitive and collusive prices per state") {
  const auto g = duopoly();
  for (std::size_t s = 0; s < 2; ++s) {
    const auto one = single_state(state_at(g, s));
    const double a = s == 0 ? 10.0 : 4.0;
    const auto fp = competitive_fixed_point(g, one);
    CHECK(fp.converged);
    CHECK(fp.prices(0, 0) == doctest::Approx((a + 1.0) / 1.5).epsilon(1e-9));
    const auto cf = competitive_closed_form(g, one);
    CHECK(cf.prices(1, 0) == doctest::Approx((a + 1.0) / 1.5).epsilon(1e-12));
    const auto m = collusive_optimum(g, one);
    CHECK(m.prices(0, 0) == doctest::Approx(a + 0.5).epsilon(1e-12));
    const auto asc = collusive_optimum(g, one, AscentMethod{});
    CHECK(std::abs(asc.prices(0, 0) - (a + 0.5)) < 1e-5);
    const auto grid = collusive_optimum(g, one, GridMethod{{0.01, 0.0, 20.0}});
    CHECK(std::abs(grid.prices(0, 0) - (a + 0.5)) < 0.01 + 1e-9);
  }
}

TEST_CASE("grid search is independent of the worker count") {
  const auto g = duopoly();
  const auto one = single_state(state_at(g, 1));
  set_worker_count(1);
  const auto a = collusive_optimum(g, one, GridMethod{{0.05, 0.0, 10.0}});
  set_worker_count(4);
  const auto b = collusive_optimum(g, one, GridMethod{{0.05, 0.0, 10.0}});
  set_worker_count(1);
  CHECK(a.prices == b.prices);
}

TEST_CASE("oversized grids are refused") {
  const auto g = duopoly();
  CHECK_THROWS_AS(collusive_optimum(g, GridMethod{{1e-4, 0.0, 20.0}}), RefusalError);
}

TEST_CASE("deviation payoff against the collusive profile") {
  const auto g = single_state_duopoly();
  const auto prof = collusive_profile(g);
  const double pd = deviation_payoff(g, 0, prof);
  PriceVector p = prices({8.125, 10.5});
  CHECK(pd == doctest::Approx(eval_profit(g, 0, p, eval_demand(g, p, state_at(g, 0)))).epsilon(1e-12));
  const auto comp = competitive_profile(g);
  CHECK(deviation_payoff(g, 0, comp) == doctest::Approx(profile_payoff(g, 0, comp)).epsilon(1e-12));
  const auto g0 = single_state_duopoly(10.0, 0.0);
  CHECK(deviation_payoff(g0, 0, collusive_profile(g0)) == doctest::Approx(profile_payoff(g0, 0, collusive_profile(g0))));
}

TEST_CASE("delta star") {
  CHECK(compute_delta_star(30, 22.5, 10) == doctest::Approx(0.375));
  CHECK(compute_delta_star(30, 30, 10) == 0.0);
  CHECK(compute_delta_star(30, 10, 10) == 1.0);
  CHECK_THROWS_AS(compute_delta_star(10, 10, 10), ValidationError);
}

TEST_CASE("best-response perturbations never help") {
  const auto g = duopoly(0.3);
  const auto states = state_distribution(g);
  for (double rival : {0.0, 2.0, 5.0, 9.0}) {
    PriceVector p = prices({0.0, rival});
    p(0, 0) = solve_cbr(g, 0, p, states)[0];
    const double base = expected_firm_profit(g, 0, p, states);
    for (double d : {-0.01, 0.01}) {
      PriceVector q = p;
      q(0, 0) += d;
      CHECK(expected_firm_profit(g, 0, q, states) <= base + 1e-12);
    }
  }
}

TEST_CASE("joint optimum dominates the competitive outcome") {
  const auto g = duopoly();
  const auto states = state_distribution(g);
  const auto m = collusive_optimum(g, states);
  const auto c = competitive_fixed_point(g, states);
  CHECK(expected_joint_profit_over(g, m.prices, states) > expected_joint_profit_over(g, c.prices, states));
}

TEST_CASE("quadratic costs use ascent") {
  auto g = single_state_duopoly();
  g.costs = {QuadraticCost{{1.0}, {0.5}}, QuadraticCost{{1.0}, {0.5}}};
  const auto br = solve_cbr(g, 0, prices({0.0, 7.0}));
  const double oracle = grid_best_response(g, 0, prices({0.0, 7.0}), state_at(g, 0), 0.0005);
  CHECK(std::abs(br[0] - oracle) < 1e-3);
}

TEST_CASE("coalition of everyone equals the joint optimum") {
  const auto g = duopoly();
  const auto states = state_distribution(g);
  const auto all = coalition_equilibrium(g, states, {1, 1});
  const auto m = collusive_optimum(g, states);
  CHECK(all.prices(0, 0) == doctest::Approx(m.prices(0, 0)));
  const auto none = coalition_equilibrium(g, states, {1, 0});
  const auto nash = competitive_closed_form(g, states);
  CHECK(none.prices(0, 0) == doctest::Approx(nash.prices(0, 0)));
}
