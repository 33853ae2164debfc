#include <cmath>
#include <limits>

#include "collusion/complexity.hpp"
#include "collusion/equilibria.hpp"
#include "collusion/error.hpp"
#include "collusion/families.hpp"
#include "collusion/repeated_game.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace collusion;
using namespace testing_support;

namespace {

WeightedCnf two_clause_formula(double scale = 1.0) {
  return WeightedCnf{2, {{1, 2}, {-1}}, {3.0 * scale, 2.0 * scale}};
}

Graph path3() { return Graph(3, {{0, 1}, {1, 2}}); }

bool csp_certificate_holds(const DecisionInstance& inst, const Verdict& v) {
  const auto& cert = std::get<CspCertificate>(v.certificate);
  const double target = std::get<CspPayload>(inst.payload).target;
  return expected_joint_profit(inst.game, cert.prices).value >= target - 1e-12;
}

bool cdp_certificate_holds(const DecisionInstance& inst, const Verdict& v) {
  const auto& payload = std::get<CdpPayload>(inst.payload);
  const auto& cert = std::get<CdpCertificate>(v.certificate);
  if (!(payload.profile.prices(inst.game, cert.state) == payload.observation.prices)) return false;
  const auto predicted = eval_demand(inst.game, payload.observation.prices, cert.state);
  for (std::size_t j = 0; j < predicted.size(); ++j) {
    const double r = payload.observation.quantities.values()[j] - predicted.values()[j];
    if (!(std::abs(r) < payload.noise_bound)) return false;
    if (std::abs(r - cert.residuals.values()[j]) > 1e-12) return false;
  }
  return true;
}

bool opp_certificate_holds(const DecisionInstance& inst, const Verdict& v) {
  const auto& payload = std::get<OppPayload>(inst.payload);
  const auto& cert = std::get<OppCertificate>(v.certificate);
  if (cert.aggressive.size() > payload.max_punishers) return false;
  const auto& graph = std::get<EdgeComplementarityDemand>(inst.game.demand).graph;
  std::vector<std::uint8_t> cover(graph.num_vertices(), 0);
  for (std::size_t firm : cert.aggressive) cover[firm - 1] = 1;
  return static_cast<double>(graph.uncovered_edges(cover)) <= payload.payoff_bound &&
         cert.deviator_payoff <= payload.payoff_bound;
}

}  // namespace

TEST_CASE("strategy problem on a two-clause formula") {
  const auto yes = reduce_maxwsat_to_csp(two_clause_formula(), 2.5);
  const auto v = decide_csp(yes);
  REQUIRE(v.answer == Answer::kYes);
  const auto& cert = std::get<CspCertificate>(v.certificate);
  CHECK(cert.prices(0, 0) == 0.0);
  CHECK(cert.prices(1, 0) == 1.0);
  CHECK(cert.expected_joint_profit == doctest::Approx(2.5));
  CHECK(csp_certificate_holds(yes, v));

  CHECK(decide_csp(reduce_maxwsat_to_csp(two_clause_formula(), 2.6)).answer == Answer::kNo);
  CHECK(decide_csp(reduce_maxwsat_to_csp(two_clause_formula(), -std::numeric_limits<double>::infinity())).answer ==
        Answer::kYes);
}

TEST_CASE("strategy problem on a unit clause") {
  const auto inst = reduce_maxwsat_to_csp(WeightedCnf{1, {{1}}, {4.0}}, 4.0);
  const auto v = decide_csp(inst);
  REQUIRE(v.answer == Answer::kYes);
  CHECK(std::get<CspCertificate>(v.certificate).prices(0, 0) == 1.0);
}

TEST_CASE("scaling weights keeps the optimal prices") {
  const double best = oracles::max_weight(two_clause_formula()) / 2.0;
  const auto a = decide_csp(reduce_maxwsat_to_csp(two_clause_formula(), best));
  const auto b = decide_csp(reduce_maxwsat_to_csp(two_clause_formula(10.0), 10.0 * best));
  REQUIRE(a.answer == Answer::kYes);
  REQUIRE(b.answer == Answer::kYes);
  CHECK(std::get<CspCertificate>(a.certificate).prices == std::get<CspCertificate>(b.certificate).prices);
}

TEST_CASE("max weighted satisfiability equals m times the best joint profit") {
  Rng rng = make_rng(71);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 1 + rng() % 6;
    const std::size_t m = 1 + rng() % 8;
    const Cnf shape = random_ksat(n, m, std::min<std::size_t>(n, 1 + rng() % 3), rng());
    WeightedCnf f{n, shape.clauses, {}};
    for (std::size_t l = 0; l < m; ++l) f.weights.push_back(static_cast<double>(1 + rng() % 9));
    const auto inst = reduce_maxwsat_to_csp(f, 0.0);
    double best = 0.0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (n + 1)); ++mask) {
      PriceVector p(n + 1, 1);
      for (std::size_t i = 0; i <= n; ++i) p(i, 0) = static_cast<double>((mask >> i) & 1u);
      best = std::max(best, expected_joint_profit(inst.game, p).value);
    }
    CHECK(std::round(best * static_cast<double>(m)) == oracles::max_weight(f));
    CHECK(std::abs(best * static_cast<double>(m) - oracles::max_weight(f)) < 1e-9);
  }
}

TEST_CASE("reduction input errors") {
  CHECK_THROWS_AS(reduce_maxwsat_to_csp(WeightedCnf{2, {}, {}}, 1.0), ValidationError);
  CHECK_THROWS_AS(reduce_3sat_to_cdp(Cnf{4, {{1, 2, 3, 4}}}), ValidationError);
  CHECK_THROWS_AS(Graph(3, {{1, 1}}), ValidationError);
  CHECK_THROWS_AS(decide_opp(reduce_vc_to_opp(complete_graph(3), 4)), ValidationError);
}

TEST_CASE("detection problem examples") {
  const auto sat = reduce_3sat_to_cdp(Cnf{3, {{1, 2, -3}}});
  const auto v = decide_cdp(sat);
  REQUIRE(v.answer == Answer::kYes);
  CHECK(cdp_certificate_holds(sat, v));

  const auto contradiction = reduce_3sat_to_cdp(Cnf{1, {{1, 1, 1}, {-1, -1, -1}}});
  CHECK(decide_cdp(contradiction).answer == Answer::kNo);
  const auto padded = reduce_3sat_to_cdp(Cnf{1, {{1}, {-1}}});
  CHECK(decide_cdp(padded).answer == Answer::kNo);
  CHECK(pad_to_three(Cnf{2, {{1, -2}}}).clauses[0] == Clause{1, -2, -2});
}

TEST_CASE("detection agrees with enumeration on random formulas") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Cnf f = random_ksat(8, 34, 3, seed);
    const auto inst = reduce_3sat_to_cdp(f);
    const auto v = decide_cdp(inst);
    CHECK((v.answer == Answer::kYes) == oracles::satisfiable(f));
    if (v.answer == Answer::kYes) CHECK(cdp_certificate_holds(inst, v));
  }
}

TEST_CASE("node counts match the pruned search tree") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Cnf f = random_ksat(9, 30 + seed % 15, 3, 1000 + seed);
    const auto v = decide_cdp(reduce_3sat_to_cdp(f));
    const auto tree = oracles::pruned_tree(f);
    CHECK(v.nodes_expanded == tree.nodes);
    CHECK((v.answer == Answer::kYes) == tree.found);
  }
}

TEST_CASE("verdicts only move from unknown as the budget grows") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = reduce_3sat_to_cdp(random_ksat(10, 43, 3, 500 + seed));
    const auto full = decide_cdp(inst);
    std::optional<Answer> settled;
    for (std::size_t b = 0; b <= full.nodes_expanded + 1; ++b) {
      const auto v = decide_cdp(inst, CapacityBudget::nodes(b));
      if (settled) CHECK(v.answer == *settled);
      if (v.answer != Answer::kUnknown) {
        CHECK(v.answer == full.answer);
        settled = v.answer;
      }
    }
    CHECK(settled.has_value());
    CHECK(decide_cdp(inst, CapacityBudget::nodes(full.nodes_expanded)).answer == full.answer);
    CHECK(decide_cdp(inst, CapacityBudget::nodes(full.nodes_expanded - 1)).answer == Answer::kUnknown);
  }
}

TEST_CASE("explicit state lists cost one node per state") {
  auto g = duopoly();
  const auto profile = collusive_profile(g);
  const Observation obs{prices({8.0, 10.5}), eval_demand(g, prices({8.0, 10.5}), state_at(g, 0))};
  const auto v = decide_cdp(g, profile, obs, detection_noise_bound(g));
  CHECK(v.answer == Answer::kNo);
  CHECK(v.nodes_expanded == 2);
}

TEST_CASE("punishment problem examples") {
  const auto k3_two = reduce_vc_to_opp(complete_graph(3), 2);
  const auto v = decide_opp(k3_two);
  REQUIRE(v.answer == Answer::kYes);
  CHECK(opp_certificate_holds(k3_two, v));
  CHECK(decide_opp(reduce_vc_to_opp(complete_graph(3), 1)).answer == Answer::kNo);
  const auto path = reduce_vc_to_opp(path3(), 1);
  const auto pv = decide_opp(path);
  REQUIRE(pv.answer == Answer::kYes);
  CHECK(std::get<OppCertificate>(pv.certificate).aggressive == std::vector<std::size_t>{2});
}

TEST_CASE("punishment agrees with minimum vertex cover") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const std::size_t n = 2 + seed % 8;
    const Graph g = random_graph(n, 0.4, seed);
    const std::size_t cover = oracles::min_vertex_cover(g);
    for (std::size_t k = 0; k <= n; ++k) {
      const auto inst = reduce_vc_to_opp(g, k);
      const auto v = decide_opp(inst);
      CHECK((v.answer == Answer::kYes) == (cover <= k));
      if (v.answer == Answer::kYes) CHECK(opp_certificate_holds(inst, v));
    }
  }
}

TEST_CASE("empirical detection accuracy at the extremes") {
  const auto g = duopoly();
  const auto profile = collusive_profile(g);
  const auto dev = fixed_price_deviation(0, {8.0});
  CHECK(detection_accuracy(g, profile, CapacityBudget::unlimited(), 200, dev, 3) == 1.0);
  const auto stats = detection_statistics(g, profile, CapacityBudget::nodes(0), 200, dev, 3);
  CHECK(stats.accuracy == 0.5);
  CHECK(stats.detection_rate == 0.0);
  CHECK(stats.false_alarm_rate == 0.0);
  CHECK(stats.trials == 200);
}

TEST_CASE("empirical detection accuracy grows with the budget") {
  const auto market = sat_market(SatMarketParams{}, 8);
  const auto profile = collusive_profile(market.game);
  const auto hull = evaluate_hull(market.game, profile, 0, 1, {19, 1, 1});
  REQUIRE(!hull.candidates.empty());
  const auto dev = selective_deviation(market.game, profile, 0, hull.candidates.front().price);
  double previous = 0.0;
  for (auto b : {CapacityBudget::nodes(0), CapacityBudget::nodes(10), CapacityBudget::nodes(100),
                 CapacityBudget::nodes(1000), CapacityBudget::unlimited()}) {
    const double acc = detection_accuracy(market.game, profile, b, 100, dev, 5);
    CHECK(acc >= previous);
    previous = acc;
  }
  CHECK(previous > 0.5);
}

TEST_CASE("search costs replay the budgeted verdicts") {
  const auto market = sat_market(SatMarketParams{}, 9);
  const auto profile = collusive_profile(market.game);
  const auto dev = fixed_price_deviation(0, std::vector<double>(1, profile.prices(0)(0, 0) - 0.3));
  const auto costs = deviation_search_costs(market.game, profile, dev, 20, 17);
  for (std::size_t s : {0u, 5u, 50u, 500u}) {
    std::size_t caught = 0;
    for (auto c : costs) caught += c != kNeverDetected && c <= s;
    CHECK(detected_fraction(costs, CapacityBudget::nodes(s)) == doctest::Approx(caught / 20.0));
  }
}

TEST_CASE("market complexity index") {
  FamilyGenerator family = [](std::size_t n, std::uint64_t seed) {
    SatMarketParams params;
    params.num_vars = n;
    params.num_clauses = 3 * n;
    auto market = sat_market(params, seed);
    auto profile = collusive_profile(market.game);
    const auto hull = evaluate_hull(market.game, profile, 0, seed, {19, 1, 1});
    auto dev = selective_deviation(market.game, profile, 0, hull.candidates.front().price);
    return FamilyInstance{std::move(market.game), std::move(profile), std::move(dev)};
  };
  const std::vector<std::size_t> sizes{4, 6, 8};
  const auto unlimited =
      estimate_complexity_index(family, sizes, [](std::size_t) { return CapacityBudget::unlimited(); }, 40, 0.55, 1);
  CHECK_FALSE(unlimited.index.has_value());
  const auto none =
      estimate_complexity_index(family, sizes, [](std::size_t) { return CapacityBudget::nodes(0); }, 40, 0.55, 1);
  REQUIRE(none.index.has_value());
  CHECK(*none.index == 4);
  const auto fixed =
      estimate_complexity_index(family, sizes, [](std::size_t) { return CapacityBudget::nodes(1000); }, 40, 0.55, 1);
  CHECK(fixed.accuracy_by_size.size() >= 1);
}
