#include "collusion/io/json_codec.hpp"

#include "../overloaded.hpp"

namespace collusion::io {

namespace {

OrderedJson clauses_to_json(const std::vector<Clause>& clauses) {
  OrderedJson out = OrderedJson::array();
  for (const auto& c : clauses) out.push_back(c);
  return out;
}

std::vector<Clause> clauses_from_json(const Json& value, const std::string& path) {
  if (!value.is_array()) fail_at(path, "expected array of clauses, got " + type_name(value));
  std::vector<Clause> out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    if (!value[i].is_array()) fail_at(p, "expected array of literals, got " + type_name(value[i]));
    Clause c;
    for (std::size_t j = 0; j < value[i].size(); ++j) {
      const auto lit = as_integer(value[i][j], p + "[" + std::to_string(j) + "]");
      if (lit == 0) fail_at(p + "[" + std::to_string(j) + "]", "literal 0 is not allowed");
      c.push_back(static_cast<Literal>(lit));
    }
    out.push_back(std::move(c));
  }
  return out;
}

void check_clause_vars(const std::vector<Clause>& clauses, std::size_t num_vars, const std::string& path) {
  for (std::size_t i = 0; i < clauses.size(); ++i)
    for (Literal lit : clauses[i])
      if (static_cast<std::size_t>(lit > 0 ? lit : -lit) > num_vars)
        fail_at(path + "[" + std::to_string(i) + "]",
                "literal " + std::to_string(lit) + " out of range for " + std::to_string(num_vars) + " variables");
}

OrderedJson demand_to_json(const DemandModel& demand) {
  return std::visit(
      Overloaded{
          [](const LinearDemand& d) {
            OrderedJson j;
            j["type"] = "linear";
            j["own_slope"] = d.own_slope;
            j["cross"] = d.cross;
            std::visit(Overloaded{[&](const StateIntercepts& s) {
                                    OrderedJson i;
                                    i["by_state"] = s.by_state;
                                    j["intercepts"] = i;
                                  },
                                  [&](const ClauseShiftedIntercepts& s) {
                                    OrderedJson i;
                                    i["base"] = s.base;
                                    i["shift"] = s.shift;
                                    i["clauses"] = clauses_to_json(s.clauses);
                                    j["intercepts"] = i;
                                  }},
                       d.intercepts);
            return j;
          },
          [](const ClauseIndicatorDemand& d) {
            OrderedJson j;
            j["type"] = "clause_indicator";
            j["baseline"] = d.baseline;
            j["clauses"] = clauses_to_json(d.clauses);
            return j;
          },
          [](const WeightedClauseProfitDemand& d) {
            OrderedJson j;
            j["type"] = "weighted_clause_profit";
            j["num_vars"] = d.num_vars;
            j["clauses"] = clauses_to_json(d.clauses);
            j["weights"] = d.weights;
            return j;
          },
          [](const EdgeComplementarityDemand& d) {
            OrderedJson j;
            j["type"] = "edge_complementarity";
            j["vertices"] = d.graph.num_vertices();
            OrderedJson edges = OrderedJson::array();
            for (const auto& [u, v] : d.graph.edges()) edges.push_back({u, v});
            j["edges"] = edges;
            j["reservation_price"] = d.reservation_price;
            return j;
          }},
      demand);
}

DemandModel demand_from_json(const Json& value, const std::string& path, std::size_t products) {
  ObjectReader r(value, path);
  const std::string type = r.string("type");
  DemandModel out;
  if (type == "linear") {
    LinearDemand d;
    d.own_slope = r.number_or("own_slope", 1.0);
    const bool has_cross = r.has("cross"), has_beta = r.has("beta");
    if (has_cross && has_beta) fail_at(path, "give either cross or beta, not both");
    if (has_cross) {
      d.cross = as_numbers(r.at("cross"), r.child("cross"));
      if (d.cross.size() != products * products)
        fail_at(r.child("cross"), "expected " + std::to_string(products * products) + " entries, got " +
                                      std::to_string(d.cross.size()));
    } else {
      d.cross = LinearDemand::uniform_cross(products, r.number_or("beta", 0.0));
    }
    ObjectReader ir(r.at("intercepts"), r.child("intercepts"));
    if (ir.has("by_state")) {
      StateIntercepts s;
      const Json& rows = ir.at("by_state");
      if (!rows.is_array()) fail_at(ir.child("by_state"), "expected array, got " + type_name(rows));
      for (std::size_t i = 0; i < rows.size(); ++i)
        s.by_state.push_back(as_numbers(rows[i], ir.child("by_state") + "[" + std::to_string(i) + "]"));
      d.intercepts = std::move(s);
    } else {
      ClauseShiftedIntercepts s;
      s.base = as_numbers(ir.at("base"), ir.child("base"));
      s.shift = ir.number_or("shift", 1.0);
      s.clauses = clauses_from_json(ir.at("clauses"), ir.child("clauses"));
      d.intercepts = std::move(s);
    }
    ir.finish();
    out = std::move(d);
  } else if (type == "clause_indicator") {
    ClauseIndicatorDemand d;
    d.baseline = r.number_or("baseline", 2.0);
    d.clauses = clauses_from_json(r.at("clauses"), r.child("clauses"));
    out = std::move(d);
  } else if (type == "weighted_clause_profit") {
    WeightedClauseProfitDemand d;
    d.num_vars = r.count("num_vars");
    d.clauses = clauses_from_json(r.at("clauses"), r.child("clauses"));
    check_clause_vars(d.clauses, d.num_vars, r.child("clauses"));
    d.weights = as_numbers(r.at("weights"), r.child("weights"));
    out = std::move(d);
  } else if (type == "edge_complementarity") {
    EdgeComplementarityDemand d;
    const std::size_t n = r.count("vertices");
    std::vector<Edge> edges;
    const Json& list = r.at("edges");
    if (!list.is_array()) fail_at(r.child("edges"), "expected array, got " + type_name(list));
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto e = as_counts(list[i], r.child("edges") + "[" + std::to_string(i) + "]");
      if (e.size() != 2) fail_at(r.child("edges") + "[" + std::to_string(i) + "]", "an edge has two endpoints");
      edges.emplace_back(e[0], e[1]);
    }
    try {
      d.graph = Graph(n, std::move(edges));
    } catch (const ValidationError& e) {
      fail_at(r.child("edges"), e.what());
    }
    d.reservation_price = r.number_or("reservation_price", 1.0);
    out = std::move(d);
  } else {
    fail_at(r.child("type"), "unknown demand type '" + type + "'");
  }
  r.finish();
  return out;
}

OrderedJson cost_to_json(const CostSpec& cost) {
  return std::visit(Overloaded{[](const LinearCost& c) {
                                 OrderedJson j;
                                 j["type"] = "linear";
                                 j["marginal"] = c.marginal;
                                 return j;
                               },
                               [](const QuadraticCost& c) {
                                 OrderedJson j;
                                 j["type"] = "quadratic";
                                 j["linear"] = c.linear;
                                 j["quadratic"] = c.quadratic;
                                 return j;
                               }},
                    cost);
}

CostSpec cost_from_json(const Json& value, const std::string& path) {
  ObjectReader r(value, path);
  const std::string type = r.string("type");
  CostSpec out;
  if (type == "linear") {
    out = LinearCost{as_numbers(r.at("marginal"), r.child("marginal"))};
  } else if (type == "quadratic") {
    out = QuadraticCost{as_numbers(r.at("linear"), r.child("linear")),
                        as_numbers(r.at("quadratic"), r.child("quadratic"))};
  } else {
    fail_at(r.child("type"), "unknown cost type '" + type + "'");
  }
  r.finish();
  return out;
}

}  // namespace

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(source + ": " + e.what());
  }
}

OrderedJson game_to_json(const MarketGame& game) {
  OrderedJson j;
  j["firms"] = game.n_firms;
  j["products_per_firm"] = game.products_per_firm;
  j["demand"] = demand_to_json(game.demand);
  std::visit(Overloaded{[&](const ExplicitStates& s) {
                          OrderedJson st;
                          st["type"] = "explicit";
                          st["probabilities"] = s.probabilities;
                          j["states"] = st;
                        },
                        [&](const BitVectorStates& s) {
                          OrderedJson st;
                          st["type"] = "bit_vector";
                          st["num_vars"] = s.num_vars;
                          j["states"] = st;
                        }},
             game.states);
  j["noise_variance"] = game.noise_variance;
  j["noise_bound"] = game.noise_bound ? OrderedJson(*game.noise_bound) : OrderedJson(nullptr);
  OrderedJson costs = OrderedJson::array();
  for (const auto& c : game.costs) costs.push_back(cost_to_json(c));
  j["costs"] = costs;
  j["discount"] = game.discount;
  j["horizon"] = game.horizon ? OrderedJson(*game.horizon) : OrderedJson(nullptr);
  return j;
}

MarketGame game_from_json(const Json& value, const std::string& path) {
  ObjectReader r(value, path);
  MarketGame g;
  g.n_firms = r.count("firms");
  g.products_per_firm = r.count_or("products_per_firm", 1);
  if (g.n_firms == 0 || g.products_per_firm == 0) fail_at(path, "firms and products_per_firm must be positive");
  g.demand = demand_from_json(r.at("demand"), r.child("demand"), g.products());

  ObjectReader sr(r.at("states"), r.child("states"));
  const std::string st = sr.string("type");
  if (st == "explicit") {
    g.states = ExplicitStates{as_numbers(sr.at("probabilities"), sr.child("probabilities"))};
  } else if (st == "bit_vector") {
    g.states = BitVectorStates{sr.count("num_vars")};
  } else {
    fail_at(sr.child("type"), "unknown state space '" + st + "'");
  }
  sr.finish();

  g.noise_variance = r.number_or("noise_variance", 0.0);
  if (const Json* b = r.find("noise_bound"); b && !b->is_null()) g.noise_bound = as_number(*b, r.child("noise_bound"));

  const Json& costs = r.at("costs");
  if (costs.is_object()) {
    g.costs.assign(g.n_firms, cost_from_json(costs, r.child("costs")));
  } else if (costs.is_array()) {
    for (std::size_t i = 0; i < costs.size(); ++i)
      g.costs.push_back(cost_from_json(costs[i], r.child("costs") + "[" + std::to_string(i) + "]"));
  } else {
    fail_at(r.child("costs"), "expected object or array, got " + type_name(costs));
  }
  g.discount = r.number_or("discount", 0.95);
  if (!(g.discount > 0.0 && g.discount < 1.0)) fail_at(r.child("discount"), "discount outside (0,1)");
  if (const Json* h = r.find("horizon"); h && !h->is_null()) g.horizon = as_count(*h, r.child("horizon"));
  r.finish();

  if (const auto* lin = std::get_if<LinearDemand>(&g.demand))
    if (const auto* d = std::get_if<ClauseShiftedIntercepts>(&lin->intercepts))
      if (const auto* bv = std::get_if<BitVectorStates>(&g.states))
        check_clause_vars(d->clauses, bv->num_vars, path + ".demand.intercepts.clauses");

  auto findings = validate_game(g);
  for (const auto& f : findings)
    if (f.severity == Severity::kViolation) fail_at(path, f.message);
  return g;
}

OrderedJson matrix_to_json(const FirmProductMatrix& m) {
  OrderedJson rows = OrderedJson::array();
  for (std::size_t i = 0; i < m.firms(); ++i) rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
  return rows;
}

FirmProductMatrix matrix_from_json(const Json& value, const std::string& path) {
  if (!value.is_array() || value.empty()) fail_at(path, "expected a nonempty array of firm rows");
  std::vector<double> flat;
  std::size_t k = 0;
  for (std::size_t i = 0; i < value.size(); ++i) {
    const auto row = as_numbers(value[i], path + "[" + std::to_string(i) + "]");
    if (i == 0) k = row.size();
    if (row.size() != k || k == 0) fail_at(path + "[" + std::to_string(i) + "]", "rows must share a positive length");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return FirmProductMatrix(value.size(), k, std::move(flat));
}

OrderedJson profile_to_json(const StrategyProfile& profile) {
  OrderedJson j;
  j["pooling"] = profile.is_pooling();
  if (profile.is_pooling()) {
    j["prices"] = matrix_to_json(profile.prices(0));
  } else {
    OrderedJson table = OrderedJson::array();
    for (const auto& p : profile.table()) table.push_back(matrix_to_json(p));
    j["table"] = table;
  }
  return j;
}

StrategyProfile profile_from_json(const Json& value, const std::string& path) {
  ObjectReader r(value, path);
  StrategyProfile out;
  if (r.boolean_or("pooling", true)) {
    out = StrategyProfile::pooling(matrix_from_json(r.at("prices"), r.child("prices")));
  } else {
    const Json& table = r.at("table");
    if (!table.is_array()) fail_at(r.child("table"), "expected array, got " + type_name(table));
    std::vector<PriceVector> rows;
    for (std::size_t s = 0; s < table.size(); ++s)
      rows.push_back(matrix_from_json(table[s], r.child("table") + "[" + std::to_string(s) + "]"));
    out = StrategyProfile::tabular(std::move(rows));
  }
  r.finish();
  return out;
}

OrderedJson budget_to_json(const CapacityBudget& budget) {
  return budget.is_unlimited() ? OrderedJson("unlimited") : OrderedJson(*budget.max_nodes);
}

CapacityBudget budget_from_json(const Json& value, const std::string& path) {
  if (value.is_string()) {
    if (value.get<std::string>() == "unlimited") return CapacityBudget::unlimited();
    fail_at(path, "expected a node count or \"unlimited\"");
  }
  return CapacityBudget::nodes(as_count(value, path));
}

OrderedJson instance_to_json(const DecisionInstance& instance) {
  OrderedJson j;
  std::visit(Overloaded{[&](const CspPayload& p) {
                          j["problem"] = "csp";
                          j["game"] = game_to_json(instance.game);
                          j["target"] = p.target;
                          j["price_levels"] = p.price_levels;
                        },
                        [&](const CdpPayload& p) {
                          j["problem"] = "cdp";
                          j["game"] = game_to_json(instance.game);
                          j["profile"] = profile_to_json(p.profile);
                          j["observed_prices"] = matrix_to_json(p.observation.prices);
                          j["observed_quantities"] = matrix_to_json(p.observation.quantities);
                          j["noise_bound"] = p.noise_bound;
                        },
                        [&](const OppPayload& p) {
                          j["problem"] = "opp";
                          j["game"] = game_to_json(instance.game);
                          j["deviator"] = p.deviator;
                          j["profile"] = profile_to_json(p.profile);
                          j["payoff_bound"] = p.payoff_bound;
                          j["max_punishers"] = p.max_punishers;
                          j["aggressive_price"] = p.aggressive_price;
                        }},
             instance.payload);
  return j;
}

DecisionInstance instance_from_json(const Json& value, const std::string& path) {
  ObjectReader r(value, path);
  DecisionInstance out;
  const std::string problem = r.string("problem");
  out.game = game_from_json(r.at("game"), r.child("game"));
  if (problem == "csp") {
    CspPayload p;
    p.target = r.number("target");
    if (const Json* levels = r.find("price_levels")) {
      if (!levels->is_array()) fail_at(r.child("price_levels"), "expected array, got " + type_name(*levels));
      for (std::size_t i = 0; i < levels->size(); ++i)
        p.price_levels.push_back(as_numbers((*levels)[i], r.child("price_levels") + "[" + std::to_string(i) + "]"));
    }
    out.payload = std::move(p);
  } else if (problem == "cdp") {
    CdpPayload p;
    p.profile = profile_from_json(r.at("profile"), r.child("profile"));
    p.observation.prices = matrix_from_json(r.at("observed_prices"), r.child("observed_prices"));
    p.observation.quantities = matrix_from_json(r.at("observed_quantities"), r.child("observed_quantities"));
    p.noise_bound = r.number_or("noise_bound", 0.5);
    out.payload = std::move(p);
  } else if (problem == "opp") {
    OppPayload p;
    p.deviator = r.count_or("deviator", 0);
    p.profile = profile_from_json(r.at("profile"), r.child("profile"));
    p.payoff_bound = r.number_or("payoff_bound", 0.0);
    p.max_punishers = r.count("max_punishers");
    p.aggressive_price = r.number_or("aggressive_price", 0.0);
    out.payload = std::move(p);
  } else {
    fail_at(r.child("problem"), "unknown problem '" + problem + "' (expected csp, cdp or opp)");
  }
  r.finish();
  return out;
}

OrderedJson verdict_to_json(const Verdict& verdict) {
  OrderedJson j;
  j["answer"] = to_string(verdict.answer);
  j["nodes_expanded"] = verdict.nodes_expanded;
  std::visit(Overloaded{[&](std::monostate) { j["certificate"] = nullptr; },
                        [&](const CspCertificate& c) {
                          OrderedJson cj;
                          cj["prices"] = matrix_to_json(c.prices);
                          cj["expected_joint_profit"] = c.expected_joint_profit;
                          j["certificate"] = cj;
                        },
                        [&](const CdpCertificate& c) {
                          OrderedJson cj;
                          cj["state"] = to_string(c.state);
                          cj["residuals"] = matrix_to_json(c.residuals);
                          j["certificate"] = cj;
                        },
                        [&](const OppCertificate& c) {
                          OrderedJson cj;
                          cj["aggressive"] = c.aggressive;
                          cj["deviator_payoff"] = c.deviator_payoff;
                          j["certificate"] = cj;
                        }},
             verdict.certificate);
  return j;
}

}  // namespace collusion::io
