#include "collusion/cnf.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "collusion/error.hpp"
#include "collusion/rng.hpp"

namespace collusion {

double clause_satisfaction_probability(const Clause& clause) {
  std::set<Literal> lits(clause.begin(), clause.end());
  for (Literal lit : lits)
    if (lits.count(-lit)) return 1.0;
  std::set<int> vars;
  for (Literal lit : lits) vars.insert(std::abs(lit));
  return 1.0 - std::ldexp(1.0, -static_cast<int>(vars.size()));
}

namespace {

void check_clauses(std::size_t num_vars, const std::vector<Clause>& clauses) {
  for (std::size_t c = 0; c < clauses.size(); ++c) {
    for (Literal lit : clauses[c]) {
      if (lit == 0 || static_cast<std::size_t>(std::abs(lit)) > num_vars)
        throw ValidationError("clause " + std::to_string(c) + ": literal " + std::to_string(lit) +
                              " out of range for " + std::to_string(num_vars) + " variables");
    }
  }
}

}  // namespace

void check_literals(const Cnf& cnf) { check_clauses(cnf.num_vars, cnf.clauses); }

void check_literals(const WeightedCnf& cnf) {
  check_clauses(cnf.num_vars, cnf.clauses);
  if (cnf.weights.size() != cnf.clauses.size())
    throw ValidationError("weighted cnf: " + std::to_string(cnf.weights.size()) + " weights for " +
                          std::to_string(cnf.clauses.size()) + " clauses");
}

Cnf random_ksat(std::size_t num_vars, std::size_t num_clauses, std::size_t k, std::uint64_t seed) {
  if (k == 0 || k > num_vars) throw ValidationError("random_ksat: need 1 <= k <= num_vars");
  Rng rng = make_rng(seed);
  Cnf cnf;
  cnf.num_vars = num_vars;
  cnf.clauses.reserve(num_clauses);
  std::vector<int> vars;
  for (std::size_t c = 0; c < num_clauses; ++c) {
    vars.clear();
    while (vars.size() < k) {
      int v = static_cast<int>(rng() % num_vars) + 1;
      if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
    }
    Clause clause;
    for (int v : vars) clause.push_back((rng() & 1) ? v : -v);
    cnf.clauses.push_back(std::move(clause));
  }
  return cnf;
}

}  // namespace collusion
